import json
import numpy as np
import pandas as pd
import pytest

from modules.data_handler import DataHandler, read_parameter_file, MANIFEST
from modules.exceptions import InvalidConfig


def test_tables_and_documents(tmp_path):
    data = DataHandler()
    data.set_output_directory(str(tmp_path / "out"))
    data.add_table("curve", pd.DataFrame({"x": [0.1, 1 / 3], "y": [np.nan, 2.0]}))
    data("layer", pd.DataFrame({"a": [1]}))
    data.add_document("lift", {"x_e": np.array([1.0, 0.5]), "converged": np.bool_(True)})
    assert data.documents["lift"] == {"x_e": [1.0, 0.5], "converged": True}
    with pytest.raises(ValueError):
        data.add_table("curve", pd.DataFrame())

    written = data.save_all(manifest={"command": "certify"})
    assert written == ["curve.csv", "layer.csv", "lift.json"]
    manifest = json.loads((tmp_path / "out" / MANIFEST).read_text())
    assert manifest == {"config": {"command": "certify"}, "files": written}
    # full precision survives the csv round trip
    assert pd.read_csv(tmp_path / "out" / "curve.csv")["x"].iloc[1] == 1 / 3


def test_saving_is_deterministic(tmp_path):
    outputs = []
    for name in ("a", "b"):
        data = DataHandler()
        data.set_output_directory(str(tmp_path / name))
        data.add_document("doc", {"b": 1, "a": [0.1, 0.2]})
        data.save_all(manifest={"seed": 0})
        outputs.append(((tmp_path / name / "doc.json").read_bytes(), (tmp_path / name / MANIFEST).read_bytes()))
    assert outputs[0] == outputs[1]


def test_reset_keeps_the_directory(tmp_path):
    data = DataHandler(str(tmp_path))
    data.add_table("t", pd.DataFrame({"a": [1]}))
    data.reset()
    assert data.tables == {}
    assert data.data_directory == str(tmp_path)


def test_output_directory_must_be_a_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(InvalidConfig):
        DataHandler().set_output_directory(str(blocker / "out"))


def test_read_parameter_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"model": "mri", "params": {"gamma": 0.1}, "tolerances": {"rtol": 1e-8}}))
    assert read_parameter_file(str(path)) == ("mri", {"gamma": 0.1}, {"rtol": 1e-8})
    path.write_text(json.dumps({"params": {"M": 0.01}}))
    assert read_parameter_file(str(path)) == (None, {"M": 0.01}, {})


@pytest.mark.parametrize("content", ['[1, 2]', '{"M": 0.01}', '{"model": "mri", "seed": 3}', '{"params": [1]}',
                                     '{"model": 2}', '{"tolerances": 1e-8}'])
def test_read_parameter_file_rejects(tmp_path, content):
    path = tmp_path / "config.json"
    path.write_text(content)
    with pytest.raises(InvalidConfig):
        read_parameter_file(str(path))


def test_missing_parameter_file(tmp_path):
    with pytest.raises(InvalidConfig):
        read_parameter_file(str(tmp_path / "missing.json"))
