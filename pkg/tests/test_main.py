import json
import numpy as np
import pytest

from main import App, bracket_spot_check, resolve_config, build_parser
from modules.exceptions import InvalidConfig


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = App().run([*args, "--out", str(out)])
    return code, out


def test_saturation_fedbatch(tmp_path):
    code, out = run(tmp_path, "saturation", "--model", "fedbatch")
    assert code == 0
    document = json.loads((out / "saturation.json").read_text())
    assert np.allclose(document["x_star"], [1.0, 2.4], atol=1e-9)
    assert (out / "saturation_samples.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["model"] == "fedbatch"
    assert "saturation.json" in manifest["files"]


def test_saturation_mri(tmp_path):
    code, out = run(tmp_path, "saturation", "--model", "mri")
    assert code == 0
    assert np.allclose(json.loads((out / "saturation.json").read_text())["x_star"], [-0.1125, -0.125], atol=1e-9)


def test_prior_lift_mri(tmp_path):
    code, out = run(tmp_path, "prior-lift", "--model", "mri")
    assert code == 0
    document = json.loads((out / "prior_lift.json").read_text())
    assert document["admissibility"]["passed"]
    assert document["z_e"]["x"][1] == pytest.approx(-0.125, abs=1e-7)
    assert document["assumption_report"]["us_at_ze"] < 1


def test_invalid_configuration_exit_code(tmp_path):
    assert run(tmp_path, "synthesis", "--grid", "4by4")[0] == 3
    assert run(tmp_path, "saturation", "--model", "fedbatch", "--rtol", "-1")[0] == 3
    assert run(tmp_path, "simulate", "--model", "mri")[0] == 3
    params = tmp_path / "params.json"
    params.write_text(json.dumps({"params": {"Q_max": 30.0}}))
    assert run(tmp_path, "saturation", "--params", str(params))[0] == 3


def test_unclassified_start_exit_code(tmp_path):
    assert run(tmp_path, "simulate", "--model", "mri", "--x0", "-0.3,0.4")[0] == 2


def test_unknown_subcommand_is_rejected():
    with pytest.raises(SystemExit):
        App().run(["optimize"])


def test_resolve_config_merges_file_and_flags(tmp_path):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({"params": {"M": 0.01}, "tolerances": {"rtol": 1e-8, "atol": 1e-10}}))
    args = build_parser().parse_args(["simulate", "--params", str(params), "--rtol", "1e-9", "--x0", "1,2",
                                      "--grid", "5x7"])
    config = resolve_config(args)
    assert config.params == {"M": 0.01}
    assert config.model == "fedbatch"
    assert config.tolerances.rtol == 1e-9
    assert config.tolerances.atol == 1e-10
    assert config.x0 == (1.0, 2.0)
    assert config.grid == (5, 7)
    with pytest.raises(InvalidConfig):
        resolve_config(build_parser().parse_args(["simulate", "--x0", "1"]))


def test_model_config_file(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"model": "mri", "params": {}}))
    code, out = run(tmp_path, "saturation", "--params", str(config))
    assert code == 0
    assert json.loads((out / "manifest.json").read_text())["config"]["model"] == "mri"
    assert np.allclose(json.loads((out / "saturation.json").read_text())["x_star"], [-0.1125, -0.125], atol=1e-9)
    assert run(tmp_path, "saturation", "--params", str(config), "--model", "mri")[0] == 0


def test_model_config_file_conflicts(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"model": "mri", "params": {}}))
    assert run(tmp_path, "saturation", "--params", str(config), "--model", "fedbatch")[0] == 3
    config.write_text(json.dumps({"model": "bloch"}))
    assert run(tmp_path, "saturation", "--params", str(config))[0] == 3
    config.write_text(json.dumps({"model": "mri", "params": {}, "grid": "5x5"}))
    assert run(tmp_path, "saturation", "--params", str(config))[0] == 3


@pytest.mark.slow
def test_certify_runs_are_byte_identical(tmp_path):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert App().run(["certify", "--model", "fedbatch", "--n-samples", "11", "--out", str(out)]) == 0
        outputs.append({path.name: path.read_bytes() for path in sorted(out.iterdir())})
    assert set(outputs[0]) >= {"certificate.json", "switching_curve.csv", "manifest.json"}
    assert outputs[0] == outputs[1]


def test_bracket_spot_check_is_seeded(mri_model):
    first = bracket_spot_check(mri_model, seed=3)
    assert first == bracket_spot_check(mri_model, seed=3)
    assert first["max_relative_residual"] <= 1e-8
