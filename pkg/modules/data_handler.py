"""
Data handler class. Keeps the result tables and documents of a run and writes them, together with a
manifest, into the output directory.

Author: Prior-Saturation Toolkit developers
Version: 1.1
"""

# Import packages ----------------------------------------------
import os
import json
import logging
import pandas as pd

# Import functions from other scripts ----------------------
from modules.exceptions import InvalidConfig
from utils.helpers import to_builtin

# Global variable ----------------------------------------------
logger = logging.getLogger(__name__)
FLOAT_FORMAT = '%.17g'
MANIFEST = 'manifest.json'
CONFIG_KEYS = {'model', 'params', 'tolerances'}


# Classes ------------------------------------------------------
class DataHandler:
    """
    Creates an instance of the DataHandler class which at its core contains a dictionary of Pandas
    Dataframes (one per result table) and one of JSON documents. Tables are written as CSV with 17
    significant digits, documents as sorted JSON.
    """

    def __init__(self, data_directory: str | None = None):
        self.data_directory = data_directory
        self.tables: dict[str, pd.DataFrame] = {}
        self.documents: dict[str, dict] = {}
        self.written: list[str] = []

    def __call__(self, name: str, frame: pd.DataFrame) -> None:
        self.add_table(name, frame)

    def reset(self):
        """
        Method to reset the data_handler instance, the output directory is kept
        """
        data_directory = self.data_directory
        self.__init__(data_directory)

    """
    Methods to collect results
    """

    def add_table(self, name: str, frame: pd.DataFrame) -> None:
        if name in self.tables:
            raise ValueError(f'The table {name} already exists')
        self.tables[name] = frame

    def add_document(self, name: str, document: dict) -> None:
        if name in self.documents:
            raise ValueError(f'The document {name} already exists')
        self.documents[name] = to_builtin(document)

    """
    File management functionality
    """

    def set_output_directory(self, path: str) -> None:
        """
        Creates the output directory if needed and checks that it is writable
        """
        try:
            os.makedirs(path, exist_ok=True)
        except OSError as e:
            raise InvalidConfig(f'Cannot create output directory {path}: {e}') from e
        if not os.access(path, os.W_OK):
            raise InvalidConfig(f'Output directory {path} is not writable')
        self.data_directory = path

    def _path(self, filename: str) -> str:
        if self.data_directory is None:
            raise ValueError('No output directory declared')
        return os.path.join(self.data_directory, filename)

    def save_table(self, name: str) -> str:
        path = self._path(f'{name}.csv')
        self.tables[name].to_csv(path, index=False, float_format=FLOAT_FORMAT)
        self.written.append(os.path.basename(path))
        return path

    def save_document(self, name: str) -> str:
        path = self._path(f'{name}.json')
        with open(path, 'w') as f:
            json.dump(self.documents[name], f, indent=2, sort_keys=True)
            f.write('\n')
        self.written.append(os.path.basename(path))
        return path

    def save_all(self, manifest: dict | None = None) -> list[str]:
        """
        Writes every table and document and, when given, the manifest listing them
        :param manifest: dict - resolved configuration of the run
        :return: list of written file names
        """
        for name in sorted(self.tables):
            self.save_table(name)
        for name in sorted(self.documents):
            self.save_document(name)
        if manifest is not None:
            self.write_manifest(manifest)
        logger.info('Saved %d files under %s', len(self.written), self.data_directory)
        return list(self.written)

    def write_manifest(self, config: dict) -> str:
        """
        Manifest with the resolved configuration and the files of the run; carries no timestamps so that
        identical runs give identical bytes
        """
        path = self._path(MANIFEST)
        document = to_builtin({'config': config, 'files': sorted(self.written)})
        with open(path, 'w') as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write('\n')
        return path


# Static functions ---------------------------------------------
def read_parameter_file(filepath: str) -> tuple[str | None, dict, dict]:
    """
    Reads a JSON model config {"model": ..., "params": {...}, "tolerances": {...}}. Every key is optional,
    any other top-level key is rejected
    :param filepath: str - path of the JSON file
    :return: (model name or None, params, tolerance overrides)
    """
    try:
        with open(filepath, 'r') as f:
            content = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidConfig(f'Cannot read parameter file {filepath}: {e}') from e
    if not isinstance(content, dict):
        raise InvalidConfig(f'Parameter file {filepath} must hold a JSON object')
    unknown = set(content) - CONFIG_KEYS
    if unknown:
        raise InvalidConfig(f'Unknown keys in {filepath}: {sorted(unknown)}, expected {sorted(CONFIG_KEYS)}')
    model = content.get('model')
    if model is not None and not isinstance(model, str):
        raise InvalidConfig('"model" must be a string')
    for key in ('params', 'tolerances'):
        if not isinstance(content.get(key, {}), dict):
            raise InvalidConfig(f'"{key}" must be a JSON object')
    return model, content.get('params', {}), content.get('tolerances', {})


# Testing--------------------------------------------------
if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO)
    data = DataHandler()
    data.set_output_directory('output')
    data.add_table('example', pd.DataFrame({'a': [0.1, 1 / 3]}))
    print(data.save_all(manifest={'command': 'example'}))
