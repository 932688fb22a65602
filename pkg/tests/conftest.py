import pathlib

import pytest

from okmlib import load_csv

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
IRIS_PATH = REPO_ROOT / "data" / "iris.csv"


@pytest.fixture(scope="session")
def iris():
    return load_csv(IRIS_PATH, label_column="last")
