import json
import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE))


@pytest.fixture(scope="session")
def oracle():
    return json.loads((HERE / "data" / "oracles.json").read_text())
