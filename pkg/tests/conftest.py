import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def oracle():
    with open(FIXTURES / "oracle.json", "r", encoding="utf-8") as fh:
        return json.load(fh)
