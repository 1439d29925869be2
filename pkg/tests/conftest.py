from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def pytest_collection_modifyitems(config, items):
    if os.environ.get("TWOCYC_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="extended target; set TWOCYC_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def golden_v():
    return json.loads((DATA / "golden_V.json").read_text())


@pytest.fixture(scope="session")
def generic15():
    """Generic table in a2..a15 (shared; V_15 is the slow part)."""
    from twocyc.stability import generic_table

    table = generic_table(15)
    table.reduced_constants(15)
    return table
