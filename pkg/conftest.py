"""
Shared pytest configuration: long acceptance runs only run with SWARMQ_RUN_SLOW=1
"""

import os

import pytest

RUN_SLOW = os.getenv("SWARMQ_RUN_SLOW", "0") == "1"


def pytest_collection_modifyitems(config, items):
    if RUN_SLOW:
        return
    skip_slow = pytest.mark.skip(reason="set SWARMQ_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
