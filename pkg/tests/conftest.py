import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cetlab.network import rooted, semidirected  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="include five-leaf sweeps")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow") or os.environ.get("CETLAB_SLOW"):
        return
    skip = pytest.mark.skip(reason="five-leaf sweep; pass --run-slow or set CETLAB_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long exhaustive sweep, off by default")


@pytest.fixture
def parallel_pair():
    """Two leaves, one reticulation reached by a parallel pair."""
    return semidirected([("t", "r", True), ("t", "r", True), ("t", "x1", False), ("r", "x2", False)])


@pytest.fixture
def parallel_pair_swapped():
    return semidirected([("t", "r", True), ("t", "r", True), ("t", "x2", False), ("r", "x1", False)])


@pytest.fixture
def triangle_partner():
    """Rooted partner of ``parallel_pair``: the root child sources a 3-cycle."""
    return rooted([("rho", "t"), ("t", "a"), ("t", "r"), ("a", "r"), ("a", "x1"), ("r", "x2")])


@pytest.fixture
def cherry():
    return rooted([("rho", "t"), ("t", "x1"), ("t", "x2")])
