import logging

import numpy as np
import pytest

from shp import BinnedCounts, CausalGraph, SHPParams, simulate_discrete

LOG_LEVELS = {
    '0': logging.ERROR,
    '1': logging.WARNING,
    '2': logging.INFO,
    '3': logging.DEBUG,
}


def pytest_addoption(parser):
    parser.addoption(
        '--run-slow',
        action='store_true',
        default=False,
        help='Also run the full-scale statistical studies',
    )


def pytest_configure(config):
    logging.basicConfig(
        level=LOG_LEVELS.get(config.option.verbose, logging.DEBUG),
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption('--run-slow'):
        return
    skip = pytest.mark.skip(reason='needs --run-slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def quiet_environment(monkeypatch):
    monkeypatch.delenv('SHP_THREADS', raising=False)
    monkeypatch.delenv('SHP_PROGRESS', raising=False)


@pytest.fixture
def chain_graph():
    return CausalGraph(('a', 'b', 'c'), {('a', 'b'), ('b', 'c')})


@pytest.fixture
def chain_params():
    A = np.array(
        [
            [0.1, 0.4, 0.0],
            [0.0, 0.0, 0.5],
            [0.0, 0.0, 0.05],
        ]
    )
    return SHPParams(A, np.array([0.3, 0.05, 0.05]), beta=1.0, delta=1.0)


@pytest.fixture
def chain_counts(chain_graph, chain_params) -> BinnedCounts:
    return simulate_discrete(chain_params, chain_graph, 2000, seed=7)
