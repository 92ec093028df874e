import numpy as np
import pytest

from hierassoclib import AssocArray, Semiring, builtin_semiring

semiring_names = Semiring.names()

#Integer value ranges that keep every builtin semiring exact and inside its domain.
value_ranges = {
    "plus_times": (-3, 3),
    "max_plus": (-5, 5),
    "min_plus": (-5, 5),
    "max_times": (0, 5),
    "min_times": (0, 5),
    "max_min": (-5, 5),
    "min_max": (-5, 5),
}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the desk-scale benchmark tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale benchmark test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def key_pool(size):
    return [f"k{i:02d}" for i in range(size)]


def random_array(rng, semiring, max_keys=20, max_entries=60):
    """
    A random integer-valued array over a shared pool of keys, so rows of one array can meet columns of another.
    """
    semiring = builtin_semiring(semiring)
    low, high = value_ranges[semiring.name]
    pool = key_pool(max_keys)
    count = int(rng.integers(0, max_entries + 1))
    rows = [pool[i] for i in rng.integers(0, max_keys, size=count)]
    cols = [pool[i] for i in rng.integers(0, max_keys, size=count)]
    vals = rng.integers(low, high + 1, size=count).astype(np.float64)
    return AssocArray.from_triples(rows, cols, vals, semiring)


@pytest.fixture
def rng():
    return np.random.default_rng(20180501)


@pytest.fixture
def small_graph():
    # A 5-edge toy network: who talks to whom.
    rows = ["1.1.1.1", "1.1.1.1", "2.2.2.2", "3.3.3.3", "4.4.4.4"]
    cols = ["2.2.2.2", "3.3.3.3", "1.1.1.1", "4.4.4.4", "1.1.1.1"]
    return AssocArray.from_triples(rows, cols, 1.0)
