import os

import numpy as np
import pytest

from fekete_lab.cache import solve_cached
from fekete_lab.fekete import OptimizerSettings
from fekete_lab.potential import ginibre

FAMILY_N = (10, 50, 100, 200)


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    # reuse a warm cache when one is configured, otherwise solve once per session
    env = os.environ.get("FEKETE_LAB_CACHE")
    return env if env else str(tmp_path_factory.mktemp("fekete_cache"))


@pytest.fixture(scope="session")
def family(cache_dir):
    g = ginibre()
    return {n: solve_cached(n, g, OptimizerSettings(), cache_dir)[0] for n in FAMILY_N}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
