import os

import pytest

from positivity import SearchConfig

ROOT = os.path.dirname(os.path.abspath(__file__))
MAPS = os.path.join(ROOT, "maps")


@pytest.fixture
def fast_cfg():
    """Reduced restarts and probes; acceptance tolerances unchanged"""
    return SearchConfig(seed=0, restarts=12, max_iters=150, samples=40)


@pytest.fixture
def map_path():
    def _path(name):
        return os.path.join(MAPS, name)
    return _path
