import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from glasspath.geometry import DepthImage
from glasspath.testing import fixture_scene


@pytest.fixture(scope="session")
def small_scene():
    return fixture_scene(size=32, seed=3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_heightfield(size: int, seed: int, base: float = 2.0, spread: float = 0.6) -> DepthImage:
    r = np.random.default_rng(seed)
    depth = base + r.uniform(-spread, spread, size=(size, size))
    rgb = r.uniform(0.0, 1.0, size=(size, size, 3))
    return DepthImage(rgb=rgb, depth=depth, hfov_deg=55.0)
