import numpy as np
import pytest

from my_modules.core.extremes import AngularSample
from my_modules.core.pca import random_frame
from my_modules.simulation.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(20240517)


@pytest.fixture
def frame(rng):
    return random_frame(rng, 5, 2)


def planar_sample(count=200, d=4, seed=3):
    """Exceedances whose angles all lie in span(e1, e2), spread over the positive quarter circle."""
    phi = np.random.default_rng(seed).uniform(0.0, np.pi / 2, size=count)
    angles = np.zeros((count, d))
    angles[:, 0] = np.cos(phi)
    angles[:, 1] = np.sin(phi)
    return AngularSample(threshold=1.0, k=count, angles=angles, radii=np.full(count, 2.0),
                         rows=np.arange(count))


@pytest.fixture
def planar():
    return planar_sample()
