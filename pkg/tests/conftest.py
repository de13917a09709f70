import numpy as np
import pytest

from graphact import default_config, make_rng


@pytest.fixture
def cfg():
    return default_config()


@pytest.fixture
def rng():
    return make_rng(12345)


def random_rotation(rng) -> np.ndarray:
    """Uniform-ish proper rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
