import numpy as np
import pytest

from lagdisc.mesh import build_polar_mesh


_MESHES = {}


@pytest.fixture(scope="session")
def mesh_cache():
    """Session-wide mesh factory so refinement studies share construction."""

    def get(n_rings, n_sectors, grading=1.0):
        key = (n_rings, n_sectors, grading)
        if key not in _MESHES:
            _MESHES[key] = build_polar_mesh(*key)
        return _MESHES[key]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
