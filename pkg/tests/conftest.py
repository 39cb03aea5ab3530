import numpy as np
import pytest

from atompursuit import AtomSet


def random_symmetric_atoms(dim, n_base, seed, normalize=True):
    """Symmetric dictionary from n_base gaussian directions (2*n_base atoms)."""
    rng = np.random.default_rng(seed)
    base = rng.standard_normal((n_base, dim))
    if normalize:
        base /= np.linalg.norm(base, axis=1, keepdims=True)
    return AtomSet.symmetrize(base)


def random_spd_quadratic(dim, seed, cond=10.0):
    """Strongly convex quadratic with eigenvalues in [1, cond]."""
    from atompursuit import Quadratic

    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.linspace(1.0, cond, dim)
    h = (q * eigs) @ q.T
    lin = rng.standard_normal(dim)
    return Quadratic(h, lin)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
