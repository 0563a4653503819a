import numpy as np
import pytest

from relent import HermitianOp, pure_state


def random_density(rng, dims, rank=None):
    d = int(np.prod(dims))
    r = rank or d
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    m = g @ g.conj().T
    return HermitianOp(tuple(dims), m / m.trace().real)


def random_pure(rng, dims):
    d = int(np.prod(dims))
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_hermitian(rng, d, scale=1.0):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (g + g.conj().T) / 2.0


def random_psd(rng, d, rank=None):
    r = rank or d
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    return g @ g.conj().T


def bell_state():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return pure_state(v, (2, 2))


def isotropic_sigma1():
    phi = bell_state()
    return HermitianOp((2, 2), phi.mat / 2.0 + (np.eye(4) - phi.mat) / 6.0)


def isotropic_sigma2():
    phi = bell_state()
    m = phi.mat / 2.0
    m[1, 1] += 0.25
    m[2, 2] += 0.25
    return HermitianOp((2, 2), m)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
