import numpy as np
import pytest
import scipy.linalg as sla


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    den = max(np.linalg.norm(a), np.linalg.norm(b))
    return 0.0 if den == 0 else np.linalg.norm(a - b) / den


def subspace_angle(X, Y):
    return float(np.max(sla.subspace_angles(X, Y)))


def random_block_hessenberg(rng, j, s, complex_=True):
    H = crandn(rng, j * s, j * s) if complex_ else rng.standard_normal((j * s, j * s))
    for k in range(j):
        H[(k + 2) * s:, k * s:(k + 1) * s] = 0
    for k in range(1, j):
        H[k * s:(k + 1) * s, (k - 1) * s:k * s] += 3 * np.eye(s)
    return H


def random_nonnormal(rng, n, eigs, strength=0.1):
    """``X diag(eigs) X^{-1}`` with a mildly non-normal ``X``."""
    X = np.eye(n) + strength * rng.standard_normal((n, n)) / np.sqrt(n)
    return X @ np.diag(eigs) @ np.linalg.inv(X)


def random_stable(rng, n, shift=3.0, scale=0.5):
    """Nonsymmetric matrix with spectrum in the open left half plane."""
    return -shift * np.eye(n) + scale * rng.standard_normal((n, n)) / np.sqrt(n)
