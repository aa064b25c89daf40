import numpy as np
import pytest

from bkmf.polynomial import MatrixPolynomial

from conftest import crandn


def test_evaluation_horner(rng):
    c = crandn(rng, 4, 2, 2)
    P = MatrixPolynomial(c)
    z = 0.3 - 1.2j
    np.testing.assert_allclose(P(z), sum(c[i] * z ** i for i in range(4)))
    assert P.degree == 3 and P.s == 2 and not P.is_monic


def test_identity_and_linear(rng):
    M = crandn(rng, 3, 3)
    L = MatrixPolynomial.linear(M)
    np.testing.assert_allclose(L(2.0), 2 * np.eye(3) - M)
    assert L.is_monic and MatrixPolynomial.identity(3).degree == 0


def test_derivative(rng):
    P = MatrixPolynomial(crandn(rng, 5, 2, 2))
    z, h = 0.7 + 0.1j, 1e-6
    fd = (P(z + h) - P(z - h)) / (2 * h)
    np.testing.assert_allclose(P.derivative()(z), fd, rtol=1e-7)


def test_product_evaluates_pointwise(rng):
    P, Q = MatrixPolynomial(crandn(rng, 3, 2, 2)), MatrixPolynomial(crandn(rng, 4, 2, 2))
    z = -0.4 + 0.9j
    np.testing.assert_allclose((P @ Q)(z), P(z) @ Q(z), rtol=1e-12)
    X = crandn(rng, 2, 2)
    np.testing.assert_allclose((P @ X)(z), P(z) @ X, rtol=1e-12)
    np.testing.assert_allclose((X @ P)(z), X @ P(z), rtol=1e-12)
    np.testing.assert_allclose((P - Q + P)(z), 2 * P(z) - Q(z), rtol=1e-12)


def test_scale_by_scalar_poly(rng):
    P = MatrixPolynomial(crandn(rng, 3, 2, 2))
    z = 1.1 + 0.2j
    np.testing.assert_allclose(P.scale_by_scalar_poly([1.0, -2.0])(z),
                               P(z) * (z - 1.0) * (z + 2.0), rtol=1e-12)


def test_companion_eigvals(rng):
    M = crandn(rng, 3, 3)
    ev = MatrixPolynomial.linear(M).companion_eigvals()
    np.testing.assert_allclose(np.sort_complex(ev), np.sort_complex(np.linalg.eigvals(M)),
                               atol=1e-12)


def test_conjugate_and_monic(rng):
    P = MatrixPolynomial(crandn(rng, 3, 2, 2))
    X = crandn(rng, 2, 2)
    z = 0.5j
    np.testing.assert_allclose(P.conjugate_by(X)(z), np.linalg.solve(X, P(z) @ X), rtol=1e-10)
    Pm = P.monic()
    np.testing.assert_allclose(Pm.leading, np.eye(2), atol=1e-12)


def test_invalid_coefficients():
    with pytest.raises(ValueError):
        MatrixPolynomial(np.zeros((2, 2, 3)))
