"""Matrix-free operators implementing the contracts used by the Krylov
solvers.

Every operator provides

* ``matmat(X)`` returning ``A @ X`` for an ``(n, s)`` block,
* ``solve_shifted(sigma, X)`` returning ``(sigma I - A)^{-1} X``,
* ``adjoint()`` returning the operator for ``A^*``,
* ``eigdata()`` returning an :class:`EigData` (dense or structured).
"""
import warnings
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .errors import DiagonalizableRequired, ShiftedSolveFailed
from .linalg import as_cmat

KAPPA_MAX = 1e12


class EigData:
    """Eigendecomposition ``A = X diag(values) X^{-1}`` accessed through
    matrix-free applications of ``X`` and ``X^{-1}``.

    Parameters
    ----------
    values : (n,) array
    apply_X, apply_Xinv : callable
        Maps ``(n, s) -> (n, s)``.
    kappa : float
        Two-norm condition number of ``X``.
    """

    def __init__(self, values, apply_X, apply_Xinv, kappa=1.0):
        self.values = np.asarray(values, dtype=np.complex128)
        self.apply_X = apply_X
        self.apply_Xinv = apply_Xinv
        self.kappa = float(kappa)

    @classmethod
    def from_dense(cls, values, X, unitary=False):
        X = np.asarray(X, dtype=np.complex128)
        if unitary:
            Xh = X.conj().T
            return cls(values, lambda Y: X @ Y, lambda Y: Xh @ Y, 1.0)
        kappa = np.linalg.cond(X)
        if not np.isfinite(kappa) or kappa > KAPPA_MAX:
            raise DiagonalizableRequired(
                f"eigenvector matrix condition number {kappa:.2e} exceeds {KAPPA_MAX:.0e}")
        lu = sla.lu_factor(X)
        return cls(values, lambda Y: X @ Y, lambda Y: sla.lu_solve(lu, Y), kappa)

    def apply_function(self, f, Y):
        """``f(A) Y`` through the eigenbasis."""
        return self.apply_X(f(self.values)[:, None] * self.apply_Xinv(as_cmat(Y)))


class LinearOperator:
    """Base class; subclasses implement :meth:`matmat` and friends."""
    hermitian = False
    normal = False

    shape = (0, 0)

    def matmat(self, X):
        raise NotImplementedError

    def solve_shifted(self, sigma, X):
        raise NotImplementedError

    def adjoint(self):
        raise NotImplementedError

    def eigdata(self):
        raise NotImplementedError

    def __matmul__(self, X):
        return self.matmat(as_cmat(X))

    @property
    def n(self):
        return self.shape[0]

    def todense(self):
        return self.matmat(np.eye(self.n, dtype=np.complex128))

    def norm_fro(self):
        """Frobenius norm; structured subclasses override this."""
        return float(np.linalg.norm(self.todense()))

    def _check_shift(self, sigma):
        if not np.isfinite(sigma):
            raise ShiftedSolveFailed(sigma, "infinite shift")


class DenseOperator(LinearOperator):
    """Operator backed by a dense array; shifted LU factors are cached."""

    def __init__(self, A, hermitian=None, normal=False):
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        self.A = A.astype(np.complex128)
        self.shape = A.shape
        if hermitian is None:
            hermitian = bool(np.allclose(self.A, self.A.conj().T, rtol=0,
                                         atol=1e-14 * max(np.abs(self.A).max(), 1)))
        self.hermitian = hermitian
        self.normal = normal or hermitian
        self._lu = {}

    def matmat(self, X):
        return self.A @ X

    def solve_shifted(self, sigma, X):
        self._check_shift(sigma)
        key = complex(sigma)
        if key not in self._lu:
            M = key * np.eye(self.n) - self.A
            with warnings.catch_warnings():
                # singularity is detected below and reported as an error
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu = sla.lu_factor(M, check_finite=False)
            d = np.abs(np.diag(lu[0]))
            if d.min() <= 1e-14 * d.max():
                raise ShiftedSolveFailed(sigma, "shifted matrix is numerically singular")
            self._lu[key] = lu
        return sla.lu_solve(self._lu[key], X)

    def adjoint(self):
        return DenseOperator(self.A.conj().T, hermitian=self.hermitian, normal=self.normal)

    def transpose(self):
        return DenseOperator(self.A.T, hermitian=None, normal=self.normal)

    def todense(self):
        return self.A

    def eigdata(self):
        return self._eigdata

    @cached_property
    def _eigdata(self):
        if self.hermitian:
            w, X = np.linalg.eigh(self.A)
            return EigData.from_dense(w, X, unitary=True)
        w, X = np.linalg.eig(self.A)
        if self.normal:
            # orthonormalize within clusters of (numerically) equal eigenvalues
            X, _ = np.linalg.qr(X)
            return EigData.from_dense(w, X, unitary=True)
        return EigData.from_dense(w, X)


class DiagonalOperator(LinearOperator):
    """``A = diag(d)``; normal by construction."""
    normal = True

    def __init__(self, d):
        self.d = np.asarray(d, dtype=np.complex128).ravel()
        self.shape = (self.d.size, self.d.size)
        self.hermitian = bool(np.all(self.d.imag == 0))

    def matmat(self, X):
        return self.d[:, None] * X

    def solve_shifted(self, sigma, X):
        self._check_shift(sigma)
        den = sigma - self.d
        if np.min(np.abs(den)) <= 1e-14 * max(np.abs(self.d).max(), 1.0):
            raise ShiftedSolveFailed(sigma, "shift coincides with an eigenvalue")
        return X / den[:, None]

    def adjoint(self):
        return DiagonalOperator(self.d.conj())

    def transpose(self):
        return self

    def todense(self):
        return np.diag(self.d)

    def norm_fro(self):
        return float(np.linalg.norm(self.d))

    def eigdata(self):
        return EigData(self.d, lambda Y: Y, lambda Y: Y, 1.0)


class TridiagonalOperator(LinearOperator):
    """Tridiagonal operator with subdiagonal ``lower``, diagonal ``diag`` and
    superdiagonal ``upper``; shifted solves are banded LU solves.
    """

    def __init__(self, lower, diag, upper):
        self.diag = np.asarray(diag, dtype=np.complex128)
        n = self.diag.size
        self.lower = np.broadcast_to(np.asarray(lower, dtype=np.complex128), (n - 1,)).copy()
        self.upper = np.broadcast_to(np.asarray(upper, dtype=np.complex128), (n - 1,)).copy()
        self.shape = (n, n)
        self.hermitian = bool(np.all(self.diag.imag == 0)
                              and np.array_equal(self.lower, self.upper.conj()))
        self.normal = self.hermitian

    @classmethod
    def toeplitz(cls, n, lower, diag, upper, scale=1.0):
        return cls(scale * lower * np.ones(n - 1), scale * diag * np.ones(n),
                   scale * upper * np.ones(n - 1))

    def matmat(self, X):
        Y = self.diag[:, None] * X
        Y[1:] += self.lower[:, None] * X[:-1]
        Y[:-1] += self.upper[:, None] * X[1:]
        return Y

    def solve_shifted(self, sigma, X):
        self._check_shift(sigma)
        ab = np.zeros((3, self.n), dtype=np.complex128)
        ab[0, 1:] = -self.upper
        ab[1] = sigma - self.diag
        ab[2, :-1] = -self.lower
        try:
            return sla.solve_banded((1, 1), ab, X, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise ShiftedSolveFailed(sigma, str(exc)) from exc

    def adjoint(self):
        return TridiagonalOperator(self.upper.conj(), self.diag.conj(), self.lower.conj())

    def todense(self):
        return (np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1))

    def norm_fro(self):
        return float(np.sqrt(np.sum(np.abs(self.diag) ** 2) + np.sum(np.abs(self.lower) ** 2)
                             + np.sum(np.abs(self.upper) ** 2)))

    def eigdata(self):
        return self._eigdata

    @cached_property
    def _eigdata(self):
        if self.hermitian and np.all(self.lower.imag == 0):
            w, X = sla.eigh_tridiagonal(self.diag.real, self.lower.real)
            return EigData.from_dense(w, X, unitary=True)
        w, X = np.linalg.eig(self.todense())
        return EigData.from_dense(w, X)


class KroneckerSumOperator(LinearOperator):
    """``A = I (x) T + T (x) I + shift I`` for a real symmetric ``T``.

    Only ``T`` (``m x m``) is stored; vectors of length ``m**2`` are reshaped
    to ``m x m`` arrays so that ``A`` acts as ``X -> T X + X T + shift X``.
    Shifted solves and eigendata use the eigendecomposition of ``T``.
    """
    hermitian = True
    normal = True

    def __init__(self, T, shift=0.0):
        if isinstance(T, TridiagonalOperator):
            self._T = T
            T = T.todense()
        else:
            self._T = None
        T = np.asarray(T, dtype=float)
        self.T = T
        self.m = T.shape[0]
        self.shift = float(shift)
        self.shape = (self.m ** 2, self.m ** 2)

    @cached_property
    def _teig(self):
        return np.linalg.eigh(self.T)

    def _reshape(self, X):
        """``(m^2, s)`` block to a stack of ``s`` arrays of shape ``(m, m)``."""
        return X.T.reshape(X.shape[1], self.m, self.m)

    def _flatten(self, Y):
        return Y.reshape(Y.shape[0], self.n).T

    def matmat(self, X):
        Xr = self._reshape(X)
        return self._flatten(self.T @ Xr + Xr @ self.T.T + self.shift * Xr)

    def _to_eig(self, X):
        Q = self._teig[1]
        return Q.T @ self._reshape(X) @ Q

    def _from_eig(self, Y):
        Q = self._teig[1]
        return self._flatten(Q @ Y @ Q.T)

    @cached_property
    def _values2d(self):
        mu = self._teig[0]
        return mu[:, None] + mu[None, :] + self.shift

    def solve_shifted(self, sigma, X):
        self._check_shift(sigma)
        den = sigma - self._values2d
        if np.min(np.abs(den)) <= 1e-14 * np.abs(self._values2d).max():
            raise ShiftedSolveFailed(sigma, "shift coincides with an eigenvalue")
        return self._from_eig(self._to_eig(as_cmat(X)) / den)

    def adjoint(self):
        return self

    def transpose(self):
        return self

    def norm_fro(self):
        return float(np.linalg.norm(self._values2d))

    def eigdata(self):
        def apply_X(Y):
            return self._from_eig(self._reshape(Y))

        def apply_Xinv(Y):
            return self._flatten(self._to_eig(Y))

        return EigData(self._values2d.ravel(), apply_X, apply_Xinv, 1.0)


def as_operator(A, hermitian=None, normal=False):
    """Wrap a dense array; operators are returned unchanged."""
    if isinstance(A, LinearOperator):
        return A
    return DenseOperator(A, hermitian=hermitian, normal=normal)
