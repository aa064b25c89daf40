"""Matrix polynomials with square coefficient blocks in the monomial basis."""
import numpy as np
import scipy.linalg as sla

from .linalg import circ_apply


class MatrixPolynomial:
    """Matrix polynomial ``P(z) = sum_i z^i P_i`` with ``s x s`` coefficients.

    Parameters
    ----------
    coeffs : array_like, shape (k+1, s, s)
        Coefficients ordered by increasing degree.

    Examples
    --------
    >>> import numpy as np
    >>> P = MatrixPolynomial([-np.eye(2), np.eye(2)])   # z I - I
    >>> P.degree, P.is_monic
    (1, True)
    """

    # let ``ndarray @ MatrixPolynomial`` reach __rmatmul__
    __array_ufunc__ = None

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128)
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] == 0:
            raise ValueError(f"coefficients must have shape (k+1, s, s), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        self.coeffs = c
        self.coeffs.setflags(write=False)

    @classmethod
    def identity(cls, s):
        return cls(np.eye(s)[None])

    @classmethod
    def linear(cls, M):
        """``z I - M``."""
        M = np.asarray(M)
        return cls([-M, np.eye(M.shape[0])])

    @property
    def s(self):
        return self.coeffs.shape[1]

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    @property
    def is_monic(self):
        return bool(np.array_equal(self.leading, np.eye(self.s)))

    def __repr__(self):
        return f"MatrixPolynomial(degree={self.degree}, s={self.s})"

    def __call__(self, z):
        """Evaluate at a scalar by Horner's rule."""
        out = self.coeffs[-1].copy()
        for Pi in self.coeffs[-2::-1]:
            out = z * out + Pi
        return out

    def derivative(self):
        if self.degree == 0:
            return MatrixPolynomial(np.zeros_like(self.coeffs))
        k = np.arange(1, self.degree + 1)[:, None, None]
        return MatrixPolynomial(k * self.coeffs[1:])

    def circ(self, A, B):
        """``P(A) o B``; see :func:`bkmf.linalg.circ_apply`."""
        return circ_apply(self, A, B)

    def _binary(self, other, sign):
        other = other if isinstance(other, MatrixPolynomial) else MatrixPolynomial(other)
        d = max(self.degree, other.degree) + 1
        out = np.zeros((d, self.s, self.s), dtype=np.complex128)
        out[:self.degree + 1] += self.coeffs
        out[:other.degree + 1] += sign * other.coeffs
        return MatrixPolynomial(out)

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __matmul__(self, other):
        """Product of polynomials, or right multiplication by a constant block."""
        if not isinstance(other, MatrixPolynomial):
            return MatrixPolynomial(self.coeffs @ np.asarray(other))
        out = np.zeros((self.degree + other.degree + 1, self.s, self.s),
                       dtype=np.complex128)
        for a, Pa in enumerate(self.coeffs):
            for b, Qb in enumerate(other.coeffs):
                out[a + b] += Pa @ Qb
        return MatrixPolynomial(out)

    def __rmatmul__(self, other):
        return MatrixPolynomial(np.asarray(other) @ self.coeffs)

    def scale_by_scalar_poly(self, roots):
        """Multiply by the scalar polynomial ``prod (z - r)``."""
        c = self.coeffs
        for r in roots:
            new = np.zeros((c.shape[0] + 1,) + c.shape[1:], dtype=np.complex128)
            new[1:] += c
            new[:-1] -= r * c
            c = new
        return MatrixPolynomial(c)

    def conjugate_by(self, X):
        """``X^{-1} P(z) X`` coefficient-wise."""
        X = np.asarray(X)
        return MatrixPolynomial(np.linalg.solve(X, self.coeffs @ X))

    def monic(self):
        """Right-normalize to identity leading coefficient."""
        return self @ np.linalg.inv(self.leading)

    def companion_eigvals(self):
        """Finite eigenvalues from the block companion pencil."""
        k, s = self.degree, self.s
        if k == 0:
            return np.empty(0, dtype=np.complex128)
        m = k * s
        A = np.zeros((m, m), dtype=np.complex128)
        Bm = np.eye(m, dtype=np.complex128)
        A[:-s, s:] = np.eye(m - s)
        for i in range(k):
            A[-s:, i * s:(i + 1) * s] = -self.coeffs[i]
        Bm[-s:, -s:] = self.leading
        w = sla.eigvals(A, Bm)
        return w[np.isfinite(w)]

    def allclose(self, other, rtol=1e-10):
        d = max(self.degree, other.degree) + 1
        a = np.zeros((d, self.s, self.s), dtype=np.complex128)
        b = a.copy()
        a[:self.degree + 1] = self.coeffs
        b[:other.degree + 1] = other.coeffs
        scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
        return bool(np.abs(a - b).max() <= rtol * scale)
