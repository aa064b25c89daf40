"""Dense complex kernels shared by the other modules.

Block vectors are plain ``(n, s)`` complex arrays; block matrices are
``(j*s, j*s)`` arrays addressed through :func:`blk`.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import AssumptionsViolated

DEFLATION_TOL = 1e-12
HESSENBERG_TOL = 1e-12
ZU_COND_MAX = 1e12


def as_cmat(X):
    """Return ``X`` as a 2-D complex128 array (vectors become columns)."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {X.shape}")
    return X


def blk(M, i, k, s):
    """View of the ``(i, k)`` block (1-based, ``s x s``) of ``M``."""
    return M[(i - 1) * s:i * s, (k - 1) * s:k * s]


def block_unit(j, i, s):
    """The block vector ``E_i = e_i (x) I_s`` of shape ``(j*s, s)``."""
    E = np.zeros((j * s, s), dtype=np.complex128)
    E[(i - 1) * s:i * s] = np.eye(s)
    return E


def apply_operator(A, X):
    """Apply ``A`` to the block vector ``X``.

    ``A`` may be a dense array, an object exposing ``matmat`` or a callable.
    """
    if isinstance(A, np.ndarray):
        return A @ X
    if hasattr(A, "matmat"):
        return A.matmat(X)
    if callable(A):
        return A(X)
    raise TypeError(f"cannot apply object of type {type(A).__name__}")


def thin_block_qr(V, scale=None, tol=DEFLATION_TOL):
    """Thin QR factorization of a block vector with a rank estimate.

    Parameters
    ----------
    V : (n, s) array
    scale : float, optional
        Reference norm for the deflation test. Defaults to ``||V||_F``; the
        Arnoldi processes pass the norm of the block *before*
        orthogonalization so that a block lying in the current space is
        recognized as rank deficient.
    tol : float
        Relative deflation tolerance.

    Returns
    -------
    Q : (n, s) array with orthonormal columns
    R : (s, s) upper triangular with real nonnegative diagonal, ``Q R = V``
    rank : int
        Numerical column rank from a column-pivoted factorization. A value
        below ``s`` signals deflation; the caller decides what to do.
    """
    V = as_cmat(V)
    n, s = V.shape
    if n < s:
        raise ValueError(f"block vector has fewer rows ({n}) than columns ({s})")
    if scale is None:
        scale = np.linalg.norm(V)
    _, Rp, _ = sla.qr(V, mode="economic", pivoting=True)
    diag = np.abs(np.diag(Rp))
    rank = int(np.sum(diag > tol * scale)) if scale > 0 else 0

    Q, R = np.linalg.qr(V)
    d = np.diag(R)
    phase = np.ones(s, dtype=np.complex128)
    nz = np.abs(d) > 0
    phase[nz] = d[nz] / np.abs(d[nz])
    Q = Q * phase
    R = phase.conj()[:, None] * R
    return Q, R, rank


def circ_apply(P, A, B):
    """Evaluate ``P(A) o B = sum_i A^i B P_i`` by Horner's rule.

    ``P`` is a :class:`~bkmf.polynomial.MatrixPolynomial` or an array of
    coefficients of shape ``(k+1, s, s)``.
    """
    coeffs = getattr(P, "coeffs", P)
    coeffs = np.asarray(coeffs)
    B = as_cmat(B)
    if coeffs.ndim != 3 or coeffs.shape[1:] != (B.shape[1], B.shape[1]):
        raise ValueError(
            f"polynomial with {coeffs.shape[1:]} coefficients cannot act on "
            f"a block vector of width {B.shape[1]}")
    if isinstance(A, np.ndarray) and A.shape != (B.shape[0], B.shape[0]):
        raise ValueError(f"A has shape {A.shape}, B has {B.shape[0]} rows")
    Y = B @ coeffs[-1]
    for Pi in coeffs[-2::-1]:
        Y = apply_operator(A, Y) + B @ Pi
    return Y


def _householder(x):
    """Householder vector ``v`` and ``beta`` with ``(I - beta v v^*) x = alpha e_1``."""
    normx = np.linalg.norm(x)
    v = x.astype(np.complex128, copy=True)
    if normx == 0.0:
        return v, 0.0
    x0 = x[0]
    phase = x0 / abs(x0) if x0 != 0 else 1.0
    v[0] += phase * normx
    return v, 2.0 / np.real(np.vdot(v, v))


@dataclass(frozen=True)
class HessenbergReduction:
    """Result of :func:`block_hessenberg_reduce`.

    ``Q^* N Q = H`` and ``Q^* W = E_1 M``. ``singular_block`` is the 1-based
    index of the first numerically singular subdiagonal block ``Gamma_i``
    (``1`` refers to ``M`` itself) or ``None`` for a controllable pair.
    """
    Q: np.ndarray
    H: np.ndarray
    M: np.ndarray
    s: int
    singular_block: object = None

    @property
    def j(self):
        return self.H.shape[0] // self.s

    def gamma(self, i):
        return blk(self.H, i, i - 1, self.s)


def block_hessenberg_reduce(N, W, tol=HESSENBERG_TOL):
    """Unitary reduction of ``(N, W)`` to block upper Hessenberg form.

    Block Householder reflectors, applied one column at a time, produce
    ``Q`` with ``Q^* N Q = H`` block upper Hessenberg (``s x s`` blocks) and
    ``Q^* W = E_1 M`` with ``M`` upper triangular.
    """
    N = as_cmat(N).copy()
    W = as_cmat(W).copy()
    m, s = W.shape
    if N.shape != (m, m) or m % s:
        raise ValueError(f"incompatible shapes N {N.shape}, W {W.shape}")
    j = m // s
    normN = np.linalg.norm(N)
    Q = np.eye(m, dtype=np.complex128)

    def reflect(v, beta, r0):
        if beta == 0.0:
            return
        N[r0:, :] -= beta * np.outer(v, v.conj() @ N[r0:, :])
        N[:, r0:] -= beta * np.outer(N[:, r0:] @ v, v.conj())
        Q[:, r0:] -= beta * np.outer(Q[:, r0:] @ v, v.conj())

    for c in range(s):
        v, beta = _householder(W[c:, c])
        if beta:
            W[c:, :] -= beta * np.outer(v, v.conj() @ W[c:, :])
        reflect(v, beta, c)
    for k in range(j - 2):
        for c in range(s):
            col = k * s + c
            r0 = (k + 1) * s + c
            v, beta = _householder(N[r0:, col])
            reflect(v, beta, r0)

    H = N
    for k in range(j):
        H[(k + 2) * s:, k * s:(k + 1) * s] = 0.0
    M = np.triu(W[:s])

    singular = None
    if np.linalg.svd(M, compute_uv=False)[-1] <= tol * max(np.linalg.norm(W), 1e-300):
        singular = 1
    else:
        for i in range(2, j + 1):
            smin = np.linalg.svd(blk(H, i, i - 1, s), compute_uv=False)[-1]
            if smin <= tol * normN:
                singular = i
                break
    return HessenbergReduction(Q=Q, H=H, M=M, s=s, singular_block=singular)


def is_block_hessenberg(H, s, tol=0.0):
    j = H.shape[0] // s
    return all(np.all(np.abs(H[(k + 2) * s:, k * s:(k + 1) * s]) <= tol)
               for k in range(j))


def coupling_cond(Z, U):
    """Return ``(Z^* U, ||Z|| ||U|| / sigma_min(Z^* U))``.

    Scaling by the norms of the factors makes a coupling matrix made of
    pure rounding noise register as singular.
    """
    ZU = Z.conj().T @ U
    sv = np.linalg.svd(ZU, compute_uv=False)
    scale = np.linalg.norm(Z, 2) * np.linalg.norm(U, 2)
    cond = scale / sv[-1] if sv[-1] > 0 else np.inf
    return ZU, float(cond)


def oblique_project(U, Z, X, cond_max=ZU_COND_MAX):
    """Apply ``I - U (Z^* U)^{-1} Z^*`` to ``X`` without forming it."""
    U, Z, X = as_cmat(U), as_cmat(Z), as_cmat(X)
    ZU, cond = coupling_cond(Z, U)
    if not np.isfinite(cond) or cond > cond_max:
        raise AssumptionsViolated(f"Z^*U is singular to working precision (cond {cond:.2e})")
    return X - U @ np.linalg.solve(ZU, Z.conj().T @ X)


def eig_with_left(M):
    """Eigenvalues ``theta``, right eigenvectors ``X`` and ``Y = X^{-*}``.

    Rows of ``Y^*`` are left eigenvectors scaled so that ``Y^* X = I``.
    """
    theta, X = np.linalg.eig(M)
    Xinv = np.linalg.inv(X)
    return theta, X, Xinv.conj().T


def min_separation(values):
    values = np.asarray(values)
    if values.size < 2:
        return np.inf
    d = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())
