"""Block characteristic polynomials and their eigen-triplets.

A matrix polynomial ``P`` is a block characteristic polynomial of the pair
``(N, W)`` (``N`` is ``js x js``, ``W`` is ``js x s``) when it has degree
``j`` and ``P(N) o W = 0``. For a controllable pair it is unique up to
right multiplication by an invertible matrix, and the monic one is denoted
``Lambda``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (DiagonalizableRequired, InfinitePoleUnsupported, SimpleEigsRequired,
                     SingularSubdiagonal, UncontrollablePair, ZIsRitzValue)
from .linalg import (HESSENBERG_TOL, apply_operator, as_cmat, blk,
                     block_hessenberg_reduce, block_unit, min_separation)
from .poles import is_infinite
from .polynomial import MatrixPolynomial

KAPPA_MAX = 1e12

SEP_TOL = 1e-10


def _check_gammas(H, s, tol=HESSENBERG_TOL):
    j = H.shape[0] // s
    scale = np.linalg.norm(H)
    for i in range(2, j + 1):
        smin = np.linalg.svd(blk(H, i, i - 1, s), compute_uv=False)[-1]
        if smin <= tol * scale:
            raise SingularSubdiagonal(i, smin)


def gamma_product(H, s):
    """``Gamma_j ... Gamma_2`` for a block upper Hessenberg ``H``."""
    j = H.shape[0] // s
    G = np.eye(s, dtype=np.complex128)
    for i in range(2, j + 1):
        G = blk(H, i, i - 1, s) @ G
    return G


def charpoly_hessenberg(H, M):
    """Monic block characteristic polynomial of ``H`` with respect to ``E_1 M``.

    Parameters
    ----------
    H : (js, js) array
        Block upper Hessenberg with invertible subdiagonal blocks.
    M : (s, s) array
        Invertible.

    Returns
    -------
    MatrixPolynomial
        ``M^{-1} P^{[j]}(z) Gamma_j ... Gamma_2 M`` where ``P^{[j]}`` comes
        from the three-term-like block recurrence on the blocks of ``H``.

    Raises
    ------
    SingularSubdiagonal
    """
    H = as_cmat(H)
    M = as_cmat(M)
    s = M.shape[0]
    if H.shape[0] % s or H.shape[0] != H.shape[1]:
        raise ValueError(f"H of shape {H.shape} is not made of {s}x{s} blocks")
    j = H.shape[0] // s
    _check_gammas(H, s)
    ginv = [np.eye(s)] + [np.linalg.inv(blk(H, i, i - 1, s)) for i in range(2, j + 1)]
    P = [MatrixPolynomial.identity(s)]
    for k in range(1, j + 1):
        Gk = ginv[k - 1]
        step = MatrixPolynomial([-Gk @ blk(H, k, k, s), Gk])
        Pk = P[k - 1] @ step
        for i in range(1, k):
            Pk = Pk - P[i - 1] @ (ginv[i - 1] @ blk(H, i, k, s))
        P.append(Pk)
    return _exact_monic((P[j] @ gamma_product(H, s)).conjugate_by(M))


def _exact_monic(P):
    """Replace a leading coefficient that is the identity up to rounding."""
    c = P.coeffs.copy()
    c[-1] = np.eye(P.s)
    return MatrixPolynomial(c)


def charpoly_of(N, W):
    """Monic block characteristic polynomial of a general controllable pair."""
    red = block_hessenberg_reduce(N, W)
    if red.singular_block is not None:
        raise UncontrollablePair(red.singular_block)
    return charpoly_hessenberg(red.H, red.M)


@dataclass(frozen=True)
class RationalCharData:
    """Output of :func:`charpoly_rational`.

    ``P`` annihilates ``H K^{-1}`` with respect to ``E_1`` and has leading
    coefficient ``leadingInv = (E_j^T K^{-1} E_1)^{-1}``.
    """
    P: MatrixPolynomial
    leadingInv: np.ndarray
    H: np.ndarray
    K: np.ndarray
    poles: tuple

    def monic(self, R=None):
        """Monic polynomial with respect to ``E_1 R`` (``R = I`` by default)."""
        P = self.P @ np.linalg.inv(self.leadingInv)
        return _exact_monic(P if R is None else P.conjugate_by(R))


def charpoly_rational(Hbar, Kbar, poles):
    """Block characteristic polynomial of ``H K^{-1}`` from a BRAD pencil.

    Parameters
    ----------
    Hbar, Kbar : ((j+1)s, js) arrays
        BRAD pencil (only the leading ``js x js`` parts are used).
    poles : sequence of length ``j``
        Poles ``sigma_1, ..., sigma_{j-1}`` must be finite; ``sigma_j`` is
        the closing pole at infinity.

    Returns
    -------
    RationalCharData

    Raises
    ------
    InfinitePoleUnsupported
        If one of the first ``j - 1`` poles is infinite.
    SingularSubdiagonal
    """
    poles = tuple(poles)
    j = len(poles)
    s = Hbar.shape[1] // j
    if Hbar.shape[1] != j * s:
        raise ValueError("number of poles does not match the pencil size")
    if any(is_infinite(p) for p in poles[:-1]):
        raise InfinitePoleUnsupported(
            "interior infinite poles are not supported; use the polynomial path")
    if not is_infinite(poles[-1]):
        raise ValueError("the last pole must be infinite")
    H = np.asarray(Hbar[:j * s], dtype=np.complex128)
    K = np.asarray(Kbar[:j * s], dtype=np.complex128)
    scale = np.linalg.norm(K)
    ginv = {}
    for i in range(1, j):
        G = blk(K, i + 1, i, s)
        smin = np.linalg.svd(G, compute_uv=False)[-1]
        if smin <= HESSENBERG_TOL * scale:
            raise SingularSubdiagonal(i + 1, smin)
        ginv[i + 1] = np.linalg.inv(G)

    def xi(i, k):
        return MatrixPolynomial([-blk(H, i, k, s), blk(K, i, k, s)])

    P = {1: xi(1, 1)}
    for k in range(2, j + 1):
        Pk = xi(1, k).scale_by_scalar_poly(poles[:k - 1])
        for i in range(1, k):
            term = P[i] @ MatrixPolynomial(ginv[i + 1] @ xi(i + 1, k).coeffs)
            Pk = Pk - term.scale_by_scalar_poly(poles[i:k - 1])
        P[k] = Pk
    Kinv_j1 = np.linalg.solve(K, block_unit(j, 1, s))[(j - 1) * s:]
    return RationalCharData(P=P[j], leadingInv=np.linalg.inv(Kinv_j1), H=H, K=K, poles=poles)


def block_clenshaw_apply(N, Wvec, A, B, monic=True):
    """Evaluate ``P(A) o B`` for the block characteristic polynomial of
    ``(N, Wvec)`` without forming its coefficients.

    The pair is first reduced to ``(H, E_1 M)`` by block Householder
    reflectors; the recurrence then needs ``j`` block applications of ``A``
    and one ``n x is`` by ``is x s`` product per step.

    Parameters
    ----------
    N : (js, js) array
    Wvec : (js, s) array
    A : array, operator or callable
    B : (n, s) array
    monic : bool
        Return the action of the monic polynomial; otherwise the one with
        leading coefficient ``M^{-1} Gamma_2^{-1} ... Gamma_j^{-1}``.

    Raises
    ------
    UncontrollablePair
    """
    red = block_hessenberg_reduce(N, Wvec)
    if red.singular_block is not None:
        raise UncontrollablePair(red.singular_block)
    H, M, s = red.H, red.M, red.s
    j = red.j
    B = as_cmat(B)
    n = B.shape[0]
    ginv = [np.eye(s)] + [np.linalg.inv(blk(H, i, i - 1, s)) for i in range(2, j + 1)]
    # stacked coefficient columns C_i = [Gamma_h^{-1} H_{h,i}]_{h <= i}
    GH = np.vstack([ginv[h] @ H[h * s:(h + 1) * s] for h in range(j)])
    Y = np.empty((n, (j + 1) * s), dtype=np.complex128)
    Y[:, :s] = np.linalg.solve(M.T, B.T).T
    for i in range(1, j + 1):
        Yprev = Y[:, (i - 1) * s:i * s]
        Y[:, i * s:(i + 1) * s] = (apply_operator(A, Yprev @ ginv[i - 1])
                                   - Y[:, :i * s] @ GH[:i * s, (i - 1) * s:i * s])
    out = Y[:, j * s:]
    if monic:
        out = out @ (gamma_product(H, s) @ M)
    return out


def lambda_inverse_keldysh(Aproj, gammas, R_B, z, K=None, phi=1.0):
    """Inverse of the monic block characteristic polynomial at ``z``.

    Evaluates ``R_B^{-1} N^{-1} E_j^* K^{-1} (zI - Aproj)^{-1} E_1 R_B / phi``
    with one ``js x js`` solve.

    Parameters
    ----------
    Aproj : (js, js) array
    gammas : list of (s, s) arrays or (s, s) array
        Either ``[Gamma_2, ..., Gamma_j]`` (then ``N = Gamma_j ... Gamma_2``)
        or the normalization ``N`` itself.
    R_B : (s, s) array
    z : complex
    K : (js, js) array, optional
        ``K`` block of a rational decomposition.
    phi : complex or callable
        Value of the pole polynomial at ``z`` (or the polynomial).

    Raises
    ------
    ZIsRitzValue
    """
    Aproj = as_cmat(Aproj)
    R_B = as_cmat(R_B)
    s = R_B.shape[0]
    m = Aproj.shape[0]
    j = m // s
    if isinstance(gammas, np.ndarray) and gammas.ndim == 2:
        Nn = gammas
    else:
        Nn = np.eye(s, dtype=np.complex128)
        for G in gammas:
            Nn = G @ Nn
    normA = max(np.linalg.norm(Aproj, 2), 1e-300)
    if np.min(np.abs(np.linalg.eigvals(Aproj) - z)) <= 1e-12 * normA:
        raise ZIsRitzValue(z)
    Y = np.linalg.solve(z * np.eye(m) - Aproj, block_unit(j, 1, s) @ R_B)
    left = Y[(j - 1) * s:] if K is None else np.linalg.solve(K, Y)[(j - 1) * s:]
    ph = phi(z) if callable(phi) else phi
    return np.linalg.solve(R_B, np.linalg.solve(Nn, left)) / ph


@dataclass(frozen=True)
class EigenTripletSet:
    """Eigenvalues ``thetas`` with right vectors ``V[:, i]`` and left vectors
    ``W[:, i]`` such that ``Lambda(z)^{-1} = sum_i v_i w_i^* / (z - theta_i)``.
    """
    thetas: np.ndarray
    V: np.ndarray
    W: np.ndarray
    scaled: bool = True

    def inverse(self, z):
        """Keldysh sum at ``z``."""
        return (self.V / (z - self.thetas)) @ self.W.conj().T

    def weighted(self, weights):
        """``sum_i weights_i v_i w_i^*`` for a vector of weights."""
        return (self.V * weights) @ self.W.conj().T


def eigen_triplets(Aproj, R_B, K=None, N=None, phi_roots=(), monic=True,
                   require_simple=True):
    """Eigen-triplets of the block characteristic polynomial of ``Aproj``.

    With ``Aproj = X diag(theta) X^{-1}`` and ``y_i^*`` the rows of ``X^{-1}``
    the vectors are

    ``v_i = R_B^{-1} N^{-1} E_j^* K^{-1} x_i / phi(theta_i)`` and
    ``w_i = R_B^* E_1^* y_i``,

    so that ``w_i^* Lambda'(theta_i) v_i = 1``. With ``monic=False`` the
    factor ``N^{-1}`` is dropped; this yields the triplets of the polynomial
    normalized so that its action on ``B`` equals the residual direction.

    Parameters
    ----------
    Aproj : (js, js) array
    R_B : (s, s) array
    K : (js, js) array, optional
        ``K`` block of a rational decomposition; identity if omitted.
    N : (s, s) array, optional
        Normalization of the last block (``Gamma_j ... Gamma_2`` in the
        polynomial case). Computed from ``Aproj`` when omitted.
    phi_roots : sequence
        Finite poles defining ``phi``.
    require_simple : bool
        Reject Ritz values closer than ``1e-10 ||Aproj||``. When False,
        clusters are accepted as long as the eigenvector matrix is well
        conditioned (the expansion remains valid for semisimple
        eigenvalues).

    Raises
    ------
    SimpleEigsRequired, DiagonalizableRequired
    """
    Aproj = as_cmat(Aproj)
    R_B = as_cmat(R_B)
    s = R_B.shape[0]
    m = Aproj.shape[0]
    j = m // s
    theta, X = np.linalg.eig(Aproj)
    sep = min_separation(theta)
    if sep <= SEP_TOL * np.linalg.norm(Aproj, 2):
        if require_simple:
            raise SimpleEigsRequired(f"Ritz values are not simple (gap {sep:.2e})")
        cond = np.linalg.cond(X)
        if not np.isfinite(cond) or cond > KAPPA_MAX:
            raise DiagonalizableRequired(f"clustered Ritz values with eigenvector "
                                         f"condition {cond:.2e}")
    Xinv = np.linalg.inv(X)
    Xl = X if K is None else np.linalg.solve(K, X)
    last = Xl[(j - 1) * s:]
    phi = np.ones(m, dtype=np.complex128)
    for r in phi_roots:
        phi = phi * (theta - r)
    V = np.linalg.solve(R_B, last) / phi
    if monic:
        if N is None:
            N = normalization(Aproj, s, K=K, m=len(phi_roots))
        V = np.linalg.solve(R_B, np.linalg.solve(N, R_B @ V))
    W = (Xinv[:, :s] @ R_B).conj().T
    return EigenTripletSet(thetas=theta, V=V, W=W)


def normalization(Aproj, s, K=None, m=0):
    """``N = E_j^* K^{-1} Aproj^{j-m-1} E_1`` where ``m = deg phi``."""
    j = Aproj.shape[0] // s
    Y = block_unit(j, 1, s)
    for _ in range(j - m - 1):
        Y = Aproj @ Y
    if K is not None:
        Y = np.linalg.solve(K, Y)
    return Y[(j - 1) * s:]
