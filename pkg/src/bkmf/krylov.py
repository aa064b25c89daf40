"""Block polynomial and block rational Arnoldi decompositions.

Polynomial:  ``A U_j = U_{j+1} Hbar``.
Rational:    ``A U_{j+1} Kbar = U_{j+1} Hbar`` with pole ``i`` attached to
step ``i`` and the last pole at infinity.

Both decompositions use block classical Gram-Schmidt with one full
reorthogonalization pass, and stop with :class:`BreakdownOrDeflation`
whenever a new block loses rank.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionsViolated, BreakdownOrDeflation
from .linalg import (ZU_COND_MAX, apply_operator, as_cmat, blk, coupling_cond,
                     thin_block_qr)
from .poles import INF, finite_poles, is_infinite, normalize_poles


def _solver_for(A, solve_shifted):
    if solve_shifted is not None:
        return solve_shifted
    if hasattr(A, "solve_shifted"):
        return A.solve_shifted
    if isinstance(A, np.ndarray):
        from .operators import DenseOperator
        return DenseOperator(A).solve_shifted
    raise TypeError("a finite pole needs solve_shifted or an operator providing it")


def _cgs2(U, W):
    """Orthogonalize ``W`` against the columns of ``U`` twice.

    Returns ``(coeffs, W_orth, scale)`` where ``scale`` is ``||W||_F``
    before orthogonalization.
    """
    scale = np.linalg.norm(W)
    if U.shape[1] == 0:
        return np.zeros((0, W.shape[1]), dtype=np.complex128), W, scale
    Uh = U.conj().T
    h = Uh @ W
    W = W - U @ h
    h2 = Uh @ W
    W = W - U @ h2
    return h + h2, W, scale


@dataclass(frozen=True, eq=False)
class KrylovDecomposition:
    """Common container for the block Arnoldi data.

    Attributes
    ----------
    U : (n, (j+1)s) array
        Orthonormal block basis.
    Hbar, Kbar : ((j+1)s, js) arrays
        Block upper Hessenberg pencil. ``Kbar`` is ``[I; 0]`` in the
        polynomial case.
    poles : tuple
        ``j`` poles; ``inf`` throughout in the polynomial case.
    R_B : (s, s) array
        Upper triangular factor with ``B = U_1 R_B``.
    """
    U: np.ndarray
    Hbar: np.ndarray
    Kbar: np.ndarray
    poles: tuple
    R_B: np.ndarray
    s: int
    rational: bool = field(default=False)

    @property
    def j(self):
        return self.Hbar.shape[1] // self.s

    @property
    def n(self):
        return self.U.shape[0]

    @property
    def Uj(self):
        return self.U[:, :self.j * self.s]

    @property
    def U_next(self):
        return self.U[:, self.j * self.s:]

    @property
    def H(self):
        return self.Hbar[:self.j * self.s]

    @property
    def K(self):
        return self.Kbar[:self.j * self.s]

    @property
    def gamma_next(self):
        """``Gamma_{j+1}``, the trailing ``(j+1, j)`` block of ``Hbar``."""
        return blk(self.Hbar, self.j + 1, self.j, self.s)

    @property
    def phi_roots(self):
        """Finite poles among the first ``j - 1``; the zeros of ``phi``."""
        return finite_poles(self.poles[:-1])

    def phi(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.ones_like(z)
        for r in self.phi_roots:
            out = out * (z - r)
        return out

    def relation_residual(self, A):
        """``||A U Kbar - U Hbar||_F``."""
        AU = apply_operator(A, self.U @ self.Kbar)
        return float(np.linalg.norm(AU - self.U @ self.Hbar))

    def truncate(self, j):
        """Leading decomposition with ``j`` steps (polynomial case only)."""
        if self.rational:
            raise ValueError("rational decompositions are not nested; "
                             "use RationalArnoldiBuilder.decomposition(j)")
        if not 1 <= j <= self.j:
            raise ValueError(f"j must lie in [1, {self.j}], got {j}")
        s = self.s
        return BlockArnoldiDecomp(U=self.U[:, :(j + 1) * s], Hbar=self.Hbar[:(j + 1) * s, :j * s],
                                  Kbar=self.Kbar[:(j + 1) * s, :j * s], poles=self.poles[:j],
                                  R_B=self.R_B, s=s)


class BlockArnoldiDecomp(KrylovDecomposition):
    """Polynomial block Arnoldi decomposition ``A U_j = U_{j+1} Hbar``."""

    def gammas(self):
        """Subdiagonal blocks ``Gamma_2, ..., Gamma_{j+1}``."""
        return [blk(self.Hbar, i, i - 1, self.s) for i in range(2, self.j + 2)]


class BRAD(KrylovDecomposition):
    """Block rational Arnoldi decomposition ``A U Kbar = U Hbar``."""


def block_arnoldi(A, B, j, invariant_ok=False):
    """Run ``j`` steps of block Arnoldi on ``(A, B)``.

    Parameters
    ----------
    A : array, operator or callable
    B : (n, s) array
    j : int
        Number of steps; the basis has ``j + 1`` blocks.
    invariant_ok : bool
        Accept an exactly invariant subspace at the last step (new block
        numerically zero) and return ``Gamma_{j+1} = 0``. Used when
        ``j s = n``.

    Returns
    -------
    BlockArnoldiDecomp

    Raises
    ------
    BreakdownOrDeflation
        If a new block (or ``B`` itself) has numerical rank below ``s``.
    """
    B = as_cmat(B)
    n, s = B.shape
    if j < 1:
        raise ValueError("j must be positive")
    if j * s > n or ((j + 1) * s > n and not invariant_ok):
        raise ValueError(f"{j + 1} blocks of width {s} do not fit in dimension {n}")
    U = np.zeros((n, (j + 1) * s), dtype=np.complex128)
    Hbar = np.zeros(((j + 1) * s, j * s), dtype=np.complex128)
    Q, R_B, rank = thin_block_qr(B)
    if rank < s:
        raise BreakdownOrDeflation(1, rank, s)
    U[:, :s] = Q
    for k in range(1, j + 1):
        W = apply_operator(A, U[:, (k - 1) * s:k * s])
        h, W, scale = _cgs2(U[:, :k * s], W)
        Hbar[:k * s, (k - 1) * s:k * s] = h
        if k == j and invariant_ok and np.linalg.norm(W) <= 1e-12 * max(scale, 1e-300):
            break
        Q, R, rank = thin_block_qr(W, scale=scale)
        if rank < s:
            raise BreakdownOrDeflation(k + 1, rank, s)
        U[:, k * s:(k + 1) * s] = Q
        Hbar[k * s:(k + 1) * s, (k - 1) * s:k * s] = R
    Kbar = np.vstack([np.eye(j * s), np.zeros((s, j * s))]).astype(np.complex128)
    return BlockArnoldiDecomp(U=U, Hbar=Hbar, Kbar=Kbar, poles=(INF,) * j, R_B=R_B, s=s)


class RationalArnoldiBuilder:
    """Incremental block rational Arnoldi process.

    The basis generated by the leading poles is shared; a decomposition
    with ``j`` poles is obtained by closing the first ``j - 1`` steps with a
    pole at infinity. Because the closing step is not part of the
    decomposition with ``j + 1`` poles, rational decompositions are not
    nested; this builder avoids recomputing the shared basis.

    Parameters
    ----------
    A : array or operator
    B : (n, s) array
    poles : sequence
        Poles for steps ``1, 2, ...`` (excluding the closing infinity).
    solve_shifted : callable, optional
        ``solve_shifted(sigma, X)`` returning ``(sigma I - A)^{-1} X``.
    """

    def __init__(self, A, B, poles, solve_shifted=None):
        B = as_cmat(B)
        self.A = A
        self.n, self.s = B.shape
        self.poles = normalize_poles(poles)
        self._solve = solve_shifted if solve_shifted is not None else None
        if any(not is_infinite(p) for p in self.poles):
            self._solve = _solver_for(A, solve_shifted)
        Q, self.R_B, rank = thin_block_qr(B)
        if rank < self.s:
            raise BreakdownOrDeflation(1, rank, self.s)
        self._blocks = [Q]
        self._hcols = []
        self._kcols = []

    @property
    def steps(self):
        return len(self._hcols)

    def _step(self, k, pole, Ucur):
        """Step ``k`` with pole ``pole`` from basis ``Ucur``; returns new block
        and the ``H``, ``K`` columns (length ``(k+1) s``)."""
        s = self.s
        Uk = Ucur[:, (k - 1) * s:k * s]
        if is_infinite(pole):
            W = apply_operator(self.A, Uk)
        else:
            W = self._solve(pole, Uk)
        h, W, scale = _cgs2(Ucur, W)
        Q, R, rank = thin_block_qr(W, scale=scale)
        if rank < s:
            raise BreakdownOrDeflation(k + 1, rank, s)
        c = np.vstack([h, R])
        Ek = np.zeros(((k + 1) * s, s), dtype=np.complex128)
        Ek[(k - 1) * s:k * s] = np.eye(s)
        if is_infinite(pole):
            return Q, c, Ek
        return Q, pole * c - Ek, c

    def extend(self, steps):
        """Make sure the first ``steps`` poles have been processed."""
        if steps > len(self.poles):
            raise ValueError(f"only {len(self.poles)} poles available, {steps} requested")
        while self.steps < steps:
            k = self.steps + 1
            if (k + 1) * self.s > self.n:
                raise ValueError("basis would exceed the ambient dimension")
            Ucur = np.hstack(self._blocks)
            Q, hc, kc = self._step(k, self.poles[k - 1], Ucur)
            self._blocks.append(Q)
            self._hcols.append(hc)
            self._kcols.append(kc)

    def basis(self, j):
        """Orthonormal basis of the first ``j`` blocks (``n x js``)."""
        self.extend(j - 1)
        return np.hstack(self._blocks[:j])

    def decomposition(self, j):
        """BRAD with poles ``poles[:j-1] + [inf]``."""
        if j < 1:
            raise ValueError("j must be positive")
        s = self.s
        if (j + 1) * s > self.n:
            raise ValueError(f"{j + 1} blocks of width {s} do not fit in dimension {self.n}")
        self.extend(j - 1)
        Ucur = np.hstack(self._blocks[:j])
        Q, hc, kc = self._step(j, INF, Ucur)
        Hbar = np.zeros(((j + 1) * s, j * s), dtype=np.complex128)
        Kbar = np.zeros_like(Hbar)
        for k in range(1, j):
            Hbar[:(k + 1) * s, (k - 1) * s:k * s] = self._hcols[k - 1]
            Kbar[:(k + 1) * s, (k - 1) * s:k * s] = self._kcols[k - 1]
        Hbar[:, (j - 1) * s:] = hc
        Kbar[:, (j - 1) * s:] = kc
        U = np.hstack([Ucur, Q])
        return BRAD(U=U, Hbar=Hbar, Kbar=Kbar, poles=tuple(self.poles[:j - 1]) + (INF,),
                    R_B=self.R_B, s=s, rational=True)


def rational_block_arnoldi(A, B, poles, solve_shifted=None):
    """Block rational Arnoldi decomposition with the given poles.

    Parameters
    ----------
    A : array or operator
    B : (n, s) array
    poles : sequence
        ``j`` poles, the last of which must be infinite.
    solve_shifted : callable, optional

    Returns
    -------
    BRAD

    Raises
    ------
    BreakdownOrDeflation, ShiftedSolveFailed
    """
    poles = normalize_poles(poles)
    if not poles:
        raise ValueError("at least one pole is required")
    if not is_infinite(poles[-1]):
        raise ValueError("the last pole must be infinite; reorder the poles first")
    builder = RationalArnoldiBuilder(A, B, poles[:-1], solve_shifted=solve_shifted)
    return builder.decomposition(len(poles))


@dataclass(frozen=True, eq=False)
class ProjectedPair:
    """Projected matrix ``A_j = (Z^* U_j)^{-1} Z^* A U_j`` and helpers."""
    Aproj: np.ndarray
    Htilde: np.ndarray
    ZstarU_cond: float
    galerkin: bool


def projected_matrix(decomp, Z=None):
    """Projected matrix from the decomposition data, without applying ``A``.

    In the Galerkin case this is ``H`` (polynomial) or ``H K^{-1}``
    (rational). With a test basis ``Z`` the last block column of ``H``
    receives the correction ``(Z^*U_j)^{-1} Z^* U_{j+1} Gamma_{j+1}``.

    Raises
    ------
    AssumptionsViolated
        If ``Z^* U_j`` is numerically singular.
    """
    s, j = decomp.s, decomp.j
    H = decomp.H.copy()
    cond = 1.0
    if Z is not None:
        Z = as_cmat(Z)
        if Z.shape != decomp.Uj.shape:
            raise ValueError(f"test basis has shape {Z.shape}, expected {decomp.Uj.shape}")
        ZU, cond = coupling_cond(Z, decomp.Uj)
        if not np.isfinite(cond) or cond > ZU_COND_MAX:
            raise AssumptionsViolated(f"Z^*U_j is singular to working precision (cond {cond:.2e})")
        corr = np.linalg.solve(ZU, Z.conj().T @ decomp.U_next) @ decomp.gamma_next
        H[:, (j - 1) * s:] += corr
    if decomp.rational:
        Aproj = np.linalg.solve(decomp.K.T, H.T).T
    else:
        Aproj = H
    return ProjectedPair(Aproj=Aproj, Htilde=H, ZstarU_cond=cond, galerkin=Z is None)


def dual_basis(A_star, C, poles_or_j, solve_shifted=None):
    """Orthonormal basis of a block Krylov space of ``A_star`` and ``C``.

    Parameters
    ----------
    A_star : array or operator
        Typically ``A^*`` (or ``A^T``, as an experiment may require).
    C : (n, s) array
    poles_or_j : int or sequence
        An integer ``j`` requests the polynomial space with ``j`` blocks; a
        pole sequence of length ``j`` requests the rational space whose
        first ``j - 1`` poles are used.

    Returns
    -------
    (n, js) array with orthonormal columns
    """
    C = as_cmat(C)
    if np.isscalar(poles_or_j) and not isinstance(poles_or_j, complex):
        j = int(poles_or_j)
        poles = [INF] * (j - 1)
    else:
        poles = normalize_poles(poles_or_j)
        j = len(poles)
        poles = poles[:-1]
    builder = RationalArnoldiBuilder(A_star, C, poles, solve_shifted=solve_shifted)
    return builder.basis(j)
