"""Approximation of ``f(A)B`` from a Krylov decomposition, with exact error
formulas and a posteriori error bounds.

All quantities are derived from a :class:`ApproxState`, which bundles a
Krylov decomposition with an optional test basis and caches projected data.
Writing ``D = Pi U_{j+1} Gamma_{j+1} R_B`` (``Pi`` is the oblique projector,
absent in the Galerkin case) the residual of the shifted systems is

    Res(z) = Pi U_{j+1} Gamma_{j+1} E_j^* K^{-1} (zI - A_j)^{-1} E_1 R_B
           = phi(z) D Lhat(z)^{-1},

where ``Lhat`` is the block characteristic polynomial of ``A_j`` normalized
so that ``phi(A)^{-1} Lhat(A) o B = D``.
"""
from functools import cached_property

import numpy as np

from .charpoly import block_clenshaw_apply, eigen_triplets, gamma_product, normalization
from .errors import (DiagonalizableRequired, ShiftedSolveFailed, ThetaHitsSpectrum,
                     ZIsRitzValue)
from .krylov import projected_matrix
from .linalg import apply_operator, as_cmat, block_unit
from .operators import KAPPA_MAX, EigData, LinearOperator, as_operator
from .regions import as_points


def kappa_eig(A, hint=None):
    """Two-norm condition number of an eigenvector matrix of ``A``.

    Parameters
    ----------
    A : array or operator
    hint : {None, "normal", "hermitian"} or bool
        Declares ``A`` normal, in which case ``1`` is returned.

    Raises
    ------
    DiagonalizableRequired
    """
    if hint in ("normal", "hermitian", True):
        return 1.0
    if isinstance(A, LinearOperator):
        if A.normal or A.hermitian:
            return 1.0
        A = A.todense()
    _, X = np.linalg.eig(np.asarray(A))
    kappa = float(np.linalg.cond(X))
    if not np.isfinite(kappa) or kappa > KAPPA_MAX:
        raise DiagonalizableRequired(f"eigenvector condition number {kappa:.2e}")
    return kappa


class ApproxState:
    """Projected data of a Krylov decomposition used by all formulas.

    Parameters
    ----------
    decomp : BlockArnoldiDecomp or BRAD
    Z : (n, js) array, optional
        Test basis; Galerkin projection when omitted.
    A : array or operator, optional
        Needed only for ``kappa`` when it is not supplied.
    kappa : float, optional
        Eigenvector condition number of ``A`` used by the bounds.
    semisimple_ok : bool
        Accept clustered Ritz values in the eigen-triplets, provided the
        eigenvector matrix of the projected matrix is well conditioned.
    """

    def __init__(self, decomp, Z=None, A=None, kappa=None, semisimple_ok=False):
        self.semisimple_ok = semisimple_ok
        self.decomp = decomp
        self.Z = None if Z is None else as_cmat(Z)
        self.A = A
        self._kappa = kappa
        self._fj = {}

    @property
    def s(self):
        return self.decomp.s

    @property
    def j(self):
        return self.decomp.j

    @property
    def galerkin(self):
        return self.Z is None

    @property
    def R_B(self):
        return self.decomp.R_B

    @property
    def phi_roots(self):
        return self.decomp.phi_roots

    def phi(self, z):
        return self.decomp.phi(z)

    @cached_property
    def projection(self):
        return projected_matrix(self.decomp, self.Z)

    @property
    def Aproj(self):
        return self.projection.Aproj

    @cached_property
    def left(self):
        """``E_j^* K^{-1}`` as an ``s x js`` array."""
        Ej = block_unit(self.j, self.j, self.s)
        if not self.decomp.rational:
            return Ej.T.copy()
        return np.linalg.solve(self.decomp.K.T, Ej).T

    @cached_property
    def PiUGamma(self):
        """``Pi U_{j+1} Gamma_{j+1}`` (``n x s``)."""
        UG = self.decomp.U_next @ self.decomp.gamma_next
        if self.galerkin:
            return UG
        Uj = self.decomp.Uj
        ZU = self.Z.conj().T @ Uj
        return UG - Uj @ np.linalg.solve(ZU, self.Z.conj().T @ UG)

    @cached_property
    def direction(self):
        """``D = Pi U_{j+1} Gamma_{j+1} R_B``."""
        return self.PiUGamma @ self.R_B

    @cached_property
    def norm_PiUGamma(self):
        if self.galerkin:
            return float(np.linalg.norm(self.decomp.gamma_next))
        return float(np.linalg.norm(self.PiUGamma))

    @cached_property
    def norm_direction(self):
        if self.galerkin:
            return float(np.linalg.norm(self.decomp.gamma_next @ self.R_B))
        return float(np.linalg.norm(self.direction))

    @cached_property
    def N(self):
        """Ratio between the monic and residual normalizations."""
        if not self.decomp.rational:
            return gamma_product(self.decomp.H, self.s)
        m = len(self.phi_roots)
        if m == self.j - 1:
            return self.left[:, :self.s].copy()
        return normalization(self.Aproj, self.s, K=self.decomp.K, m=m)

    @cached_property
    def eig(self):
        """``(theta, X, X^{-1})`` for the projected matrix."""
        theta, X = np.linalg.eig(self.Aproj)
        cond = np.linalg.cond(X)
        if not np.isfinite(cond) or cond > KAPPA_MAX:
            raise DiagonalizableRequired(f"projected matrix eigenvector condition {cond:.2e}")
        return theta, X, np.linalg.inv(X)

    @property
    def ritz_values(self):
        return self.eig[0]

    @cached_property
    def triplets_hat(self):
        """Triplets of the residual-normalized polynomial."""
        K = self.decomp.K if self.decomp.rational else None
        return eigen_triplets(self.Aproj, self.R_B, K=K, phi_roots=self.phi_roots, monic=False,
                              require_simple=not self.semisimple_ok)

    @cached_property
    def triplets(self):
        """Triplets of the monic block characteristic polynomial."""
        K = self.decomp.K if self.decomp.rational else None
        return eigen_triplets(self.Aproj, self.R_B, K=K, N=self.N,
                              phi_roots=self.phi_roots, monic=True,
                              require_simple=not self.semisimple_ok)

    @cached_property
    def kappa(self):
        if self._kappa is not None:
            return float(self._kappa)
        if self.A is None:
            raise ValueError("kappa is unknown: pass kappa= or the operator A")
        if isinstance(self.A, LinearOperator) and not (self.A.normal or self.A.hermitian):
            try:
                return self.A.eigdata().kappa
            except NotImplementedError:
                pass
        return kappa_eig(self.A)

    def _resolvent_E1(self, z):
        m = self.Aproj.shape[0]
        theta = self.ritz_values
        scale = max(np.abs(theta).max(), 1.0)
        if np.min(np.abs(theta - z)) <= 1e-12 * scale:
            raise ZIsRitzValue(z)
        rhs = block_unit(self.j, 1, self.s) @ self.R_B
        return np.linalg.solve(z * np.eye(m) - self.Aproj, rhs)

    def lambda_inverse(self, z, times_phi=False):
        """``Lambda(z)^{-1}`` for the monic block characteristic polynomial.

        With ``times_phi`` the product ``phi(z) Lambda(z)^{-1}`` is returned,
        which stays finite at the poles.
        """
        y = self._resolvent_E1(z)
        out = np.linalg.solve(self.R_B, np.linalg.solve(self.N, self.left @ y))
        return out if times_phi else out / self.phi(z)

    def lambda_direction(self, A=None, B=None, method="formula"):
        """``phi(A)^{-1} Lambda(A) o B`` for the monic polynomial.

        ``method="formula"`` uses ``Pi U_{j+1} Gamma_{j+1} N R_B``;
        ``method="clenshaw"`` evaluates the polynomial on ``A`` and ``B``
        and applies ``phi(A)^{-1}`` by shifted solves.
        """
        if method == "formula":
            return self.PiUGamma @ self.N @ self.R_B
        if method != "clenshaw":
            raise ValueError(f"unknown method {method!r}")
        Wvec = block_unit(self.j, 1, self.s) @ self.R_B
        Y = block_clenshaw_apply(self.Aproj, Wvec, A, B, monic=True)
        op = as_operator(A)
        for r in self.phi_roots:
            Y = -op.solve_shifted(r, Y)
        return Y


def pg_shifted_solve(state, z):
    """``X_j(z) = U_j (zI - A_j)^{-1} E_1 R_B``."""
    return state.decomp.Uj @ state._resolvent_E1(z)


def residual_direct(A, B, X, z):
    """``B - (zI - A) X`` evaluated literally."""
    X = as_cmat(X)
    return as_cmat(B) - (z * X - apply_operator(A, X))


def residual_formula(state, z):
    """Residual of the shifted system from the projected data only."""
    y = state._resolvent_E1(z)
    return state.PiUGamma @ (state.left @ y)


def residual_charpoly_form(state, z):
    """``phi(z) [phi(A)^{-1} Lambda(A) o B] Lambda(z)^{-1}``."""
    return state.lambda_direction() @ state.lambda_inverse(z, times_phi=True)


def _function_of_projection(state, f):
    theta, X, Xinv = state.eig
    return X @ (f(theta)[:, None] * (Xinv[:, :state.s] @ state.R_B))


def matfun_approx(state, f):
    """``F_j = U_j f(A_j) E_1 R_B`` through the eigendecomposition of ``A_j``.

    Raises
    ------
    DiagonalizableRequired
    """
    key = id(f)
    if key not in state._fj:
        state._fj[key] = (f, state.decomp.Uj @ _function_of_projection(state, f))
    return state._fj[key][1]


def _eigdata(A):
    if isinstance(A, EigData):
        return A
    return as_operator(A).eigdata()


def error_formula_keldysh(state, f, A, method="eig"):
    """Exact error ``f(A)B - F_j`` from the eigen-triplets.

    ``sum_i [g(A) - g(theta_i) I] (A - theta_i I)^{-1} D v_i w_i^*`` with
    ``g = phi f`` and the residual-normalized triplets.

    Parameters
    ----------
    state : ApproxState
    f : ScalarFunction
    A : array, operator or EigData
    method : {"eig", "solve"}
        ``"eig"`` works entirely in the eigenbasis of ``A`` with divided
        differences; ``"solve"`` performs one shifted solve per Ritz value
        and uses the eigenbasis only to apply ``g(A)``.

    Raises
    ------
    ThetaHitsSpectrum, SimpleEigsRequired
    """
    T = state.triplets_hat
    g = f.times_poly(state.phi_roots)
    D = state.direction
    if method == "eig":
        ed = _eigdata(A)
        G = ed.apply_Xinv(D) @ T.V
        DD = g.divided_difference(ed.values[:, None], T.thetas[None, :])
        return ed.apply_X(G * DD) @ T.W.conj().T
    if method != "solve":
        raise ValueError(f"unknown method {method!r}")
    op = as_operator(A)
    DV = D @ T.V
    S = np.empty_like(DV)
    for i, th in enumerate(T.thetas):
        try:
            S[:, i] = -op.solve_shifted(th, DV[:, i:i + 1])[:, 0]
        except ShiftedSolveFailed as exc:
            raise ThetaHitsSpectrum(f"Ritz value {th} is an eigenvalue of A") from exc
    ed = op.eigdata()
    return (ed.apply_function(g, S) - S * g(T.thetas)) @ T.W.conj().T


def _spectral_factors(state):
    theta, X, Xinv = state.eig
    return theta, state.left @ X, Xinv[:, :state.s] @ state.R_B


def error_formula_spectral(state, f, A):
    """Exact error written in the eigenbasis ``{lambda_h, x_h, y_h}`` of ``A``.

    ``sum_h x_h y_h^* Pi U_{j+1} Gamma_{j+1} M(lambda_h)`` with
    ``M(lambda) = E_j^* K^{-1} [f(A_j) - f(lambda)] (A_j - lambda)^{-1} E_1 R_B``.
    """
    ed = _eigdata(A)
    theta, Lft, Rgt = _spectral_factors(state)
    G = ed.apply_Xinv(state.PiUGamma) @ Lft
    DD = f.divided_difference(ed.values[:, None], theta[None, :])
    return ed.apply_X((G * DD) @ Rgt)


def _max_spectral_norm(mats):
    if mats.shape[0] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(mats, ord=2, axis=(1, 2))))


def L_matrices(state, f, points):
    """``L(lambda) = sum_i dd_g(lambda, theta_i) v_i w_i^*`` for every point."""
    T = state.triplets_hat
    g = f.times_poly(state.phi_roots)
    DD = g.divided_difference(points[:, None], T.thetas[None, :])
    return np.einsum("ai,hi,bi->hab", T.V, DD, T.W.conj(), optimize=True)


def M_matrices(state, f, points):
    """``M(lambda) = E_j^* K^{-1} X diag(dd_f(lambda, theta)) X^{-1} E_1 R_B``."""
    theta, Lft, Rgt = _spectral_factors(state)
    DD = f.divided_difference(points[:, None], theta[None, :])
    return np.einsum("ak,hk,kb->hab", Lft, DD, Rgt, optimize=True)


def bound_L(state, f, region):
    """``kappa ||D||_F max_lambda ||L(lambda)||_2`` over the region samples."""
    pts = as_points(region)
    return state.kappa * state.norm_direction * _max_spectral_norm(L_matrices(state, f, pts))


def bound_M(state, f, region):
    """``kappa ||Pi U_{j+1} Gamma_{j+1}||_F max_lambda ||M(lambda)||_2``."""
    pts = as_points(region)
    return state.kappa * state.norm_PiUGamma * _max_spectral_norm(M_matrices(state, f, pts))


def direct_error(A, B, Fj, f):
    """``f(A)B - F_j`` using the eigendecomposition of ``A``."""
    return _eigdata(A).apply_function(f, as_cmat(B)) - Fj
