"""Moment matching for MIMO transfer functions ``G(z) = C^* (zI - A)^{-1} B``.

The reduced model uses a trial space ``RK_j(A, B, Sigma)`` and a test space
``RK_j(A^*, C, Psi)``. The output-side quantities are evaluated at
``conj(z)``, so that the reduced transfer function interpolates ``G`` at
the finite poles in ``Sigma`` and at the conjugates of those in ``Psi``.
"""
from dataclasses import dataclass

import numpy as np

from .approx import ApproxState, pg_shifted_solve
from .errors import ShiftedSolveFailed, ZIsEigenvalue
from .krylov import rational_block_arnoldi
from .linalg import as_cmat
from .operators import as_operator
from .poles import normalize_poles


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """State-space data ``x' = A x + B u``, ``y = C^* x``."""
    A: object
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", as_operator(self.A))
        object.__setattr__(self, "B", as_cmat(self.B))
        object.__setattr__(self, "C", as_cmat(self.C))
        n = self.A.shape[0]
        if self.B.shape[0] != n or self.C.shape != self.B.shape:
            raise ValueError(f"inconsistent shapes A {self.A.shape}, B {self.B.shape}, "
                             f"C {self.C.shape}")


def _resolve(A, z, X):
    try:
        return A.solve_shifted(z, X)
    except ShiftedSolveFailed as exc:
        raise ZIsEigenvalue(z) from exc


def transfer_exact(sys, z):
    """``G(z) = C^* (zI - A)^{-1} B``.

    Raises
    ------
    ZIsEigenvalue
    """
    return sys.C.conj().T @ _resolve(sys.A, z, sys.B)


class MomentMatchState:
    """Two-sided rational Krylov projection of an :class:`LtiSystem`.

    Parameters
    ----------
    sys : LtiSystem
    sigma : sequence
        Input-side poles (last one infinite).
    psi : sequence
        Output-side poles (last one infinite), same length as ``sigma``.
    """

    def __init__(self, sys, sigma, psi):
        self.sys = sys
        self.sigma = normalize_poles(sigma)
        self.psi = normalize_poles(psi)
        if len(self.sigma) != len(self.psi):
            raise ValueError("both sides need the same number of poles")
        A = sys.A
        Astar = A.adjoint()
        self.brad_B = rational_block_arnoldi(A, sys.B, self.sigma)
        self.brad_C = rational_block_arnoldi(Astar, sys.C, self.psi)
        self.input = ApproxState(self.brad_B, Z=self.brad_C.Uj)
        self.output = ApproxState(self.brad_C, Z=self.brad_B.Uj)

    @property
    def j(self):
        return self.brad_B.j

    def tau(self, z):
        """``phi_Sigma(z) conj(phi_Psi(conj(z)))``."""
        return self.brad_B.phi(z) * np.conj(self.brad_C.phi(np.conj(z)))


def transfer_reduced(mm, z, return_diagnostic=False):
    """Reduced transfer function ``C^* X_B(z)``.

    The dual evaluation ``X_C(conj z)^* B`` is computed as well; with
    ``return_diagnostic=True`` the pair ``(G_tilde, ||difference||_2)`` is
    returned.
    """
    sys = mm.sys
    Gt = sys.C.conj().T @ pg_shifted_solve(mm.input, z)
    if not return_diagnostic:
        return Gt
    Gd = pg_shifted_solve(mm.output, np.conj(z)).conj().T @ sys.B
    return Gt, float(np.linalg.norm(Gt - Gd, 2))


def transfer_error(mm, z, form="collinear"):
    """``G(z) - G_tilde(z)`` from the residual directions.

    ``form="collinear"`` evaluates ``Res_C(conj z)^* (zI - A)^{-1} Res_B(z)``
    with both residuals written through their ``n x s`` directions.
    ``form="keldysh"`` replaces the small factors by the Keldysh sums of the
    residual-normalized block characteristic polynomials.

    Raises
    ------
    ZIsRitzValue, ZIsEigenvalue
    """
    inp, out = mm.input, mm.output
    zc = np.conj(z)
    if form == "collinear":
        DB, DC = inp.PiUGamma, out.PiUGamma
        middle = DC.conj().T @ _resolve(mm.sys.A, z, DB)
        rB = inp.left @ inp._resolvent_E1(z)
        rC = out.left @ out._resolvent_E1(zc)
        return rC.conj().T @ middle @ rB
    if form == "keldysh":
        DB, DC = inp.direction, out.direction
        middle = DC.conj().T @ _resolve(mm.sys.A, z, DB)
        LB = inp.triplets_hat.inverse(z)
        LC = out.triplets_hat.inverse(zc)
        return mm.tau(z) * (LC.conj().T @ middle @ LB)
    raise ValueError(f"unknown form {form!r}; use 'collinear' or 'keldysh'")
