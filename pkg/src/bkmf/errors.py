"""Exception hierarchy shared by all modules."""


class KrylovError(ArithmeticError):
    """Base class for numerical failures raised by this package."""


class BreakdownOrDeflation(KrylovError):
    """A newly generated block lost full column rank."""

    def __init__(self, step, rank=None, s=None):
        self.step = step
        self.rank = rank
        msg = f"breakdown or deflation at step {step}"
        if rank is not None:
            msg += f" (numerical rank {rank} < {s})"
        super().__init__(msg)


class ShiftedSolveFailed(KrylovError):
    def __init__(self, sigma, reason=""):
        self.sigma = sigma
        super().__init__(f"shifted solve with pole {sigma!r} failed {reason}".strip())


class AssumptionsViolated(KrylovError):
    """Z*U is singular (or too ill conditioned) for a Petrov-Galerkin projection."""


class SingularSubdiagonal(KrylovError):
    def __init__(self, index, smin=None):
        self.index = index
        msg = f"subdiagonal block {index} is numerically singular"
        if smin is not None:
            msg += f" (min singular value {smin:.3e})"
        super().__init__(msg)


class UncontrollablePair(SingularSubdiagonal):
    """The pair (N, W) is not controllable."""


class ZIsRitzValue(KrylovError):
    def __init__(self, z):
        self.z = z
        super().__init__(f"z = {z!r} coincides with a Ritz value")


class ZIsEigenvalue(KrylovError):
    def __init__(self, z):
        self.z = z
        super().__init__(f"z = {z!r} coincides with an eigenvalue of A")


class SimpleEigsRequired(KrylovError):
    """The projected matrix has (numerically) repeated eigenvalues."""


class DiagonalizableRequired(KrylovError):
    """An eigenvector matrix is too ill conditioned to be trusted."""


class ThetaHitsSpectrum(KrylovError):
    """A Ritz value coincides with an eigenvalue of A in a shifted solve."""


class RegionInvalid(ValueError):
    pass


class InfinitePoleUnsupported(KrylovError):
    pass


class ConfigError(ValueError):
    pass


class ExperimentFailed(RuntimeError):
    """A numerical failure inside an experiment, annotated with its context."""
