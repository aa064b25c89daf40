"""Sampling regions for the maxima in the a posteriori bounds."""
from dataclasses import dataclass

import numpy as np

from .errors import RegionInvalid


class SpectralRegion:
    def points(self):
        raise NotImplementedError


@dataclass(frozen=True)
class RealInterval(SpectralRegion):
    """``n`` points on ``[a, b]`` (linear or logarithmic spacing)."""
    a: float
    b: float
    n: int = 100
    spacing: str = "linear"

    def points(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a > self.b:
            raise RegionInvalid(f"invalid interval [{self.a}, {self.b}]")
        if self.n < 2:
            raise RegionInvalid("an interval needs at least two sample points")
        if self.spacing == "linear":
            return np.linspace(self.a, self.b, self.n).astype(np.complex128)
        if self.spacing == "log":
            if self.a <= 0:
                raise RegionInvalid("logarithmic spacing needs a positive interval")
            return np.geomspace(self.a, self.b, self.n).astype(np.complex128)
        raise RegionInvalid(f"unknown spacing {self.spacing!r}")


@dataclass(frozen=True)
class SectorialGrid(SpectralRegion):
    """Tensor grid ``rho e^{i theta}``: log-spaced radii, uniform angles."""
    rho_min: float
    rho_max: float
    theta_min: float
    theta_max: float
    n_rho: int = 50
    n_theta: int = 50

    def points(self):
        if not 0 < self.rho_min <= self.rho_max or self.theta_min > self.theta_max:
            raise RegionInvalid("invalid sector")
        if self.n_rho < 2 or self.n_theta < 2:
            raise RegionInvalid("a sector needs at least two points per direction")
        rho = np.geomspace(self.rho_min, self.rho_max, self.n_rho)
        theta = np.linspace(self.theta_min, self.theta_max, self.n_theta)
        return (rho[:, None] * np.exp(1j * theta[None, :])).ravel()


@dataclass(frozen=True)
class ExplicitList(SpectralRegion):
    values: tuple

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(np.ravel(values).astype(np.complex128)))

    def points(self):
        pts = np.asarray(self.values, dtype=np.complex128)
        if pts.size == 0 or not np.all(np.isfinite(pts)):
            raise RegionInvalid("explicit region must be a nonempty finite list")
        return pts


def as_points(region):
    if isinstance(region, SpectralRegion):
        return region.points()
    return ExplicitList(region).points()
