"""Numerical experiments together with their validity checks.

Each experiment returns an :class:`ExperimentResult` holding the rows of one
or more data files together with summary lines and a validity flag.
"""
import math
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .approx import ApproxState, bound_L, bound_M, matfun_approx
from .errors import ConfigError, ExperimentFailed, KrylovError
from .functions import ScalarFunction
from .krylov import RationalArnoldiBuilder, block_arnoldi, dual_basis
from .operators import DiagonalOperator, KroneckerSumOperator, TridiagonalOperator
from .poles import generate_poles_eds
from .regions import RealInterval, SectorialGrid

EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# random numbers

def make_rng(seed):
    """PCG64 generator; all experiment randomness derives from it."""
    return np.random.Generator(np.random.PCG64(seed))


def gaussian(rng, shape):
    """Standard normal samples by the Box-Muller transform of PCG64 uniforms."""
    count = int(np.prod(shape))
    half = (count + 1) // 2
    u1 = rng.random(half)
    u2 = rng.random(half)
    r = np.sqrt(-2.0 * np.log1p(-u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
    return z[:count].reshape(shape, order="F")


def random_block(rng, n, s):
    B = gaussian(rng, (n, s))
    return B / np.linalg.norm(B)


# ---------------------------------------------------------------------------
# configuration

EXPERIMENTS = {
    "fig_intro": "exp(A)B, diagonal A with log-spaced spectrum, two structured columns",
    "exp_1dlap": "exp(dt A)B, 1D Laplacian, polynomial Galerkin",
    "insqrt_2dlap": "A^{-1/2}B, 2D Laplacians A1 and A2, rational Galerkin with EDS poles",
    "petrov_exp": "exp(A)B, normal diagonal A in a half-annulus, polynomial Petrov-Galerkin",
    "petrov_insqrt": "A^{-1/2}B, normal diagonal A in a narrow sector, rational Petrov-Galerkin",
    "timings": "share of wall time spent on the bounds, 2D Laplacian, 20 iterations",
}

# per experiment: desk-scale defaults and full-scale overrides
_DEFAULTS = {
    "fig_intro": dict(n=400, s=2, jmax=20, runs=1),
    "exp_1dlap": dict(n=1000, s=5, jmax=20, runs=10),
    "insqrt_2dlap": dict(n=50, s=5, jmax=20, runs=10),
    "petrov_exp": dict(n=256, s=5, jmax=20, runs=10),
    "petrov_insqrt": dict(n=256, s=5, jmax=16, runs=10),
    "timings": dict(n=50, s=5, jmax=20, runs=3),
}
_FULL_SCALE = {
    "petrov_exp": dict(n=1024),
    "petrov_insqrt": dict(n=1024),
    "timings": dict(n=100),
}


@dataclass
class ExperimentConfig:
    """Parameters of one experiment run.

    ``n`` follows the meaning of the size parameter of each experiment: the
    matrix dimension for ``fig_intro``, ``exp_1dlap`` and the Petrov tests
    (a perfect square), the one-dimensional grid size for ``insqrt_2dlap``,
    and the largest grid size for ``timings``.
    """
    experiment: str
    n: int = None
    s: int = None
    jmax: int = None
    seed: int = 0
    runs: int = None
    out: str = "results"
    paper_scale: bool = False

    def resolved(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose from {', '.join(EXPERIMENTS)}")
        base = dict(_DEFAULTS[self.experiment])
        if self.paper_scale:
            base.update(_FULL_SCALE.get(self.experiment, {}))
        vals = {k: (getattr(self, k) if getattr(self, k) is not None else base[k])
                for k in ("n", "s", "jmax", "runs")}
        cfg = replace(self, **vals)
        for k in ("n", "s", "jmax", "runs"):
            if int(getattr(cfg, k)) < 1:
                raise ConfigError(f"{k} must be positive")
        if cfg.experiment.startswith("petrov") and math.isqrt(cfg.n) ** 2 != cfg.n:
            raise ConfigError("Petrov experiments need n to be a perfect square")
        if cfg.seed < 0:
            raise ConfigError("seed must be nonnegative")
        return cfg


def parse_config_file(path):
    """Read ``key=value`` lines (``#`` starts a comment)."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            key = key.replace("-", "_")
            names = {f.name for f in fields(ExperimentConfig)}
            if key not in names:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in ("n", "s", "jmax", "seed", "runs"):
                try:
                    value = int(value)
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: {key} must be an integer") from None
            elif key == "paper_scale":
                value = value.lower() in ("1", "true", "yes", "on")
            out[key] = value
    return out


# ---------------------------------------------------------------------------
# results

@dataclass
class Curve:
    """Averaged per-``j`` data of one figure panel."""
    name: str
    j: np.ndarray
    error: np.ndarray
    bound_M: np.ndarray
    bound_L: np.ndarray
    fnorm: float
    layout: str = "bounds_first"

    def rows(self):
        if self.layout == "error_first":
            cols = (self.j, self.error, self.bound_M, self.bound_L)
        else:
            cols = (self.j, self.bound_M, self.bound_L, self.error)
        return np.column_stack(cols)


@dataclass
class ExperimentResult:
    experiment: str
    files: dict = field(default_factory=dict)
    summary: list = field(default_factory=list)
    valid: bool = True
    curves: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def emit_dat(rows, path):
    """Write rows as space-separated ``%.16e`` values without a header."""
    rows = np.asarray(rows, dtype=float)
    with open(path, "w") as fh:
        if rows.size == 0:
            return
        np.savetxt(fh, np.atleast_2d(rows), fmt="%.16e", delimiter=" ")


def check_curve(curve, result, divergence=False):
    """Record validity and ratio statistics of ``curve`` in ``result``."""
    threshold = 100 * EPS * curve.fnorm
    significant = curve.error > threshold
    for label, b in (("bound_M", curve.bound_M), ("bound_L", curve.bound_L)):
        ratio = b / np.maximum(curve.error, np.finfo(float).tiny)
        rmax = float(np.max(ratio[significant])) if significant.any() else float("nan")
        rmin = float(np.min(ratio[significant])) if significant.any() else float("nan")
        result.summary.append(f"{curve.name} {label}: max bound/error = {rmax:.3e}, "
                              f"min bound/error = {rmin:.3e}")
        bad = significant & (b < curve.error)
        if bad.any():
            result.valid = False
            result.summary.append(f"{curve.name} {label}: VIOLATED at j = "
                                  + ", ".join(str(int(j)) for j in curve.j[bad]))
        low = ~significant & (b > 100 * np.maximum(curve.error, threshold))
        if label == "bound_L" and low.any():
            result.summary.append(f"{curve.name} bound_L: unstable below the accuracy floor "
                                  f"(j = {', '.join(str(int(j)) for j in curve.j[low])})")
    if divergence:
        onset = divergence_onset(curve)
        curve_msg = "none" if onset is None else f"j = {onset}"
        result.summary.append(f"{curve.name} bound_L divergence onset: {curve_msg}")
        result.extra[f"{curve.name}_divergence"] = onset


def divergence_onset(curve, level=1e-10, factor=100.0):
    """First ``j`` after the error reaches ``level`` at which bound_L exceeds
    ``factor`` times the error; ``None`` if it never does."""
    reached = np.nonzero(curve.error <= level)[0]
    if reached.size == 0:
        return None
    for k in range(reached[0], len(curve.j)):
        if curve.bound_L[k] > factor * curve.error[k]:
            return int(curve.j[k])
    return None


# ---------------------------------------------------------------------------
# generic run loops

def _average(rows):
    return np.mean(np.asarray(rows), axis=0)


def _sweep(name, states, f, A, B, region, kappa):
    """Error and both bounds for a sequence of states."""
    exact = A.eigdata().apply_function(f, B)
    err, bm, bl = [], [], []
    for st in states:
        st._kappa = kappa
        Fj = matfun_approx(st, f)
        err.append(np.linalg.norm(exact - Fj))
        bm.append(bound_M(st, f, region))
        bl.append(bound_L(st, f, region))
    return np.array(err), np.array(bm), np.array(bl), float(np.linalg.norm(exact))


def _guard(name, func, *args):
    try:
        return func(*args)
    except KrylovError as exc:
        raise ExperimentFailed(f"{name}: {type(exc).__name__}: {exc}") from exc


def _polynomial_states(A, B, jmax, Z=None):
    d = block_arnoldi(A, B, jmax)
    for j in range(1, jmax + 1):
        yield ApproxState(d.truncate(j), Z=None if Z is None else Z[:, :j * B.shape[1]],
                          semisimple_ok=True)


def _rational_states(A, B, poles, jmax, Z=None):
    builder = RationalArnoldiBuilder(A, B, poles)
    for j in range(1, jmax + 1):
        yield ApproxState(builder.decomposition(j),
                          Z=None if Z is None else Z[:, :j * B.shape[1]], semisimple_ok=True)


def _run_curves(name, cfg, make_instance, layout="bounds_first"):
    runs = []
    fnorms = []
    rng = make_rng(cfg.seed)
    for _ in range(cfg.runs):
        states, f, A, B, region = make_instance(rng)
        e, bm, bl, fn = _guard(name, _sweep, name, states, f, A, B, region, 1.0)
        runs.append(np.column_stack([e, bm, bl]))
        fnorms.append(fn)
    avg = _average(runs)
    j = np.arange(1, cfg.jmax + 1, dtype=float)
    return Curve(name, j, avg[:, 0], avg[:, 1], avg[:, 2], float(np.mean(fnorms)), layout)


# ---------------------------------------------------------------------------
# experiments

def laplacian_1d(n, coefficient=1e-3):
    """``K (n+1)^2 tridiag(1, -2, 1)``."""
    return TridiagonalOperator.toeplitz(n, 1.0, -2.0, 1.0, scale=coefficient * (n + 1) ** 2)


def laplacian_2d(m, shifted=False):
    """``I (x) T + T (x) I`` (plus ``(m+1)^2 I`` when ``shifted``) with
    ``T = (m+1)^2 tridiag(-1, 2, -1)``; applied through the factor ``T``."""
    h2 = (m + 1) ** 2
    T = h2 * (2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1))
    return KroneckerSumOperator(T, shift=h2 if shifted else 0.0)


def run_fig_intro(cfg):
    n, jmax = cfg.n, cfg.jmax
    lam = -np.geomspace(1e-4, 16.0, n)
    A = DiagonalOperator(lam)
    i = np.arange(1, n + 1)
    B = np.column_stack([0.95 ** i, 0.99 ** i])[:, :cfg.s]
    B = B / np.linalg.norm(B)
    f = ScalarFunction.exp()
    region = RealInterval(-16.0, -1e-4, 100)

    def make(rng):
        return _polynomial_states(A, B, jmax), f, A, B, region

    curve = _run_curves("fig_intro", replace(cfg, runs=1), make, layout="error_first")
    res = ExperimentResult("fig_intro", curves=[curve])
    res.files["fig_intro.dat"] = curve.rows()
    check_curve(curve, res)
    return res


def run_exp_1dlap(cfg):
    A = laplacian_1d(cfg.n)
    f = ScalarFunction.exp(0.01)
    ev = A.eigdata().values.real
    region = RealInterval(ev.min(), ev.max(), 100)

    def make(rng):
        B = random_block(rng, cfg.n, cfg.s)
        return _polynomial_states(A, B, cfg.jmax), f, A, B, region

    curve = _run_curves("exp_1dlap", cfg, make)
    res = ExperimentResult("exp_1dlap", curves=[curve])
    res.files["exp_1dlap.dat"] = curve.rows()
    check_curve(curve, res)
    return res


def run_insqrt_2dlap(cfg):
    res = ExperimentResult("insqrt_2dlap")
    f = ScalarFunction.invsqrt()
    for label, shifted in (("A1", False), ("A2", True)):
        A = laplacian_2d(cfg.n, shifted)
        ev = A.eigdata().values.real
        a, b = ev.min(), ev.max()
        poles = generate_poles_eds(a, b, cfg.jmax)[:-1]
        region = RealInterval(a, b, 100, spacing="log")

        def make(rng, A=A, poles=poles, region=region):
            B = random_block(rng, A.n, cfg.s)
            return _rational_states(A, B, poles, cfg.jmax), f, A, B, region

        name = f"insqrt_2dlap_{label}"
        curve = _run_curves(name, cfg, make)
        res.curves.append(curve)
        res.files[f"{name}.dat"] = curve.rows()
        check_curve(curve, res, divergence=True)
    return res


def normal_sector(side, rho_min, rho_max, theta_min, theta_max):
    rho = np.geomspace(rho_min, rho_max, side)
    theta = np.linspace(theta_min, theta_max, side)
    return (rho[:, None] * np.exp(1j * theta[None, :])).ravel()


def _petrov(cfg, name, f, rho, theta, rational):
    side = math.isqrt(cfg.n)
    lam = normal_sector(side, rho[0], rho[1], theta[0], theta[1])
    A = DiagonalOperator(lam)
    region = SectorialGrid(rho[0], rho[1], theta[0], theta[1], 50, 50)
    jmax, s = cfg.jmax, cfg.s
    if rational:
        poles = generate_poles_eds(2.5e-4, 4.0, jmax)

    def make(rng):
        B = random_block(rng, A.n, s)
        C = random_block(rng, A.n, s)
        if rational:
            Z = dual_basis(A.adjoint(), C, poles)
            return _rational_states(A, B, poles[:-1], jmax, Z), f, A, B, region
        Z = dual_basis(A.transpose(), C, jmax)
        return _polynomial_states(A, B, jmax, Z), f, A, B, region

    curve = _run_curves(name, cfg, make)
    res = ExperimentResult(name, curves=[curve])
    res.files[f"{name}.dat"] = curve.rows()
    res.files[f"{name}_eigs.dat"] = np.column_stack([lam.real, lam.imag])
    check_curve(curve, res, divergence=rational)
    return res


def run_petrov_exp(cfg):
    return _petrov(cfg, "petrov_exp", ScalarFunction.exp(),
                   (1e-3, 1.0), (-np.pi / 2, np.pi / 2), rational=False)


def run_petrov_insqrt(cfg):
    return _petrov(cfg, "petrov_insqrt", ScalarFunction.invsqrt(),
                   (3e-4, 3.9), (-np.pi / 8, np.pi / 8), rational=True)


def _timed(func, *args):
    t0 = time.perf_counter()
    out = func(*args)
    return time.perf_counter() - t0, out


def _time_method(A, B, f, region, iterations, rational, poles, bound):
    """Wall time of ``iterations`` Krylov steps with a bound evaluated after
    each step, and the part of it spent on the bound."""
    t_bound = 0.0
    t0 = time.perf_counter()
    if rational:
        builder = RationalArnoldiBuilder(A, B, poles)
        decomps = (builder.decomposition(j) for j in range(1, iterations + 1))
    else:
        d = block_arnoldi(A, B, iterations)
        decomps = (d.truncate(j) for j in range(1, iterations + 1))
    for dj in decomps:
        st = ApproxState(dj, kappa=1.0, semisimple_ok=True)
        dt, _ = _timed(bound, st, f, region)
        t_bound += dt
    matfun_approx(st, f)
    total = time.perf_counter() - t0
    return total, 100.0 * t_bound / total


def run_timings(cfg, grid_sizes=None):
    """Sizes ``m^2`` for ``m = 20, 30, ...`` up to ``cfg.n`` (or the given
    ``grid_sizes``); for each size the fastest of ``cfg.runs`` repetitions
    is kept."""
    sizes = list(grid_sizes) if grid_sizes is not None else list(range(20, cfg.n + 1, 10))
    if not sizes:
        raise ConfigError("timings need n >= 20")
    rng = make_rng(cfg.seed)
    rows = []
    for m in sizes:
        A = laplacian_2d(m)
        ev = A.eigdata().values.real
        a, b = ev.min(), ev.max()
        B = random_block(rng, A.n, cfg.s)
        row = [m * m]
        setups = ((ScalarFunction.exp(-1.0), RealInterval(a, b, 100), False, None),
                  (ScalarFunction.invsqrt(), RealInterval(a, b, 100, spacing="log"), True,
                   generate_poles_eds(a, b, cfg.jmax)[:-1]))
        for f, region, rational, poles in setups:
            for bound in (bound_L, bound_M):
                best = None
                for _ in range(cfg.runs):
                    t, pct = _guard("timings", _time_method, A, B, f, region, cfg.jmax,
                                    rational, poles, bound)
                    if best is None or t < best[0]:
                        best = (t, pct)
                row.extend(best)
        rows.append(row)
    rows = np.array(rows)
    res = ExperimentResult("timings")
    res.files["timings.dat"] = rows
    res.extra["rows"] = rows
    labels = ("exp bound_L", "exp bound_M", "invsqrt bound_L", "invsqrt bound_M")
    for k, label in enumerate(labels):
        pct = rows[:, 2 + 2 * k]
        trend = bool(np.all(np.diff(pct) <= 0))
        res.summary.append(f"timings {label}: bound share "
                           + " ".join(f"{p:.1f}%" for p in pct)
                           + (" (nonincreasing)" if trend else " (not monotone)"))
    return res


RUNNERS = {
    "fig_intro": run_fig_intro,
    "exp_1dlap": run_exp_1dlap,
    "insqrt_2dlap": run_insqrt_2dlap,
    "petrov_exp": run_petrov_exp,
    "petrov_insqrt": run_petrov_insqrt,
    "timings": run_timings,
}


def run(config):
    """Run one experiment and return its :class:`ExperimentResult`."""
    cfg = config.resolved()
    return RUNNERS[cfg.experiment](cfg)
