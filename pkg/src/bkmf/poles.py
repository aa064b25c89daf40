"""Pole handling and pole generation by equidistributed sequences."""
import math

import numpy as np
import mpmath

INF = math.inf


def is_infinite(p):
    return not np.isfinite(p)


def normalize_poles(poles):
    """Return poles as a list of complex numbers, with ``inf`` kept as a float."""
    out = []
    for p in poles:
        if p is None or (isinstance(p, str) and p.lower() in ("inf", "infinity")):
            out.append(INF)
            continue
        p = complex(p)
        if np.isnan(p.real) or np.isnan(p.imag):
            raise ValueError("poles must not be NaN")
        out.append(INF if is_infinite(p) else p)
    return out


def finite_poles(poles):
    return [p for p in poles if not is_infinite(p)]


def _golden_sequence(count):
    """``frac(i (sqrt(5) - 1) / 2)`` for ``i = 1..count``."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    return np.array([math.fmod(i * g, 1.0) for i in range(1, count + 1)])


def _symmetric_eds(ell, count):
    """EDS points in ``[ell, 1]`` for the condenser ``([-1, -ell], [ell, 1])``.

    The equilibrium measure of ``[ell, 1]`` has the inverse distribution
    function ``u -> dn(u K(k'), k')`` with ``k' = sqrt(1 - ell^2)``.
    """
    # k'^2 = 1 - ell^2 is formed in extended precision: for small ell the
    # double precision value would lose the digits of ell^2 that matter
    with mpmath.workdps(40):
        m = 1 - mpmath.mpf(ell) ** 2
        Kp = mpmath.ellipk(m)
        return np.array([float(mpmath.ellipfun("dn", mpmath.mpf(z) * Kp, m=m))
                         for z in _golden_sequence(count)])


def generate_poles_eds(a, b, count, kind="halfline"):
    """Poles for rational approximation on ``[a, b]`` by equidistributed sequences.

    The golden-ratio sequence ``zeta_i = frac(i (sqrt(5) - 1) / 2)`` is
    pushed through the inverse distribution function of the equilibrium
    measure of a condenser with plate ``[a, b]``:

    ``kind="halfline"``
        second plate ``[-inf, 0]``, suited to Stieltjes functions such as
        ``z^{-1/2}``. A Moebius map ``T`` sends ``(-inf, 0, a, b)`` to
        ``(-1, -ell, ell, 1)`` and the poles are ``T^{-1}(-dn(zeta_i K', k'))``.
    ``kind="symmetric"``
        second plate ``[-b, -a]``; the poles are ``-b dn(zeta_i K', k')``
        with ``k' = sqrt(1 - (a/b)^2)``.

    Parameters
    ----------
    a, b : float
        Interval endpoints, ``0 < a < b``.
    count : int
        Total number of poles; the last one is infinite.
    kind : {"halfline", "symmetric"}

    Returns
    -------
    list
        ``count - 1`` finite negative poles followed by ``inf``.

    Examples
    --------
    >>> generate_poles_eds(1.0, 2.0, 1)
    [inf]
    """
    if not (np.isfinite(a) and np.isfinite(b)) or not 0 < a < b:
        raise ValueError(f"need 0 < a < b, got a={a}, b={b}")
    if count < 1:
        raise ValueError("count must be positive")
    nfin = count - 1
    if nfin == 0:
        return [INF]
    if kind == "symmetric":
        dn = _symmetric_eds(a / b, nfin)
        return [complex(-b * d) for d in dn] + [INF]
    if kind != "halfline":
        raise ValueError(f"unknown kind {kind!r}")
    # T(z) = (beta - z) / (z + delta) with T(-inf) = -1, T(0) = -ell, T(a) = ell, T(b) = 1
    ell = a / ((2 * b - a) + 2 * math.sqrt(b * (b - a)))
    delta = -2 * b / (1 + ell)
    beta = 2 * b * ell / (1 + ell)
    w = -_symmetric_eds(ell, nfin)
    return [complex((beta - wi * delta) / (wi + 1)) for wi in w] + [INF]
