"""Scalar functions with optional derivatives, and divided differences."""
import numpy as np

DD_RADIUS = 1e-8


class ScalarFunction:
    """A vectorized complex scalar function ``f`` with optional ``f'``.

    Parameters
    ----------
    name : str
    f : callable
        Elementwise map on complex arrays.
    df : callable, optional
        Derivative. A central finite difference with step
        ``1e-6 (1 + |z|)`` is used when omitted.

    Examples
    --------
    >>> g = ScalarFunction.exp(2.0)
    >>> complex(g(0.0))
    (1+0j)
    """

    def __init__(self, name, f, df=None):
        self.name = name
        self._f = f
        self._df = df

    def __repr__(self):
        return f"ScalarFunction({self.name!r})"

    def __call__(self, z):
        return self._f(np.asarray(z, dtype=np.complex128))

    @property
    def has_derivative(self):
        return self._df is not None

    def deriv(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if self._df is not None:
            return self._df(z)
        h = 1e-6 * (1.0 + np.abs(z))
        return (self._f(z + h) - self._f(z - h)) / (2 * h)

    def divided_difference(self, lam, mu, radius=DD_RADIUS):
        """``[f(lam) - f(mu)] / (lam - mu)`` with broadcasting.

        When ``|lam - mu| <= radius * max(1, |lam|)`` the derivative at the
        midpoint is returned instead.
        """
        lam = np.asarray(lam, dtype=np.complex128)
        mu = np.asarray(mu, dtype=np.complex128)
        lam, mu = np.broadcast_arrays(lam, mu)
        diff = lam - mu
        close = np.abs(diff) <= radius * np.maximum(1.0, np.abs(lam))
        out = np.empty(lam.shape, dtype=np.complex128)
        far = ~close
        with np.errstate(divide="ignore", invalid="ignore"):
            out[far] = (self(lam[far]) - self(mu[far])) / diff[far]
        if np.any(close):
            out[close] = self.deriv(0.5 * (lam[close] + mu[close]))
        return out

    def times_poly(self, roots):
        """``phi(z) f(z)`` with ``phi(z) = prod (z - r)``."""
        roots = [complex(r) for r in roots]
        if not roots:
            return self

        def phi(z):
            out = np.ones_like(z)
            for r in roots:
                out = out * (z - r)
            return out

        def dphi(z):
            out = np.zeros_like(z)
            for k in range(len(roots)):
                term = np.ones_like(z)
                for i, r in enumerate(roots):
                    if i != k:
                        term = term * (z - r)
                out = out + term
            return out

        f, df = self.__call__, self.deriv
        return ScalarFunction(f"phi*{self.name}", lambda z: phi(z) * f(z),
                              lambda z: dphi(z) * f(z) + phi(z) * df(z))

    @classmethod
    def exp(cls, t=1.0):
        return cls(f"exp({t}z)", lambda z: np.exp(t * z), lambda z: t * np.exp(t * z))

    @classmethod
    def invsqrt(cls):
        return cls("z^-1/2", lambda z: 1.0 / np.sqrt(z), lambda z: -0.5 / (z * np.sqrt(z)))

    @classmethod
    def inverse(cls):
        return cls("z^-1", lambda z: 1.0 / z, lambda z: -1.0 / (z * z))

    @classmethod
    def power(cls, k):
        if k == 0:
            return cls.constant(1.0)
        return cls(f"z^{k}", lambda z: z ** k, lambda z: k * z ** (k - 1))

    @classmethod
    def constant(cls, c):
        return cls(f"{c}", lambda z: np.full(z.shape, c, dtype=np.complex128),
                   lambda z: np.zeros(z.shape, dtype=np.complex128))


BUILTINS = {
    "exp": ScalarFunction.exp,
    "invsqrt": ScalarFunction.invsqrt,
    "inverse": ScalarFunction.inverse,
}


def get_function(name, **kwargs):
    try:
        return BUILTINS[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {sorted(BUILTINS)}") from None
