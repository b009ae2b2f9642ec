"""Standard and tapered Pareto innovations.

The tapered variable keeps a standard Pareto draw below the tapering level
``b`` and replaces everything above it by ``b`` plus a unit exponential
overshoot::

    zeta(alpha, b) = theta * 1[theta < b] + (b + R) * 1[theta >= b]

Its density follows directly from that construction: ``alpha x**(-alpha-1)``
on ``[1, b)`` and ``b**-alpha * exp(-(x - b))`` on ``[b, inf)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import special

from ._numerics import integrate, integrate_log
from .errors import ConfigurationError, DomainError

# Above this level e**b * Gamma(r+1, b) is evaluated by quadrature instead.
_GAMMA_ROUTE_MAX_B = 500.0


@dataclass(frozen=True)
class ParetoSpec:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class TaperedParetoSpec:
    """Tapered standard Pareto law with tail exponent ``alpha`` and level ``b``.

    ``b = 1`` is admitted: the Pareto branch is then empty and the variable is
    exactly ``1 + Exp(1)``.
    """

    alpha: float
    b: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.b >= 1:
            raise DomainError(f"tapering level b must be >= 1, got {self.b}")


def pareto_cdf(spec: ParetoSpec, x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 1):
        raise DomainError("the standard Pareto law lives on [1, inf)")
    out = -np.expm1(-spec.alpha * np.log(x))
    return float(out) if out.ndim == 0 else out


def tapered_pareto_density(spec: TaperedParetoSpec, x):
    x = np.asarray(x, dtype=np.float64)
    a, b = spec.alpha, spec.b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        body = a * x ** (-a - 1.0)
        tail = b**-a * np.exp(-(x - b))
    out = np.where(x < 1, 0.0, np.where(x < b, body, tail))
    return float(out) if out.ndim == 0 else out


def tapered_pareto_cdf(spec: TaperedParetoSpec, x):
    x = np.asarray(x, dtype=np.float64)
    a, b = spec.alpha, spec.b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        body = -np.expm1(-a * np.log(np.maximum(x, 1.0)))
        tail = 1.0 - b**-a * np.exp(-(x - b))
    out = np.where(x < 1, 0.0, np.where(x < b, body, tail))
    return float(out) if out.ndim == 0 else out


def sample_tapered_pareto(spec: TaperedParetoSpec, rng: np.random.Generator, size=None):
    """Draw tapered Pareto variates by inverse CDF.

    Two uniforms are consumed per variate whether or not the taper is hit,
    so the stream position depends only on ``size``.
    """
    u1 = rng.random(size)
    u2 = rng.random(size)
    theta = (1.0 - u1) ** (-1.0 / spec.alpha)
    overshoot = -np.log1p(-u2)
    return np.where(theta < spec.b, theta, spec.b + overshoot)


def _shifted_exponential_moment(b, r):
    """E (b + R)**r for a unit exponential R, i.e. e**b Gamma(r + 1, b)."""
    if b <= _GAMMA_ROUTE_MAX_B:
        q = special.gammaincc(r + 1.0, b)
        if q > 0:
            return math.exp(special.gammaln(r + 1.0) + math.log(q) + b)
    # b**r * int_0^inf (1 + x/b)**r e**-x dx; no overflow for any b
    body = integrate(lambda x: (1.0 + x / b) ** r * math.exp(-x), 0.0, 50.0 + 10.0 * r)
    return b**r * body


def moment_zeta(spec: TaperedParetoSpec, r: float) -> float:
    """Raw moment E zeta**r, from the Pareto piece and the exponential piece."""
    if not r > 0:
        raise DomainError(f"moment order must be positive, got {r}")
    a, b = spec.alpha, spec.b
    if b == 1.0:
        pareto_part = 0.0
    elif r == a:
        pareto_part = a * math.log(b)
    else:
        e = r - a
        # alpha (b**e - 1) / e, written with expm1 for e*log(b) near 0
        pareto_part = a * math.expm1(e * math.log(b)) / e
    return pareto_part + b**-a * _shifted_exponential_moment(b, r)


def mean_zeta(spec: TaperedParetoSpec) -> float:
    return moment_zeta(spec, 1.0)


def centered_abs_moment(spec: TaperedParetoSpec, p: float) -> float:
    """E|zeta - E zeta|**p by quadrature over the density.

    The Pareto branch is integrated in log x and split at the mean; the
    exponential branch is split where ``b + y`` crosses the mean.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    a, b = spec.alpha, spec.b
    mu = mean_zeta(spec)

    def body(x):
        return abs(x - mu) ** p * a * x ** (-a - 1.0)

    pareto_part = 0.0
    if b > 1.0:
        if 1.0 < mu < b:
            pareto_part = integrate_log(body, 1.0, mu) + integrate_log(body, mu, b)
        else:
            pareto_part = integrate_log(body, 1.0, b)

    def tail(y):
        return abs(b + y - mu) ** p * math.exp(-y)

    upper = 60.0 + 10.0 * p + max(0.0, mu - b)
    cross = mu - b
    if cross > 0:
        tail_part = (integrate(tail, 0.0, cross)
                     + integrate(tail, cross, upper))
    else:
        tail_part = integrate(tail, 0.0, upper)
    return pareto_part + b**-a * tail_part


def moment_ratio(spec, delta: float, n: int | None = None) -> float:
    """E|xi|**(2+delta) / (E xi**2)**((2+delta)/2) for a centred innovation.

    ``spec`` is a :class:`TaperedParetoSpec` or an :class:`InnovationModel`
    (``n`` resolves the tapering level of the latter).
    """
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if isinstance(spec, InnovationModel):
        return spec.moment_ratio(delta, n)
    p = 2.0 + delta
    return centered_abs_moment(spec, p) / centered_abs_moment(spec, 2.0) ** (p / 2.0)


def normal_abs_moment(p: float) -> float:
    """E|N(0,1)|**p = 2**(p/2) Gamma((p+1)/2) / sqrt(pi)."""
    return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)


@dataclass(frozen=True)
class InnovationModel:
    """Unit-variance or tapered-Pareto innovations for the linear process.

    Build with :meth:`gaussian`, :meth:`standardized` or :meth:`tapered_pareto`.
    For the tapered variant the tapering level is ``b(n) = n**gamma``.
    """

    kind: str
    alpha: float | None = None
    gamma: float | None = None
    base: Any = field(default=None, compare=False, repr=False)
    base_mean: float | None = None
    base_var: float | None = None

    KINDS = ("gaussian", "standardized-custom", "tapered-pareto")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"unknown innovation kind {self.kind!r}")
        if self.kind == "tapered-pareto":
            if self.alpha is None or self.gamma is None:
                raise ConfigurationError("tapered-pareto needs alpha and gamma")
            if not self.alpha > 0 or not self.gamma > 0:
                raise ConfigurationError("alpha and gamma must be positive")
        if self.kind == "standardized-custom":
            if self.base is None or self.base_var is None or not self.base_var > 0:
                raise ConfigurationError("standardized-custom needs a base law with positive variance")

    @classmethod
    def gaussian(cls):
        return cls("gaussian")

    @classmethod
    def tapered_pareto(cls, alpha, gamma):
        return cls("tapered-pareto", alpha=float(alpha), gamma=float(gamma))

    @classmethod
    def standardized(cls, dist):
        """Wrap a frozen ``scipy.stats`` law; its exact mean and variance standardize it."""
        return cls("standardized-custom", base=dist,
                   base_mean=float(dist.mean()), base_var=float(dist.var()))

    @property
    def is_gaussian(self):
        return self.kind == "gaussian"

    def taper_level(self, n: int) -> float:
        if self.kind != "tapered-pareto":
            raise ConfigurationError("only tapered-pareto innovations have a tapering level")
        return float(n) ** self.gamma

    def tapered_spec(self, n: int) -> TaperedParetoSpec:
        return TaperedParetoSpec(self.alpha, self.taper_level(n))

    def variance(self, n: int | None = None) -> float:
        """E xi**2; identically 1 except for tapered Pareto, where it grows with b(n)."""
        if self.kind != "tapered-pareto":
            return 1.0
        spec = self.tapered_spec(_need_n(n))
        return moment_zeta(spec, 2.0) - moment_zeta(spec, 1.0) ** 2

    def abs_moment(self, p: float, n: int | None = None) -> float:
        if self.kind == "gaussian":
            return normal_abs_moment(p)
        if self.kind == "tapered-pareto":
            return centered_abs_moment(self.tapered_spec(_need_n(n)), p)
        mu, sd = self.base_mean, math.sqrt(self.base_var)
        return float(self.base.expect(lambda x: abs((x - mu) / sd) ** p))

    def moment_ratio(self, delta: float, n: int | None = None) -> float:
        p = 2.0 + delta
        if self.kind == "tapered-pareto":
            spec = self.tapered_spec(_need_n(n))
            return centered_abs_moment(spec, p) / centered_abs_moment(spec, 2.0) ** (p / 2.0)
        return self.abs_moment(p, n)

    def sample(self, rng: np.random.Generator, size, n: int | None = None) -> np.ndarray:
        """Draw centred innovations (mean exactly zero in law)."""
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "tapered-pareto":
            spec = self.tapered_spec(_need_n(n))
            return sample_tapered_pareto(spec, rng, size) - mean_zeta(spec)
        draws = np.asarray(self.base.rvs(size=size, random_state=rng), dtype=np.float64)
        return (draws - self.base_mean) / math.sqrt(self.base_var)

    def to_dict(self):
        if self.kind == "tapered-pareto":
            return {"type": "tapered-pareto", "alpha": self.alpha, "gamma": self.gamma}
        if self.kind == "gaussian":
            return {"type": "gaussian"}
        raise ConfigurationError("custom innovations are not serializable")


def _need_n(n):
    if n is None:
        raise ConfigurationError("sample size n is required to resolve b(n) = n**gamma")
    return n
