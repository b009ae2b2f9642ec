"""Truncated power-law filters and the tapering/dependence classification.

A filter ``a_0 = a0, a_i = i**-beta (i >= 1)`` is cut at ``lambda(n) = c n**gamma1``.
Nine cases come from crossing the filter-taper regime with the dependence
class; the flat filter (``beta = 0``) adds three more::

                 LRD  SRD  ND   flat
    strong        1    2    3    10
    weak          4    5    6    11
    moderate      7    8    9    12
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._numerics import power_window_sum, riemann_zeta
from .errors import CapacityError, ConfigurationError, DomainError

DEPENDENCE = ("LRD", "SRD", "ND", "flat")
REGIMES = ("strong", "weak", "moderate")
A0_MODES = ("one", "nd-balancing")

# Largest coefficient array that .values will materialize.
MAX_MATERIALIZED = 1 << 25


def _is_one(x):
    if isinstance(x, Fraction):
        return x == 1
    return float(x) == 1.0


def classify_filter_taper(gamma1) -> str:
    """Filter-taper regime from the exponent of lambda(n) = c n**gamma1.

    The moderate case is an exact comparison (``Fraction`` inputs compare
    exactly; floats must equal 1.0 bit for bit).
    """
    if not gamma1 > 0:
        raise DomainError(f"gamma1 must be positive, got {gamma1}")
    if _is_one(gamma1):
        return "moderate"
    return "strong" if gamma1 < 1 else "weak"


def classify_innovation_taper(gamma, alpha) -> str:
    """Hard/soft/intermediate tapering of b(n) = n**gamma for Pareto(alpha).

    ``gamma == 1/alpha`` is decided exactly for ``Fraction`` inputs and with a
    1e-12 relative tolerance for floats.
    """
    if not 0 < alpha < 2:
        raise DomainError(f"only 0 < alpha < 2 is meaningful, got {alpha}")
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if isinstance(gamma, Fraction) and isinstance(alpha, Fraction):
        prod = gamma * alpha
        if prod == 1:
            return "intermediate"
        return "hard" if prod < 1 else "soft"
    prod = float(gamma) * float(alpha)
    if math.isclose(prod, 1.0, rel_tol=1e-12, abs_tol=0.0):
        return "intermediate"
    return "hard" if prod < 1 else "soft"


def case_id(regime: str, dependence: str) -> int:
    if regime not in REGIMES or dependence not in DEPENDENCE:
        raise ConfigurationError(f"unknown regime/dependence {regime!r}/{dependence!r}")
    r = REGIMES.index(regime)
    if dependence == "flat":
        return 10 + r
    return 3 * r + DEPENDENCE.index(dependence) + 1


def case_parts(j: int) -> tuple[str, str]:
    """Inverse of :func:`case_id`: ``j -> (regime, dependence)``."""
    if not isinstance(j, (int, np.integer)) or not 1 <= j <= 12:
        raise ConfigurationError(f"case id must be an integer in 1..12, got {j!r}")
    if j >= 10:
        return REGIMES[j - 10], "flat"
    return REGIMES[(j - 1) // 3], DEPENDENCE[(j - 1) % 3]


def check_beta(dependence: str, beta: float) -> None:
    ok = {
        "LRD": 0.5 < beta < 1.0,
        "SRD": beta > 1.0,
        "ND": 1.0 < beta < 1.5,
        "flat": beta == 0.0,
    }[dependence]
    if not ok:
        allowed = {"LRD": "1/2 < beta < 1", "SRD": "beta > 1",
                   "ND": "1 < beta < 3/2", "flat": "beta = 0"}[dependence]
        raise ConfigurationError(f"beta={beta} is inconsistent with {dependence} (needs {allowed})")


@dataclass(frozen=True)
class FilterSpec:
    beta: float
    dependence: str
    gamma1: float
    c: float = 1.0
    a0_mode: str | None = None

    def __post_init__(self):
        if self.dependence not in DEPENDENCE:
            raise ConfigurationError(f"dependence must be one of {DEPENDENCE}")
        check_beta(self.dependence, self.beta)
        if not self.gamma1 > 0:
            raise ConfigurationError("gamma1 must be positive")
        if not self.c > 0:
            raise ConfigurationError("c must be positive")
        mode = self.a0_mode or ("nd-balancing" if self.dependence == "ND" else "one")
        if mode not in A0_MODES:
            raise ConfigurationError(f"a0_mode must be one of {A0_MODES}")
        if self.dependence == "ND" and mode != "nd-balancing":
            raise ConfigurationError("ND filters need a0_mode='nd-balancing' (sum of a_i = 0)")
        if self.dependence != "ND" and mode == "nd-balancing":
            raise ConfigurationError("a0_mode='nd-balancing' is only meaningful for ND filters")
        object.__setattr__(self, "a0_mode", mode)

    @classmethod
    def for_case(cls, j: int, beta: float = 0.0, gamma1: float | None = None, c: float = 1.0):
        """Build the filter of case ``j``; gamma1 defaults to 0.5/1.5/1 by regime."""
        regime, dependence = case_parts(j)
        if gamma1 is None:
            gamma1 = {"strong": 0.5, "weak": 1.5, "moderate": 1.0}[regime]
        if classify_filter_taper(gamma1) != regime:
            raise ConfigurationError(f"gamma1={gamma1} is not a {regime} taper (case {j})")
        return cls(beta=float(beta), dependence=dependence, gamma1=gamma1,
                   c=c if regime == "moderate" else 1.0)

    @property
    def regime(self) -> str:
        return classify_filter_taper(self.gamma1)

    @property
    def case(self) -> int:
        return case_id(self.regime, self.dependence)

    @property
    def a0(self) -> float:
        if self.dependence == "flat" or self.a0_mode == "one":
            return 1.0
        return -riemann_zeta(self.beta)


def lambda_of(spec: FilterSpec, n: int) -> int:
    """Truncation lag floor(c n**gamma1); c is taken as 1 unless gamma1 == 1."""
    if n < 1:
        raise DomainError("n must be >= 1")
    c = spec.c if _is_one(spec.gamma1) else 1.0
    x = c * float(n) ** float(spec.gamma1)
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, x):
        return int(r)
    return int(math.floor(x))


class TruncatedFilter:
    """Coefficients a~_0..a~_lam of one member of the filter family.

    Coefficients are generated on demand by index range so that filters with
    a truncation lag far beyond memory (weak tapering at large n) remain
    usable by the coefficient engine.
    """

    def __init__(self, spec: FilterSpec, n: int):
        self.spec = spec
        self.n = int(n)
        self.lam = lambda_of(spec, n)
        self.a0 = spec.a0

    def __len__(self):
        return self.lam + 1

    def __repr__(self):
        return f"TruncatedFilter(case={self.spec.case}, beta={self.spec.beta}, n={self.n}, lam={self.lam})"

    def coefficients(self, lo: int = 0, hi: int | None = None) -> np.ndarray:
        """Return a~_lo..a~_hi (inclusive, clipped to [0, lam])."""
        hi = self.lam if hi is None else min(hi, self.lam)
        lo = max(lo, 0)
        if hi < lo:
            return np.zeros(0)
        if self.spec.dependence == "flat":
            return np.ones(hi - lo + 1)
        idx = np.arange(lo, hi + 1, dtype=np.float64)
        with np.errstate(divide="ignore"):
            out = idx**-self.spec.beta
        if lo == 0:
            out[0] = self.a0
        return out

    @property
    def values(self) -> np.ndarray:
        if self.lam + 1 > MAX_MATERIALIZED:
            raise CapacityError(f"filter of length {self.lam + 1} exceeds the materialization cap")
        return self.coefficients()

    def __array__(self, dtype=None, copy=None):
        v = self.values
        return v if dtype is None else v.astype(dtype)

    def window_closed_form(self, u, m):
        """sum_{i=u+1}^{u+m} a_i as a smooth function of u (needs u >~ 1e3, u + m <= lam)."""
        return power_window_sum(self.spec.beta, u, m)


class ArrayFilter:
    """Arbitrary finite coefficient array behind the TruncatedFilter interface."""

    def __init__(self, values):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ConfigurationError("filter must be a non-empty 1-D array")
        self._v = v
        self.lam = v.size - 1
        self.n = None

    def __len__(self):
        return self._v.size

    def coefficients(self, lo=0, hi=None):
        hi = self.lam if hi is None else min(hi, self.lam)
        lo = max(lo, 0)
        return self._v[lo:hi + 1].copy()

    @property
    def values(self):
        return self._v.copy()

    def __array__(self, dtype=None, copy=None):
        return self._v if dtype is None else self._v.astype(dtype)

    window_closed_form = None


def as_filter(filt):
    if isinstance(filt, (TruncatedFilter, ArrayFilter)):
        return filt
    return ArrayFilter(filt)


def build_filter(spec: FilterSpec, n: int) -> TruncatedFilter:
    return TruncatedFilter(spec, n)


def filter_sum(spec: FilterSpec) -> float:
    """sum_{i>=0} a_i of the untapered filter: 1 + zeta(beta) for SRD, 0 for ND."""
    if spec.dependence == "SRD":
        return 1.0 + riemann_zeta(spec.beta)
    if spec.dependence == "ND":
        return 0.0
    raise ConfigurationError(f"the filter sum is not defined for {spec.dependence} filters")
