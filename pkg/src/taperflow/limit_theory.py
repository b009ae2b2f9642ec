"""Limit constants, Hurst exponents, normalizers and limit variance functions.

Constants depend on ``z = c / t``. Every inner integral is reduced to its
closed form before the outer quadrature, e.g.::

    int_0^1 (x + y)**-beta dx      = ((y + 1)**(1-beta) - y**(1-beta)) / (1 - beta)
    int_0^{z-y} (x + y)**-beta dx  = (z**(1-beta) - y**(1-beta)) / (1 - beta)
    int_w^inf x**-beta dx          = w**(1-beta) / (beta - 1)            (beta > 1)

Differences of nearby powers are evaluated through ``expm1``/``log1p`` so
that integrands keep full relative accuracy far out in their tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from ._numerics import integrate, integrate_log
from .errors import ConfigurationError, DomainError, NumericalError
from .filters import FilterSpec, case_parts, check_beta, filter_sum as _filter_sum

PIECEWISE = "piecewise"

_EPS = 1e-13


# --- integrands -------------------------------------------------------------

def _pow_diff(hi, lo, e):
    """hi**e - lo**e for 0 <= lo <= hi, accurate when lo/hi is close to 1."""
    if lo == 0.0:
        return hi**e if e > 0 else math.inf
    return lo**e * math.expm1(e * math.log(hi / lo))


def _c1_integrand(beta):
    e = 1.0 - beta
    s = e * e
    return lambda y: _pow_diff(y + 1.0, y, e) ** 2 / s


def _window_integrand(beta, z):
    """((z**(1-beta) - y**(1-beta)) / (1-beta))**2 on 0 < y <= z."""
    e = 1.0 - beta
    s = e * e
    return lambda y: _pow_diff(z, y, e) ** 2 / s


# Beyond this point the C1 integrand is integrated from its expansion in 1/y.
_TAIL_START = 100.0
_TAIL_TERMS = 14


@lru_cache(maxsize=64)
def _c1_tail_coefficients(beta):
    """c_k with (((y+1)**e - y**e) / e)**2 = y**(-2 beta) sum_k c_k y**-k, e = 1 - beta."""
    e = 1.0 - beta
    # (y+1)**e - y**e = e y**(e-1) sum_k b_k y**-k,  b_k = binom(e, k+1) / e
    b = [1.0]
    for k in range(1, _TAIL_TERMS):
        b.append(b[-1] * (e - k) / (k + 1))
    return tuple(sum(b[i] * b[k - i] for i in range(k + 1)) for k in range(_TAIL_TERMS))


def _c1_tail(beta, y0):
    """int_{y0}^inf of the C1 integrand for y0 >= _TAIL_START."""
    return sum(ck * y0 ** (1.0 - 2.0 * beta - k) / (2.0 * beta - 1.0 + k)
               for k, ck in enumerate(_c1_tail_coefficients(beta)))


def _c1_piece(beta, lo, hi):
    """int_lo^hi of the C1 integrand, 0 <= lo <= hi <= inf."""
    f = _c1_integrand(beta)
    total = 0.0
    if lo < 1.0:
        top = min(hi, 1.0)
        total += integrate(f, lo, top, left_power=(2.0 - 2.0 * beta) if lo == 0.0 else None,
                           epsabs=0.0, epsrel=_EPS)
    mid = min(hi, _TAIL_START)
    if mid > max(lo, 1.0):
        total += integrate_log(f, max(lo, 1.0), mid, epsrel=_EPS)
    if hi > _TAIL_START:
        start = max(lo, _TAIL_START)
        total += _c1_tail(beta, start) - (_c1_tail(beta, hi) if math.isfinite(hi) else 0.0)
    return total


# --- range checks -----------------------------------------------------------

def _need_beta(beta, lo, hi, what, exclude_one=False):
    if beta is None or not lo < beta < hi or (exclude_one and beta == 1.0):
        raise DomainError(f"{what} requires {lo} < beta < {hi}"
                          + (", beta != 1" if exclude_one else "") + f"; got {beta}")


def _lrd(beta, what):
    _need_beta(beta, 0.5, 1.0, what)


def _nd(beta, what):
    _need_beta(beta, 1.0, 1.5, what)


def _both(beta, what):
    _need_beta(beta, 0.5, 1.5, what, exclude_one=True)


# --- the constants ----------------------------------------------------------

def _c1(beta, z, c, t, method):
    _both(beta, "C1")
    return _c1_piece(beta, 0.0, math.inf)


def _c2(beta, z, c, t, method):
    _lrd(beta, "C2")
    return 1.0 / ((1.0 - beta) ** 2 * (3.0 - 2.0 * beta)) + _c1(beta, z, c, t, method)


def _c3(beta, z, c, t, method):
    _nd(beta, "C3")
    return _c15(beta, z, c, t, method) + _c1(beta, z, c, t, method)


def _c4(beta, z, c, t, method):
    _both(beta, "C4")
    if z <= 1.0:
        return 0.0
    return _c1_piece(beta, 0.0, z - 1.0)


def _c5(beta, z, c, t, method):
    _both(beta, "C5")
    if z < 1.0:
        raise DomainError("C5 is defined for t <= c only")
    f = _window_integrand(beta, z)
    lo = z - 1.0
    if method == "closed":
        e = 1.0 - beta
        val = (z ** (2 * e) - 2 * z**e * (z ** (2 - beta) - lo ** (2 - beta)) / (2 - beta)
               + (z ** (3 - 2 * beta) - lo ** (3 - 2 * beta)) / (3 - 2 * beta))
        return val / e**2
    return integrate(f, lo, z, left_power=(2.0 - 2.0 * beta) if lo == 0.0 else None,
                     right_power=2.0, epsrel=_EPS)


def _c6(beta, z, c, t, method):
    _lrd(beta, "C6")
    if method == "quad":
        e = 1.0 - beta
        # outer variable v = 1 - y: (int_0^v x**-beta dx)**2
        return integrate(lambda v: v ** (2 * e) / e**2, 0.0, 1.0, epsrel=_EPS)
    return 1.0 / ((1.0 - beta) ** 2 * (3.0 - 2.0 * beta))


def _c7(beta, z, c, t, method):
    _lrd(beta, "C7")
    return _c4(beta, z, c, t, method) + _c5(beta, z, c, t, method) + _c6(beta, z, c, t, method)


def _c8(beta, z, c, t, method):
    _lrd(beta, "C8")
    if z > 1.0:
        raise DomainError("C8 is defined for t >= c only")
    if method == "quad":
        inner = z ** (1.0 - beta) / (1.0 - beta)
        return integrate(lambda y: inner**2, 0.0, 1.0 - z, epsrel=_EPS)
    return (1.0 - z) * z ** (2.0 - 2.0 * beta) / (1.0 - beta) ** 2


def _c9(beta, z, c, t, method):
    _lrd(beta, "C9")
    if z > 1.0:
        raise DomainError("C9 is defined for t >= c only")
    e = 1.0 - beta
    if method == "quad":
        return integrate(lambda v: v ** (2 * e) / e**2, 0.0, z, epsrel=_EPS)
    return z ** (3.0 - 2.0 * beta) / (e**2 * (3.0 - 2.0 * beta))


def _c10(beta, z, c, t, method):
    _both(beta, "C10")
    if method == "closed":
        e = 1.0 - beta
        return z ** (3.0 - 2.0 * beta) * (1.0 - 2.0 / (2.0 - beta) + 1.0 / (3.0 - 2.0 * beta)) / e**2
    return integrate(_window_integrand(beta, z), 0.0, z, left_power=2.0 - 2.0 * beta,
                     right_power=2.0, epsrel=_EPS)


def _c11(beta, z, c, t, method):
    _lrd(beta, "C11")
    return _c8(beta, z, c, t, method) + _c9(beta, z, c, t, method) + _c10(beta, z, c, t, method)


def _c12(beta, z, c, t, method):
    _lrd(beta, "C12")
    return _c7(beta, z, c, t, method) if t <= c else _c11(beta, z, c, t, method)


def _c13(beta, z, c, t, method):
    _lrd(beta, "C13")
    if t == 1.0:
        return 1.0
    return _c12(beta, z, c, t, method) / limit_constant(12, 1.0, beta, c, method)


def _c14(beta, z, c, t, method):
    _nd(beta, "C14")
    return _c4(beta, z, c, t, method) + _c5(beta, z, c, t, method) + _c15(beta, z, c, t, method)


def _c15(beta, z, c, t, method):
    _nd(beta, "C15")
    if method == "quad":
        e = beta - 1.0
        # outer variable v = 1 - y: (int_v^inf x**-beta dx)**2 = v**(2-2beta) / (beta-1)**2
        return integrate(lambda v: v ** (-2 * e) / e**2, 0.0, 1.0,
                         left_power=-2 * e, epsrel=_EPS)
    return 1.0 / ((beta - 1.0) ** 2 * (3.0 - 2.0 * beta))


def _c16(beta, z, c, t, method):
    _nd(beta, "C16")
    return _c10(beta, z, c, t, method) + _c17(beta, z, c, t, method) + _c18(beta, z, c, t, method)


def _c17(beta, z, c, t, method):
    _nd(beta, "C17")
    if z > 1.0:
        raise DomainError("C17 is defined for t >= c only")
    e = beta - 1.0
    if method == "quad":
        return integrate(lambda v: v ** (-2 * e) / e**2, 0.0, z,
                         left_power=-2 * e, epsrel=_EPS)
    return z ** (3.0 - 2.0 * beta) / (e**2 * (3.0 - 2.0 * beta))


def _c18(beta, z, c, t, method):
    _nd(beta, "C18")
    if z > 1.0:
        raise DomainError("C18 is defined for t >= c only")
    if method == "quad":
        inner = z ** (1.0 - beta) / (beta - 1.0)
        return integrate(lambda y: inner**2, 0.0, 1.0 - z, epsrel=_EPS)
    return (1.0 - z) * z ** (2.0 - 2.0 * beta) / (beta - 1.0) ** 2


def _c19(beta, z, c, t, method):
    _nd(beta, "C19")
    return _c14(beta, z, c, t, method) if t <= c else _c16(beta, z, c, t, method)


def _c20(beta, z, c, t, method):
    _nd(beta, "C20")
    if t == 1.0:
        return 1.0
    return _c19(beta, z, c, t, method) / limit_constant(19, 1.0, beta, c, method)


def _c21(beta, z, c, t, method):
    return c * c - c**3 / 3.0 if c <= 1.0 else c - 1.0 / 3.0


def _c22(beta, z, c, t, method):
    if t > c:
        raise DomainError("C22 is defined for t <= c only")
    return c * (1.0 - t / (3.0 * c)) / _c21(beta, z, c, t, method)


def _c23(beta, z, c, t, method):
    if t <= c:
        raise DomainError("C23 is defined for t > c only")
    return c * c * (1.0 - c / (3.0 * t)) / _c21(beta, z, c, t, method)


_CONSTANTS = {
    1: _c1, 2: _c2, 3: _c3, 4: _c4, 5: _c5, 6: _c6, 7: _c7, 8: _c8, 9: _c9,
    10: _c10, 11: _c11, 12: _c12, 13: _c13, 14: _c14, 15: _c15, 16: _c16,
    17: _c17, 18: _c18, 19: _c19, 20: _c20, 21: _c21, 22: _c22, 23: _c23,
}

# constants that admit both an explicit formula and a quadrature route
CLOSED_FORM = frozenset({5, 6, 8, 9, 10, 15, 17, 18})


@lru_cache(maxsize=4096)
def _constant_cached(cid, t, beta, c, method):
    return float(_CONSTANTS[cid](beta, c / t, c, t, method))


def limit_constant(cid: int, t: float = 1.0, beta: float | None = None, c: float = 1.0,
                   method: str = "auto") -> float:
    """Constant C_cid at (t, beta, c).

    ``method`` selects the closed form ("closed") or the quadrature of the
    defining integral ("quad") where both exist; "auto" takes closed forms
    for C6, C8, C9, C10, C15, C17, C18 and quadrature for C5.
    """
    if cid not in _CONSTANTS:
        raise DomainError(f"constant id must be in 1..23, got {cid}")
    if not t > 0 or not c > 0:
        raise DomainError("t and c must be positive")
    if method not in ("auto", "closed", "quad"):
        raise ConfigurationError(f"unknown method {method!r}")
    if method == "auto":
        method = "quad" if cid == 5 else "closed"
    return _constant_cached(int(cid), float(t), None if beta is None else float(beta),
                            float(c), method)


# --- limit laws -------------------------------------------------------------

def _validate_case(case, beta):
    _, dependence = case_parts(case)
    check_beta(dependence, beta)


def hurst(case: int, beta: float = 0.0):
    """Hurst exponent of the limit; ``PIECEWISE`` for case 12."""
    _validate_case(case, beta)
    if case in (1, 2, 3, 5, 8, 10):
        return 0.5
    if case in (4, 6, 7, 9):
        return 1.5 - beta
    if case == 11:
        return 1.0
    return PIECEWISE


def w_function(case: int, beta: float = 0.0, gamma1: float | None = None,
               c: float = 1.0) -> Callable[[float], float]:
    """Variance function W(t) of the limit process (with W(0) = 0)."""
    _validate_case(case, beta)
    if not c > 0:
        raise DomainError("c must be positive")
    h = 1.5 - beta

    def W(t):
        t = float(t)
        if t < 0:
            raise DomainError("t must be nonnegative")
        if t == 0.0:
            return 0.0
        if case in (1, 2, 3, 5, 8, 10):
            return t
        if case in (4, 6):
            return t ** (2 * h)
        if case == 7:
            return t ** (2 * h) * limit_constant(13, t, beta, c)
        if case == 9:
            return t ** (2 * h) * limit_constant(20, t, beta, c)
        if case == 11:
            return t * t
        if t <= c:
            return t * t * limit_constant(22, t, None, c)
        return t * limit_constant(23, t, None, c)

    return W


def normalizer_sq(case: int, beta: float = 0.0, gamma1: float | None = None, c: float = 1.0,
                  filter_sum: float | None = None, n: int = 1) -> float:
    """A_n**2 for case ``case`` (unit-variance innovations)."""
    _validate_case(case, beta)
    n = float(n)
    if case in (2, 5, 8):
        if filter_sum is None:
            raise ConfigurationError(f"case {case} needs the filter sum")
        return filter_sum**2 * n
    if case in (1, 3, 10, 11) and gamma1 is None:
        raise ConfigurationError(f"case {case} needs gamma1")
    if case in (1, 3):
        return (1.0 - beta) ** -2 * n ** (1.0 + 2.0 * gamma1 * (1.0 - beta))
    if case == 4:
        return limit_constant(2, 1.0, beta) * n ** (3.0 - 2.0 * beta)
    if case == 6:
        return limit_constant(3, 1.0, beta) * n ** (3.0 - 2.0 * beta)
    if case == 7:
        return limit_constant(12, 1.0, beta, c) * n ** (3.0 - 2.0 * beta)
    if case == 9:
        return limit_constant(19, 1.0, beta, c) * n ** (3.0 - 2.0 * beta)
    if case == 10:
        return n ** (2.0 * gamma1 + 1.0)
    if case == 11:
        return n ** (2.0 + gamma1)
    return limit_constant(21, 1.0, None, c) * n**3


def kernel_from_w(W):
    def K(s, t):
        return 0.5 * (W(s) + W(t) - W(abs(t - s)))
    return K


@dataclass(frozen=True)
class LimitLaw:
    """Gaussian limit of the normalized partial-sum process in case ``case``."""

    case: int
    beta: float
    gamma1: float | None
    c: float

    @property
    def H(self):
        return hurst(self.case, self.beta)

    @property
    def W(self):
        return w_function(self.case, self.beta, self.gamma1, self.c)

    @property
    def filter_spec(self) -> FilterSpec:
        return FilterSpec.for_case(self.case, self.beta, self.gamma1, self.c)

    def A2(self, n: int) -> float:
        fs = None
        if self.case in (2, 5, 8):
            fs = _filter_sum(self.filter_spec)
        return normalizer_sq(self.case, self.beta, self.gamma1, self.c, fs, n)

    def cov(self, s: float, t: float) -> float:
        return kernel_from_w(self.W)(s, t)

    def sample(self, grid, rng, size=1):
        from .gaussian_limits import sample_gaussian
        return sample_gaussian(grid, self.cov, rng, size=size)


def limit_law(case: int, beta: float = 0.0, gamma1: float | None = None, c: float = 1.0) -> LimitLaw:
    _validate_case(case, beta)
    regime, _ = case_parts(case)
    if gamma1 is None:
        gamma1 = {"strong": 0.5, "weak": 1.5, "moderate": 1.0}[regime]
    return LimitLaw(case, float(beta), gamma1, float(c) if regime == "moderate" else 1.0)


def covariance_kernel(law: LimitLaw):
    """(s, t) -> (W(s) + W(t) - W(|t - s|)) / 2."""
    return kernel_from_w(law.W)


# --- diagnostics --------------------------------------------------------------

def i_series(z: float, beta: float, method: str = "auto") -> float:
    """I(z) = int_0^{z-1} (y (1 + y))**(1-beta) dy, by its hypergeometric series or quadrature."""
    if not z > 1:
        raise DomainError(f"z must exceed 1, got {z}")
    x = z - 1.0
    if method == "auto":
        method = "series" if z < 2 else "quad"
    if method == "quad":
        e = 1.0 - beta
        return integrate(lambda y: (y * (1.0 + y)) ** e, 0.0, x,
                         left_power=e if e < 0 else None, epsrel=_EPS)
    if method != "series":
        raise ConfigurationError(f"unknown method {method!r}")
    if x >= 1.0:
        raise DomainError("the series converges for z < 2 only")
    total = 0.0
    coef = 1.0  # (beta-1)_k (-x)^k / k!
    for k in range(1_000_000):
        term = coef / (2.0 - beta + k)
        total += term
        if abs(term) <= 1e-17 * abs(total) or term == 0.0:
            break
        coef *= (beta - 1.0 + k) * (-x) / (k + 1.0)
    else:
        raise NumericalError("I(z) series did not converge", {"z": z, "beta": beta})
    return x ** (2.0 - beta) * total


def scaling_probe(W, t0: float, factor: float = 2.0) -> float:
    """Local log-log slope log(W(f t0) / W(t0)) / log f."""
    if not factor > 1:
        raise DomainError("factor must exceed 1")
    a, b = W(t0), W(t0 * factor)
    if not (a > 0 and b > 0):
        raise DomainError("W must be positive at both probe points")
    return math.log(b / a) / math.log(factor)


def c4_residual_bound(beta: float, z: float) -> float:
    return 3.0 * (z - 1.0) ** (1.0 - 2.0 * beta) / (2.0 * beta - 1.0)


def c4_limit_check(beta: float, z_grid) -> np.ndarray:
    """|C4(z) - C1| along ``z_grid`` (t = 1, c = z)."""
    z = np.asarray(z_grid, dtype=np.float64)
    if np.any(z <= 1) or np.any(np.diff(z) <= 0):
        raise DomainError("z_grid must be increasing and > 1")
    c1 = limit_constant(1, 1.0, beta)
    return np.array([abs(limit_constant(4, 1.0, beta, float(zz)) - c1) for zz in z])


__all__ = [
    "PIECEWISE", "CLOSED_FORM", "limit_constant", "hurst", "w_function", "normalizer_sq",
    "LimitLaw", "limit_law", "covariance_kernel", "kernel_from_w", "i_series",
    "scaling_probe", "c4_limit_check", "c4_residual_bound",
]
