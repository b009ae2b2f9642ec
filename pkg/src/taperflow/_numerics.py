"""Numerical building blocks: floor windows, quadrature wrappers, Euler-Maclaurin sums.

Quadrature is delegated to QUADPACK (``scipy.integrate.quad``); the wrappers
here remove endpoint power singularities by substitution and turn a missed
accuracy target into a :class:`~taperflow.errors.NumericalError` instead of a
silent warning.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate as _integrate

from .errors import DomainError, NumericalError

# Bernoulli numbers B_2, B_4, ..., B_12
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)

DEFAULT_EPSREL = 1e-12


def window_length(n, t):
    """Return floor(n*t), snapping products that are integers up to rounding.

    ``100 * 0.29`` evaluates to 28.999999999999996 in binary floating point;
    the intended window there is 29.
    """
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    x = n * t
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return int(math.floor(x))


def _quad(f, a, b, epsabs, epsrel, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        val, err, info = _integrate.quad(
            f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1
        )[:3]
    target = max(epsabs, epsrel * abs(val))
    # QUADPACK's error estimate is pessimistic; accept up to 1e3 x the request.
    if not math.isfinite(val) or err > 1e3 * target + 1e-300:
        raise NumericalError(
            "adaptive quadrature missed its tolerance",
            {"interval": (a, b), "value": val, "error_estimate": err, "target": target},
        )
    return val


def integrate(f, a, b, *, left_power=None, right_power=None,
              epsabs=0.0, epsrel=DEFAULT_EPSREL, limit=400):
    """Integrate ``f`` over a finite ``[a, b]``.

    ``left_power``/``right_power`` announce integrable endpoint behaviour
    ``|y - endpoint|**p`` (p > -1). Such endpoints are removed by the
    substitution ``y = a + (b - a) s**k`` with ``k = 1/(1 + p)``, which makes
    the leading term of the transformed integrand constant.
    """
    if b < a:
        return -integrate(f, b, a, left_power=right_power, right_power=left_power,
                          epsabs=epsabs, epsrel=epsrel, limit=limit)
    if b == a:
        return 0.0
    if left_power is not None and right_power is not None:
        mid = 0.5 * (a + b)
        return (integrate(f, a, mid, left_power=left_power, epsabs=epsabs / 2,
                          epsrel=epsrel, limit=limit)
                + integrate(f, mid, b, right_power=right_power, epsabs=epsabs / 2,
                            epsrel=epsrel, limit=limit))
    width = b - a
    if left_power is not None and left_power < 0:
        k = 1.0 / (1.0 + left_power)

        def g(s):
            y = a + width * s**k
            # s**k can underflow onto the singular endpoint; that point has measure zero
            return f(y) * width * k * s ** (k - 1.0) if y != a else 0.0

        return _quad(g, 0.0, 1.0, epsabs, epsrel, limit)
    if right_power is not None and right_power < 0:
        k = 1.0 / (1.0 + right_power)

        def g(s):
            y = b - width * s**k
            return f(y) * width * k * s ** (k - 1.0) if y != b else 0.0

        return _quad(g, 0.0, 1.0, epsabs, epsrel, limit)
    return _quad(f, a, b, epsabs, epsrel, limit)


def integrate_log(f, a, b=math.inf, *, epsabs=0.0, epsrel=DEFAULT_EPSREL, limit=400):
    """Integrate ``f`` over ``[a, b]`` (``0 < a``, ``b`` may be infinite) in ``log y``.

    Suited to integrands with power-law decay spanning many decades.
    """
    if a <= 0:
        raise DomainError("integrate_log needs a positive lower limit")
    if b <= a:
        return 0.0
    lo = math.log(a)
    hi = math.log(b) if math.isfinite(b) else math.inf

    def g(s):
        if s > 709.0:
            return 0.0
        y = math.exp(s)
        return f(y) * y

    return _quad(g, lo, hi, epsabs, epsrel, limit)


def rising(x, k):
    """Pochhammer symbol (x)_k = x (x+1) ... (x+k-1)."""
    out = 1.0
    for i in range(k):
        out *= x + i
    return out


def _em_tail(beta, start):
    """Euler-Maclaurin value of sum_{i >= start} i**-beta (start large)."""
    s = float(start)
    if beta == 1.0:
        raise DomainError("the harmonic tail diverges")
    total = s ** (1.0 - beta) / (beta - 1.0) + 0.5 * s**-beta
    for k, b2k in enumerate(_BERNOULLI, start=1):
        total += b2k / math.factorial(2 * k) * rising(beta, 2 * k - 1) * s ** (-beta - 2 * k + 1)
    return total


@lru_cache(maxsize=256)
def power_tail_sum(beta, start, direct_terms=10**6):
    """Return sum_{i >= start} i**-beta for beta > 1 and integer start >= 1.

    The first ``direct_terms`` terms are summed explicitly (pairwise, smallest
    first) and the remainder is closed by an Euler-Maclaurin expansion.
    """
    if start < 1:
        raise DomainError("start must be >= 1")
    if beta <= 1.0:
        raise DomainError(f"tail sum diverges for beta={beta} <= 1")
    idx = np.arange(start + direct_terms - 1, start - 1, -1, dtype=np.float64)
    head = float(np.sum(idx**-beta))
    return head + _em_tail(beta, start + direct_terms)


@lru_cache(maxsize=64)
def riemann_zeta(beta, direct_terms=10**6):
    """Riemann zeta for real beta != 1 (analytic continuation below 1).

    Same construction as :func:`power_tail_sum` with ``start=1``; the
    Euler-Maclaurin remainder continues analytically for beta < 1.
    """
    if beta == 1.0:
        raise DomainError("zeta has a pole at 1")
    idx = np.arange(direct_terms - 1, 0, -1, dtype=np.float64)
    head = float(np.sum(idx**-beta))
    return head + _em_tail(beta, direct_terms)


def power_integral(beta, a, b):
    """Return int_a^b x**-beta dx for 0 < a <= b, stable when b/a is close to 1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    r = np.log1p((b - a) / a)
    if beta == 1.0:
        return r
    e = 1.0 - beta
    return a**e * np.expm1(e * r) / e


def power_window_sum(beta, u, m):
    """Closed-form sum_{i=u+1}^{u+m} i**-beta (Euler-Maclaurin, exact to rounding for u >~ 1e3).

    ``u`` may be a float array; the expression is smooth in ``u`` so it can be
    fed to quadrature and finite differences.
    """
    u = np.asarray(u, dtype=np.float64)
    if beta == 0.0:
        return np.full_like(u, float(m))
    a = u + 1.0
    b = u + float(m)
    f = lambda x: x**-beta  # noqa: E731
    d1 = lambda x: -beta * x ** (-beta - 1.0)  # noqa: E731
    d3 = lambda x: -rising(beta, 3) * x ** (-beta - 3.0)  # noqa: E731
    d5 = lambda x: -rising(beta, 5) * x ** (-beta - 5.0)  # noqa: E731
    return (power_integral(beta, a, b) + 0.5 * (f(a) + f(b))
            + (d1(b) - d1(a)) / 12.0 - (d3(b) - d3(a)) / 720.0
            + (d5(b) - d5(a)) / 30240.0)


def em_sum(g, lo, hi, *, epsrel=1e-13):
    """Sum a smooth, slowly varying ``g`` over the integers lo..hi (inclusive).

    Uses Euler-Maclaurin to second order with a log-scale integral and a
    finite-difference derivative; short ranges are summed directly.
    """
    if hi < lo:
        return 0.0
    if hi - lo < 256:
        return float(np.sum(g(np.arange(lo, hi + 1, dtype=np.float64))))
    integral = integrate_log(lambda y: float(g(np.array(y))), float(lo), float(hi),
                             epsrel=epsrel)

    def deriv(x):
        h = 1e-4 * x
        return float((g(np.array(x + h)) - g(np.array(x - h))) / (2 * h))

    ends = float(g(np.array(float(lo)))) + float(g(np.array(float(hi))))
    return integral + 0.5 * ends + (deriv(float(hi)) - deriv(float(lo))) / 12.0
