import math

import mpmath
import numpy as np
import pytest

from taperflow import (c4_limit_check, covariance_kernel, hurst, i_series, limit_constant,
                       limit_law, normalizer_sq, scaling_probe, w_function)
from taperflow.errors import DomainError
from taperflow.limit_theory import CLOSED_FORM, PIECEWISE, c4_residual_bound

mpmath.mp.dps = 40


def window(beta, y, lo, hi):
    """int_lo^hi (x + y)**-beta dx, exactly."""
    e = 1 - mpmath.mpf(beta)
    return ((hi + y) ** e - (lo + y) ** e) / e


def oracle(cid, beta, z):
    b = mpmath.mpf(beta)
    z = mpmath.mpf(z)
    if cid == 1:
        # plain tanh-sinh is unreliable on the y**(-2 beta) tail and on the y**(2 - 2 beta)
        # singularity; regularize the head with y = s**k and sum the tail as a series
        e = 1 - b
        k = 1 / (1 + 2 * e) if e < 0 else mpmath.mpf(1)
        f = lambda y: window(b, y, 0, 1) ** 2  # noqa: E731
        head = mpmath.quad(lambda s: f(s**k) * k * s ** (k - 1), [0, 0.5, 1])
        mid = mpmath.quad(lambda s: f(mpmath.exp(s)) * mpmath.exp(s),
                          mpmath.linspace(0, mpmath.log(100), 12))
        bk = [mpmath.binomial(e, j + 1) / e for j in range(80)]
        ck = [mpmath.fsum(bk[i] * bk[j - i] for i in range(j + 1)) for j in range(80)]
        Y = mpmath.mpf(100)
        tail = mpmath.fsum(ck[j] * Y ** (1 - 2 * b - j) / (2 * b - 1 + j) for j in range(80))
        return head + mid + tail
    if cid == 4:
        return mpmath.quad(lambda y: window(b, y, 0, 1) ** 2, [0, z - 1])
    if cid == 5:
        return mpmath.quad(lambda y: window(b, y, 0, z - y) ** 2, [z - 1, z])
    if cid == 10:
        return mpmath.quad(lambda y: window(b, y, 0, z - y) ** 2, [0, z])
    raise KeyError(cid)


@pytest.mark.parametrize("beta", [0.6, 0.75, 0.9, 1.1, 1.25, 1.4])
def test_c1_against_mpmath(beta):
    assert limit_constant(1, 1.0, beta) == pytest.approx(float(oracle(1, beta, 0)), rel=1e-12)


@pytest.mark.parametrize("cid", [4, 5, 10])
@pytest.mark.parametrize("beta,t,c", [(0.75, 1.0, 1.7), (0.75, 0.5, 3.0), (1.25, 1.0, 2.5),
                                      (1.25, 0.8, 1.0)])
def test_window_constants_against_mpmath(cid, beta, t, c):
    assert limit_constant(cid, t, beta, c) == pytest.approx(float(oracle(cid, beta, c / t)),
                                                            rel=1e-9, abs=1e-14)


def test_c6_example():
    assert limit_constant(6, 1.0, 0.75) == pytest.approx(1 / (0.25**2 * 1.5), rel=1e-15)


def test_c21_example():
    assert limit_constant(21, 1.0, None, 0.5) == pytest.approx(0.25 - 0.125 / 3, rel=1e-15)


@pytest.mark.parametrize("cid,beta,t,c", [(5, 0.75, 0.5, 1.0), (6, 0.8, 1, 1), (8, 0.7, 2.0, 1.0),
                                          (9, 0.7, 2.0, 1.0), (10, 0.75, 1.0, 0.6),
                                          (15, 1.3, 1, 1), (17, 1.2, 3.0, 1.0),
                                          (18, 1.2, 3.0, 1.0)])
def test_closed_forms_match_quadrature(cid, beta, t, c):
    assert cid in CLOSED_FORM
    q = limit_constant(cid, t, beta, c, method="quad")
    cf = limit_constant(cid, t, beta, c, method="closed")
    assert q == pytest.approx(cf, rel=1e-11)


@pytest.mark.parametrize("c", [0.3, 1.0, 4.0])
def test_normalized_constants_are_one_at_t1(c):
    assert limit_constant(13, 1.0, 0.75, c) == 1.0
    assert limit_constant(20, 1.0, 1.25, c) == 1.0


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_continuity_at_t_equals_c(c):
    assert limit_constant(7, c, 0.75, c) == pytest.approx(limit_constant(11, c, 0.75, c), abs=1e-12)
    assert limit_constant(14, c, 1.25, c) == pytest.approx(limit_constant(16, c, 1.25, c), abs=1e-12)


def test_unknown_constant():
    with pytest.raises(DomainError):
        limit_constant(24)


@pytest.mark.parametrize("case,beta,H", [(4, 0.75, 0.75), (2, 2.0, 0.5), (2, 3.0, 0.5),
                                         (6, 1.25, 0.25), (11, 0.0, 1.0)])
def test_hurst(case, beta, H):
    assert hurst(case, beta) == pytest.approx(H, abs=1e-15)


def test_hurst_piecewise_case():
    assert hurst(12) == PIECEWISE


def test_w_function_examples():
    W12 = w_function(12, c=0.5)
    C21 = 0.25 - 0.125 / 3
    small = 0.25 * 0.5 * (1 - 1 / 3) / C21  # t^2 C22 at t = c
    large = 0.5 * 0.25 * (1 - 1 / 3) / C21  # t C23 as t -> c+
    assert small == pytest.approx(0.4, rel=1e-14) and large == pytest.approx(0.4, rel=1e-14)
    assert W12(0.5) == pytest.approx(0.4, rel=1e-14)
    assert W12(0.5 + 1e-9) == pytest.approx(0.4, rel=1e-8)
    assert w_function(4, 0.75)(4.0) == pytest.approx(8.0, rel=1e-14)
    assert w_function(7, 0.75)(1.0) == 1.0
    assert w_function(2, 2.0)(0.0) == 0.0


def test_normalizer_examples():
    assert normalizer_sq(2, 2.0, filter_sum=3.0, n=50) == 450.0
    assert normalizer_sq(1, 0.75, 0.5, n=10**4) == pytest.approx(16e5, rel=1e-13)
    assert normalizer_sq(10, 0.0, 0.5, n=100) == pytest.approx(1e4, rel=1e-14)


@pytest.mark.parametrize("case,beta,c", [(1, 0.75, 1), (4, 0.75, 1), (7, 0.75, 0.5), (9, 1.25, 2.0),
                                         (12, 0.0, 0.5), (12, 0.0, 2.0)])
def test_kernel_diagonal(case, beta, c):
    law = limit_law(case, beta, c=c)
    K = covariance_kernel(law)
    for t in (0.3, 1.0, 2.5):
        assert K(t, t) == pytest.approx(law.W(t), rel=1e-14)


def test_kernel_special_forms():
    K2 = covariance_kernel(limit_law(2, 2.0))
    K11 = covariance_kernel(limit_law(11))
    for s, t in ((0.5, 1.0), (2.0, 0.7), (1.3, 1.3)):
        assert K2(s, t) == pytest.approx(min(s, t), rel=1e-14)
        assert K11(s, t) == pytest.approx(s * t, rel=1e-14)


def test_i_series():
    assert i_series(1.5, 1.0) == pytest.approx(0.5, rel=1e-15)
    assert i_series(1 + 1e-12, 0.75) < 1e-11
    ref = float(mpmath.quad(lambda y: (y * (1 + y)) ** 0.25, [0, 0.5]))
    assert i_series(1.5, 0.75, "series") == pytest.approx(ref, rel=1e-12)
    assert i_series(1.5, 0.75, "quad") == pytest.approx(ref, rel=1e-12)


def test_scaling_probe():
    assert scaling_probe(lambda t: t**1.4, 0.37) == pytest.approx(1.4, rel=1e-14)
    W = w_function(12, c=1.0)
    assert scaling_probe(W, 1e3) == pytest.approx(1.0, abs=1e-3)
    assert scaling_probe(W, 1e-3) == pytest.approx(2.0, abs=1e-3)


@pytest.mark.parametrize("beta", [0.75, 1.25])
def test_c4_limit(beta):
    z = [1e2, 1e3, 1e4]
    res = c4_limit_check(beta, z)
    assert all(a > b for a, b in zip(res, res[1:]))
    for zz, r in zip(z, res):
        assert r <= c4_residual_bound(beta, zz)
    if beta == 0.75:
        assert res[-1] <= 0.06
