import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from taperflow._numerics import (em_sum, integrate, integrate_log, power_tail_sum,
                                 power_window_sum, riemann_zeta, window_length)


@pytest.mark.parametrize("beta", [1.05, 1.25, 1.5, 2.0, 3.0])
def test_riemann_zeta_against_mpmath(beta):
    assert riemann_zeta(beta) == pytest.approx(float(mpmath.zeta(beta)), rel=1e-13)


@pytest.mark.parametrize("beta,start", [(1.25, 10), (0.0 + 2.0, 1000), (1.1, 12345)])
def test_power_tail_sum(beta, start):
    ref = float(mpmath.zeta(beta, start))
    assert power_tail_sum(beta, start) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(0.55, 1.45), u=st.integers(1000, 10**6), m=st.integers(1, 3000))
def test_power_window_sum_closed_form(beta, u, m):
    ref = math.fsum(i**-beta for i in range(u + 1, u + m + 1))
    assert float(power_window_sum(beta, u, m)) == pytest.approx(ref, rel=1e-13)


def test_em_sum_matches_direct():
    g = lambda x: (x + 3.0) ** -0.8 - x**-0.8  # noqa: E731
    ref = math.fsum(float(g(np.float64(i))) for i in range(500, 200001))
    assert em_sum(g, 500, 200000) == pytest.approx(ref, rel=1e-10)


def test_integrate_endpoint_singularities():
    # int_0^1 x^-0.7 (1-x)^-0.4 dx = B(0.3, 0.6)
    ref = float(mpmath.beta(0.3, 0.6))
    got = integrate(lambda x: x**-0.7 * (1 - x) ** -0.4, 0.0, 1.0, left_power=-0.7, right_power=-0.4)
    assert got == pytest.approx(ref, rel=1e-11)


def test_integrate_log_infinite_range():
    assert integrate_log(lambda x: x**-1.5, 1.0) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("n,t,m", [(10, 0.5, 5), (3, 1 / 3, 1), (10, 0.3, 3), (7, 0.1, 0),
                                   (100, 0.07, 7)])
def test_window_length_snaps_rounding(n, t, m):
    assert window_length(n, t) == m
