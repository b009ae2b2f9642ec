import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import taperflow.coefficients as coef
from taperflow import (FilterSpec, build_filter, d_coefficients, delta_for_case, exact_variance,
                       joint_weights, lyapunov_fraction, max_window_sums, v1_v2)
from taperflow.errors import DegenerateError, DomainError, EmptyWindowError


def brute_force(a, n, t):
    """{j: d_j} by expanding S = sum_{k=1}^{[nt]} sum_i a_i xi_{k-i}."""
    m = math.floor(n * t + 1e-9)
    d = {}
    for k in range(1, m + 1):
        for i, ai in enumerate(a):
            d[k - i] = d.get(k - i, 0.0) + ai
    return d


def test_two_tap_example():
    prof = d_coefficients(np.array([1.0, 1.0]), 2, 1.0)
    assert list(prof.index) == [0, 1, 2]
    np.testing.assert_array_equal(prof.values, [1, 2, 1])
    assert exact_variance(prof) == 6.0
    assert v1_v2(prof) == (1.0, 5.0)
    assert max_window_sums(np.array([1.0, 1.0]), 2, 1.0) == (1.0, 2.0)


def test_iid_reduction():
    prof = d_coefficients(np.array([1.0]), 100, 1.0)
    np.testing.assert_array_equal(prof.values, np.ones(100))
    assert exact_variance(prof, 2.0) == 200.0
    assert v1_v2(prof)[0] == 0.0
    assert max_window_sums(np.array([1.0]), 7, 1.0) == (0.0, 1.0)
    assert exact_variance(prof, 0.0) == 0.0


def test_flat_example():
    prof = d_coefficients(np.ones(3), 4, 1.0)
    assert list(prof.index) == [-1, 0, 1, 2, 3, 4]
    np.testing.assert_array_equal(prof.values, [1, 2, 3, 3, 2, 1])
    assert prof.total() == 28.0
    assert prof.v1_v2() == (5.0, 23.0)


@settings(max_examples=150, deadline=None)
@given(lam=st.integers(0, 16), n=st.integers(1, 64), k=st.integers(1, 128),
       seed=st.integers(0, 2**32 - 1))
def test_against_brute_force(lam, n, k, seed):
    a = np.random.default_rng(seed).normal(size=lam + 1)
    t = k / n
    ref = brute_force(a, n, t)
    prof = d_coefficients(a, n, t)
    got = dict(zip(prof.index.tolist(), prof.values.tolist()))
    assert set(got) == set(ref)
    for j, v in ref.items():
        assert got[j] == pytest.approx(v, rel=1e-12, abs=1e-12)
    total = math.fsum(v * v for v in ref.values())
    assert exact_variance(prof) == pytest.approx(total, rel=1e-12)
    i1, i2 = max_window_sums(a, n, t)
    assert max(i1, i2) == pytest.approx(max(abs(v) for v in ref.values()), rel=1e-14)


def test_empty_window():
    with pytest.raises(EmptyWindowError):
        d_coefficients(np.ones(3), 10, 0.05)
    with pytest.raises(DomainError):
        d_coefficients(np.ones(3), 10, -1.0)


def test_joint_weights_covariance():
    a = np.random.default_rng(1).normal(size=8)
    jw = joint_weights(a, 10, [0.5, 1.0, 1.7])
    cov = jw.covariance()
    for r, t in enumerate([0.5, 1.0, 1.7]):
        assert cov[r, r] == pytest.approx(d_coefficients(a, 10, t).total(), rel=1e-13)
    # Cov(S(s), S(t)) = sum_j d_j(s) d_j(t) by brute force
    ds, dt = brute_force(a, 10, 0.5), brute_force(a, 10, 1.7)
    ref = math.fsum(v * dt.get(j, 0.0) for j, v in ds.items())
    assert cov[0, 2] == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("beta,dep", [(0.75, "LRD"), (1.25, "ND"), (2.0, "SRD"), (0.0, "flat")])
def test_split_layout_agrees_with_exact(monkeypatch, beta, dep):
    n = 2000
    filt = build_filter(FilterSpec(beta, dep, 1.5), n)  # lam ~ 89k
    exact = d_coefficients(filt, n, 1.0)
    monkeypatch.setattr(coef, "EXACT_CAP", 5000)
    split = d_coefficients(filt, n, 1.0, head=4000)
    assert exact.is_complete and not split.is_complete
    assert split.total() == pytest.approx(exact.total(), rel=1e-11)
    assert split.power_sum(3) == pytest.approx(exact.power_sum(3), rel=1e-10)
    for x, y in zip(split.v1_v2(), exact.v1_v2()):
        assert x == pytest.approx(y, rel=1e-11)
    assert split.max_abs() == pytest.approx(exact.max_abs(), rel=1e-14)


def test_split_joint_covariance(monkeypatch):
    n = 1000
    filt = build_filter(FilterSpec(0.75, "LRD", 1.5), n)
    exact = joint_weights(filt, n, [0.5, 1.0]).covariance()
    monkeypatch.setattr(coef, "EXACT_CAP", 5000)
    split = joint_weights(filt, n, [0.5, 1.0], head=3000).covariance()
    np.testing.assert_allclose(split, exact, rtol=1e-11)


def test_lyapunov_iid_closed_form():
    n = 400
    prof = d_coefficients(np.array([1.0]), n, 1.0)
    rho = 2 * math.sqrt(2 / math.pi)
    assert lyapunov_fraction(prof, prof, 1.0, rho) == pytest.approx(rho / math.sqrt(n), rel=1e-14)
    assert lyapunov_fraction(prof, prof, 1.0, 0.0) == 0.0


def test_lyapunov_degenerate():
    prof = d_coefficients(np.array([0.0]), 5, 1.0)
    with pytest.raises(DegenerateError):
        lyapunov_fraction(prof, prof, 1.0, 1.0)


@pytest.mark.parametrize("case,beta,want", [(3, 1.25, 1.0), (6, 1.4, 0.25), (1, 0.75, 1.0),
                                            (9, 1.45, 0.1 / 0.9)])
def test_delta_for_case(case, beta, want):
    assert delta_for_case(case, beta) == pytest.approx(want, rel=1e-15)
