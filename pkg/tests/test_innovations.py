import math

import numpy as np
import pytest
from scipy import integrate, stats

from taperflow import (InnovationModel, ParetoSpec, TaperedParetoSpec, centered_abs_moment,
                       moment_ratio, moment_zeta, pareto_cdf, sample_tapered_pareto,
                       tapered_pareto_cdf, tapered_pareto_density)
from taperflow.errors import DomainError


@pytest.mark.parametrize("alpha,x,want", [(1.0, 2.0, 0.5), (2.0, 1.0, 0.0), (0.5, 16.0, 0.75)])
def test_pareto_cdf(alpha, x, want):
    assert pareto_cdf(ParetoSpec(alpha), x) == pytest.approx(want, abs=1e-15)


def test_pareto_cdf_rejects_below_support():
    with pytest.raises(DomainError):
        pareto_cdf(ParetoSpec(1.0), 0.5)


def test_density_branches():
    spec = TaperedParetoSpec(2.0, 2.0)
    assert tapered_pareto_density(spec, 1.5) == pytest.approx(2 * 1.5**-3, rel=1e-14)
    assert tapered_pareto_density(spec, 2.0) == pytest.approx(0.25, rel=1e-14)
    # the density at b is the derivative of the cdf from the right
    h = 1e-6
    fd = (tapered_pareto_cdf(spec, 2.0 + h) - tapered_pareto_cdf(spec, 2.0)) / h
    assert fd == pytest.approx(0.25, rel=1e-5)


@pytest.mark.parametrize("alpha,b", [(2.0, 2.0), (1.5, 10.0), (0.7, 50.0), (1.2, 1.0)])
def test_density_normalized(alpha, b):
    spec = TaperedParetoSpec(alpha, b)
    f = lambda x: float(tapered_pareto_density(spec, x))  # noqa: E731
    body = integrate.quad(f, 1, b, epsabs=0, epsrel=1e-13)[0] if b > 1 else 0.0
    tail = integrate.quad(f, b, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert body + tail == pytest.approx(1.0, abs=1e-10)


def test_taper_at_support_edge_is_shifted_exponential():
    rng = np.random.default_rng(11)
    x = sample_tapered_pareto(TaperedParetoSpec(1.3, 1.0), rng, 20000)
    assert stats.kstest(x - 1.0, "expon").pvalue > 1e-3
    assert abs(x.mean() - 2.0) < 4 / math.sqrt(x.size)


def test_large_b_matches_plain_pareto_moments():
    rng = np.random.default_rng(12)
    x = sample_tapered_pareto(TaperedParetoSpec(2.0, 1e6), rng, 200000)
    for r in (0.5, 1.0):
        est = np.mean(x**r)
        se = np.std(x**r) / math.sqrt(x.size)
        assert abs(est - 2.0 / (2.0 - r)) < 4 * se


def test_sampler_matches_cdf():
    spec = TaperedParetoSpec(1.5, 5.0)
    x = sample_tapered_pareto(spec, np.random.default_rng(13), 20000)
    assert stats.kstest(x, lambda v: tapered_pareto_cdf(spec, v)).pvalue > 1e-3


def test_sampler_is_deterministic():
    spec = TaperedParetoSpec(1.5, 5.0)
    a = sample_tapered_pareto(spec, np.random.default_rng(3), 100)
    b = sample_tapered_pareto(spec, np.random.default_rng(3), 100)
    assert np.array_equal(a, b)


def test_moment_zeta_examples():
    assert moment_zeta(TaperedParetoSpec(2.0, 2.0), 1.0) == pytest.approx(1.75, rel=1e-13)
    assert moment_zeta(TaperedParetoSpec(2.0, 1.0), 1.0) == pytest.approx(2.0, rel=1e-13)
    assert moment_zeta(TaperedParetoSpec(2.0, 2.0), 2.0) == pytest.approx(2 * math.log(2) + 2.5,
                                                                         rel=1e-13)


@pytest.mark.parametrize("alpha,b,r", [(1.5, 7.0, 2.0), (1.2, 600.0, 3.0), (0.8, 3.0, 0.5)])
def test_moment_zeta_against_quadrature(alpha, b, r):
    spec = TaperedParetoSpec(alpha, b)
    f = lambda x: x**r * float(tapered_pareto_density(spec, x))  # noqa: E731
    ref = integrate.quad(f, 1, b, epsrel=1e-13)[0] + integrate.quad(f, b, np.inf, epsrel=1e-13)[0]
    assert moment_zeta(spec, r) == pytest.approx(ref, rel=1e-9)


def test_centered_abs_moment_examples():
    assert centered_abs_moment(TaperedParetoSpec(2.0, 2.0), 2.0) == pytest.approx(
        2 * math.log(2) + 2.5 - 1.75**2, rel=1e-12)
    assert centered_abs_moment(TaperedParetoSpec(2.0, 1.0), 2.0) == pytest.approx(1.0, rel=1e-12)


def test_centered_abs_moment_against_quadrature():
    spec = TaperedParetoSpec(1.5, 20.0)
    mu = moment_zeta(spec, 1.0)
    f = lambda x: abs(x - mu) ** 2.7 * float(tapered_pareto_density(spec, x))  # noqa: E731
    ref = sum(integrate.quad(f, lo, hi, epsrel=1e-12, limit=200)[0]
              for lo, hi in ((1, mu), (mu, 20.0), (20.0, np.inf)))
    assert centered_abs_moment(spec, 2.7) == pytest.approx(ref, rel=1e-8)


def test_variance_growth_includes_taper_mass():
    # E theta^2 ~ alpha b^(2-alpha)/(2-alpha) from the Pareto body plus b^(2-alpha)
    # from the mass b^-alpha sitting at ~b; the ratio to the body term alone is 2/alpha.
    alpha = 1.5
    ratios = [centered_abs_moment(TaperedParetoSpec(alpha, b), 2.0) / (alpha * b ** (2 - alpha) / (2 - alpha))
              for b in (1e4, 1e6, 1e8)]
    assert abs(ratios[-1] - 2 / alpha) < 2e-3
    assert abs(ratios[-1] - 2 / alpha) < abs(ratios[0] - 2 / alpha)


def test_moment_ratio_shifted_exponential():
    # E|Exp(1) - 1|^3 = 12/e - 2
    assert moment_ratio(TaperedParetoSpec(2.0, 1.0), 1.0) == pytest.approx(12 / math.e - 2, rel=1e-10)


def test_gaussian_moment_ratio():
    assert InnovationModel.gaussian().moment_ratio(1.0) == pytest.approx(2 * math.sqrt(2 / math.pi),
                                                                         rel=1e-15)


def test_moment_ratio_growth_rate():
    m = InnovationModel.tapered_pareto(1.2, 0.5)
    scaled = [m.moment_ratio(1.0, n) / n ** (0.5 * 1.2 / 2) for n in (10**2, 10**4, 10**6, 10**8)]
    assert all(x > y for x, y in zip(scaled, scaled[1:]))
    assert 0.3 < scaled[-1] < 0.6


def test_model_variance_and_centering():
    m = InnovationModel.tapered_pareto(1.5, 0.4)
    n = 1000
    x = m.sample(np.random.default_rng(5), 200000, n)
    assert abs(x.mean()) < 4 * math.sqrt(m.variance(n) / x.size)
    assert m.to_dict() == {"type": "tapered-pareto", "alpha": 1.5, "gamma": 0.4}


def test_standardized_custom_law():
    m = InnovationModel.standardized(stats.gamma(3.0))
    x = m.sample(np.random.default_rng(6), 100000)
    assert abs(x.mean()) < 0.02 and abs(x.var() - 1) < 0.03
    assert m.moment_ratio(1.0) == pytest.approx(float(stats.gamma(3.0).expect(
        lambda v: abs((v - 3) / math.sqrt(3)) ** 3)), rel=1e-8)


def test_invalid_specs():
    with pytest.raises(DomainError):
        TaperedParetoSpec(1.5, 0.5)
    with pytest.raises(DomainError):
        moment_ratio(TaperedParetoSpec(1.5, 3.0), 1.5)
