import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ttvou.errors import (DegenerateVariability, MomentNotFinite, NonFinite, NonPositiveMean,
                          NonPositiveSample, ProbabilityOutOfRange, TooFewSamples, ValidationError,
                          ZeroVariance)
from ttvou.quantile_models import (BurrXII, Degenerate, Empirical, Interpolation, Lognormal,
                                   UniformTest, empirical_from_samples, fit_burr, fit_lognormal_mle,
                                   lognormal_from_moments, summary_stats, tail_integral_quad)

from conftest import standard_suite

SUITE = standard_suite()
PS = [0.05, 0.5, 0.8, 0.95, 0.999]


@pytest.mark.parametrize("name,model", SUITE, ids=[n for n, _ in SUITE])
@pytest.mark.parametrize("p", PS)
def test_closed_form_tail_matches_quadrature(name, model, p):
    if isinstance(model, Empirical):
        pytest.skip("piecewise quantile; checked against the trapezoid sum below")
    assert model.partial_expectation(p) == pytest.approx(tail_integral_quad(model, p), rel=1e-8)


def test_lognormal_tail_against_mpmath():
    m = Lognormal(1.3, 0.7)
    for p in PS:
        z0 = mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1)
        ref = mp.quad(lambda z: mp.e ** (1.3 + 0.7 * z) * mp.npdf(z), [z0, mp.inf])
        assert m.partial_expectation(p) == pytest.approx(float(ref), rel=1e-12)


def test_burr_tail_against_mpmath():
    m = BurrXII(3.0, 2.0, 10.0)
    for p in PS:
        ref = mp.quad(lambda q: 10 * ((1 - q) ** (-mp.mpf(1) / 2) - 1) ** (mp.mpf(1) / 3), [p, 1])
        assert m.partial_expectation(p) == pytest.approx(float(ref), rel=1e-9)


def test_burr_moments_match_scipy():
    m = BurrXII(3.0, 2.0, 10.0)
    ref = stats.burr12(3.0, 2.0, scale=10.0)
    assert m.mean == pytest.approx(ref.mean(), rel=1e-12)
    assert m.std == pytest.approx(ref.std(), rel=1e-10)
    assert m.cdf(12.0) == pytest.approx(ref.cdf(12.0), rel=1e-14)
    assert m.pdf(12.0) == pytest.approx(ref.pdf(12.0), rel=1e-12)
    assert m.quantile(0.9) == pytest.approx(ref.ppf(0.9), rel=1e-12)


def test_burr_needs_variance():
    with pytest.raises(MomentNotFinite):
        BurrXII(1.0, 1.5, 1.0)
    with pytest.raises(ValidationError):
        BurrXII(-1.0, 3.0, 1.0)


def test_lognormal_moments():
    m = lognormal_from_moments(52.6, 13.51)
    assert (m.mean, m.std) == pytest.approx((52.6, 13.51), rel=1e-14)
    ref = stats.lognorm(m.psi, scale=math.exp(m.xi))
    assert m.cdf(60.0) == pytest.approx(ref.cdf(60.0), rel=1e-13)
    assert m.pdf(60.0) == pytest.approx(ref.pdf(60.0), rel=1e-13)
    assert isinstance(lognormal_from_moments(5.0, 0.0), Degenerate)
    with pytest.raises(NonPositiveMean):
        lognormal_from_moments(-1.0, 1.0)


def test_uniform_from_moments():
    u = UniformTest.from_moments(10.0, 1.0)
    assert (u.lower, u.upper) == pytest.approx((10 - math.sqrt(3), 10 + math.sqrt(3)))
    assert (u.mean, u.std) == pytest.approx((10.0, 1.0), rel=1e-15)
    with pytest.raises(ValidationError):
        UniformTest(2.0, 1.0)


def test_probability_and_finiteness_guards():
    m = Lognormal(0.0, 1.0)
    with pytest.raises(ProbabilityOutOfRange):
        m.quantile(1.2)
    with pytest.raises(ProbabilityOutOfRange):
        m.partial_expectation(0.0)
    with pytest.raises(NonFinite):
        Lognormal(float("nan"), 1.0)


def test_degenerate():
    d = Degenerate(10.0)
    assert d.is_degenerate and d.std == 0.0
    assert d.quantile(0.3) == 10.0
    assert d.expected_excess(9.0) == pytest.approx(1.0)
    assert d.expected_excess(11.0) == 0.0
    with pytest.raises(DegenerateVariability):
        d.standardized()


def test_empirical_step_moments_and_quantile():
    x = np.array([3.0, 1.0, 2.0, 4.0])
    m = empirical_from_samples(x, "step")
    assert m.mean == 2.5 and m.std == pytest.approx(np.std(x))
    assert m.quantile(0.25) == 1.0 and m.quantile(0.26) == 2.0 and m.quantile(1.0) == 4.0
    assert m.cdf(2.0) == 0.5
    # int_p^1 of the step quantile by hand
    assert m.partial_expectation(0.6) == pytest.approx(0.15 * 3 + 0.25 * 4)


def test_empirical_linear_tail_is_the_trapezoid_area():
    rng = np.random.default_rng(0)
    m = empirical_from_samples(rng.gamma(2.0, 3.0, 50))
    grid = np.linspace(0.37, 1.0, 200_001)
    ref = np.trapezoid(m.quantile(grid), grid) if hasattr(np, "trapezoid") else np.trapz(m.quantile(grid), grid)
    assert m.partial_expectation(0.37) == pytest.approx(ref, rel=1e-8)
    whole = m._upper_integral(0.0)
    assert whole == pytest.approx(m.mean, rel=1e-14)


def test_empirical_needs_two_samples():
    with pytest.raises(TooFewSamples):
        empirical_from_samples([1.0])


def test_mle_recovers_lognormal():
    rng = np.random.default_rng(3)
    m = fit_lognormal_mle(rng.lognormal(2.0, 0.4, 20_000))
    assert m.xi == pytest.approx(2.0, abs=0.01) and m.psi == pytest.approx(0.4, abs=0.01)
    with pytest.raises(NonPositiveSample):
        fit_lognormal_mle([1.0, -2.0])
    assert isinstance(fit_lognormal_mle([3.0, 3.0, 3.0]), Degenerate)


def test_burr_fit_recovers_parameters():
    rng = np.random.default_rng(5)
    true = BurrXII(3.0, 2.0, 10.0)
    m = fit_burr(true.sample(rng, 20_000))
    assert m.c == pytest.approx(3.0, rel=0.05)
    assert m.k == pytest.approx(2.0, rel=0.1)
    assert m.mean == pytest.approx(true.mean, rel=0.01)
    assert isinstance(fit_burr([4.0] * 20), Degenerate)


def test_summary_stats():
    rng = np.random.default_rng(1)
    x = rng.gamma(4.0, 1.0, 200_000)
    s = summary_stats(x)
    assert s.std == pytest.approx(np.std(x, ddof=1))
    assert s.skewness == pytest.approx(1.0, abs=0.03)
    assert s.kurtosis == pytest.approx(1.5, abs=0.1)
    c = summary_stats([2.0, 2.0, 2.0])
    assert c.std == 0.0
    with pytest.raises(ZeroVariance):
        c.skewness


@settings(max_examples=60, deadline=None)
@given(xi=st.floats(-2, 5), psi=st.floats(0.05, 1.5), p=st.floats(1e-6, 1 - 1e-6))
def test_lognormal_round_trip(xi, psi, p):
    m = Lognormal(xi, psi)
    assert float(m.cdf(m.quantile(p))) == pytest.approx(p, rel=1e-10, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(c=st.floats(0.8, 8), k=st.floats(0.5, 6), p=st.floats(1e-6, 1 - 1e-6))
def test_burr_round_trip(c, k, p):
    if c * k <= 2.05:
        return
    m = BurrXII(c, k, 10.0)
    assert float(m.cdf(m.quantile(p))) == pytest.approx(p, rel=1e-9, abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.5, 100), min_size=2, max_size=60), st.floats(0.01, 0.99))
def test_empirical_quantile_monotone_and_tail_bounded(xs, p):
    for interp in Interpolation:
        m = empirical_from_samples(xs, interp)
        grid = np.linspace(0, 1, 101)
        assert np.all(np.diff(m.quantile(grid)) >= 0)
        tail = m.partial_expectation(p)
        assert (1 - p) * min(xs) - 1e-9 <= tail <= (1 - p) * max(xs) + 1e-9


@pytest.mark.parametrize("name,model", SUITE, ids=[n for n, _ in SUITE])
def test_standardized_view_has_zero_mean_unit_std(name, model):
    v = model.standardized()
    assert v.tail_integral(0.0) == pytest.approx(0.0, abs=1e-9)
    assert float(v.cdf_x(v.quantile_x(0.7))) == pytest.approx(0.7, rel=1e-9)
