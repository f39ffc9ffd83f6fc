import math

import pytest
from scipy import optimize

import oracles
from ttvou.errors import NonFiniteDeparture, ProbabilityOutOfRange, ValidationError
from ttvou.quantile_models import Degenerate, Lognormal, UniformTest, lognormal_from_moments
from ttvou.risk_measures import (Criterion, SchedulingPreferences, departure_mean, departure_mett,
                                 expected_excess_delay, expected_utility, expected_utility_time_domain,
                                 mean_excess_travel_time, optimal_departure, reliability_premium,
                                 risk_measures, travel_time_budget, unreliability_area)

from conftest import identity_suite

R3 = math.sqrt(3.0)


def test_preferences_coupling():
    p = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    assert p.tau == 0.8 and p.risk_averse
    q = SchedulingPreferences.from_tau(2.0, 1.0, 0.8)
    assert q.gamma == pytest.approx(4.0, rel=1e-14)
    assert p.scaled(3.0).tau == pytest.approx(0.8, rel=1e-15)
    assert p.with_(gamma=1.0).tau == 0.5
    with pytest.raises(ValidationError):
        SchedulingPreferences(2.0, 1.0, 4.0, 0.7)
    with pytest.raises(ValidationError):
        SchedulingPreferences.from_gamma(0.0, 1.0, 4.0)
    with pytest.raises(ProbabilityOutOfRange):
        SchedulingPreferences.from_tau(2.0, 1.0, 1.0)


def test_uniform_point_by_hand(uniform_point):
    model, prefs = uniform_point
    rm = risk_measures(model, prefs)
    # zeta_TTM = 0.6 sqrt3, zeta_ETT = 0.8 sqrt3, S_u = (1 - tau)(zeta_ETT - zeta_TTM)
    assert rm.ttb == pytest.approx(10 + 0.6 * R3, rel=1e-14)
    assert rm.zeta_ttm == pytest.approx(0.6 * R3, rel=1e-14)
    assert rm.zeta_ett == pytest.approx(0.8 * R3, rel=1e-12)
    assert rm.s_u == pytest.approx(0.04 * R3, rel=1e-10)
    assert rm.delta_eed == pytest.approx(0.2 * R3, rel=1e-10)
    assert rm.mett == pytest.approx(10 + 0.8 * R3, rel=1e-12)
    assert rm.ett == pytest.approx(0.8 * R3, rel=1e-12)
    assert rm.premium == pytest.approx(2.5 * 0.04 * R3, rel=1e-10)


@pytest.mark.parametrize("cov", [0.2, 0.64, 1.1])
@pytest.mark.parametrize("tau", [0.6, 0.8, 0.95])
def test_lognormal_against_mpmath(cov, tau):
    model = lognormal_from_moments(9.97, 9.97 * cov)
    ref = oracles.valuation(oracles.LognormalRef.from_cov(cov), 2.0, 1.0, tau / (1 - tau))
    rm = mean_excess_travel_time(model, tau)
    assert rm.zeta_ttm == pytest.approx(ref["zeta_ttm"], rel=1e-10)
    assert rm.zeta_eed == pytest.approx(ref["zeta_eed"], rel=1e-9)
    assert rm.zeta_ett == pytest.approx(ref["zeta_ett"], rel=1e-10)
    assert rm.s_u == pytest.approx(model.std * (1 - tau) * ref["zeta_eed"], rel=1e-9)


def test_functions_agree_with_bundle():
    m = lognormal_from_moments(52.6, 13.51)
    rm = mean_excess_travel_time(m, 0.7)
    assert travel_time_budget(m, 0.7) == rm.ttb
    assert unreliability_area(m, 0.7) == rm.s_u
    assert expected_excess_delay(m, 0.7) == rm.delta_eed


def test_degenerate_measures():
    d = Degenerate(10.0)
    rm = mean_excess_travel_time(d, 0.8)
    assert rm.s_u == 0.0 and rm.mett == rm.ttb == 10.0
    opt = optimal_departure(d, SchedulingPreferences.from_gamma(2.0, 1.0, 4.0))
    assert opt.degenerate and opt.departure == -10.0 and opt.expected_utility == -20.0


@pytest.mark.parametrize("name,model,prefs", identity_suite()[::3], ids=lambda v: v if isinstance(v, str) else "")
def test_budget_departure_maximizes_utility(name, model, prefs):
    opt = optimal_departure(model, prefs)
    f = lambda d: -expected_utility(model, prefs, d)
    res = optimize.minimize_scalar(f, bracket=(opt.departure - 1.0, opt.departure + 1.0), tol=1e-12)
    assert -res.fun <= opt.expected_utility + 1e-10 * abs(opt.expected_utility)
    if model.continuous:
        assert res.x == pytest.approx(opt.departure, rel=1e-5)


@pytest.mark.parametrize("model", [UniformTest.from_moments(10, 1), Lognormal(2.3, 0.4),
                                   lognormal_from_moments(10, 11)])
def test_utility_time_domain_cross_check(model):
    prefs = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    for d in (-model.mean - 2 * model.std, -model.mean, -model.mean + 0.5 * model.std):
        assert expected_utility(model, prefs, d) == pytest.approx(
            expected_utility_time_domain(model, prefs, d), rel=1e-8)


def test_uniform_costs_against_oracle(uniform_point):
    model, prefs = uniform_point
    ttb, mett = oracles.scheduling_costs(oracles.UniformRef(), 10, 1, 2, 1, 4)
    assert optimal_departure(model, prefs).cost == pytest.approx(ttb, rel=1e-12)
    dm = departure_mett(model, prefs)
    assert dm.cost == pytest.approx(mett, rel=1e-12)
    assert dm.criterion is Criterion.METT
    assert departure_mean(model, prefs).departure == -10.0


def test_premium_at_budget_departure(uniform_point):
    model, prefs = uniform_point
    rm = risk_measures(model, prefs)
    assert reliability_premium(model, prefs, -rm.ttb) == pytest.approx(rm.premium, rel=1e-12)


def test_utility_scales_with_preferences():
    m = Lognormal(2.0, 0.5)
    p = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    assert expected_utility(m, p.scaled(3.0), -9.0) == pytest.approx(3 * expected_utility(m, p, -9.0), rel=1e-13)


def test_time_unit_invariance():
    a = Lognormal(2.0, 0.5)
    b = Lognormal(2.0 + math.log(60.0), 0.5)
    ra, rb = mean_excess_travel_time(a, 0.85), mean_excess_travel_time(b, 0.85)
    for f in ("zeta_ttm", "zeta_eed", "zeta_ett"):
        assert getattr(ra, f) == pytest.approx(getattr(rb, f), rel=1e-10)
    assert rb.s_u == pytest.approx(60 * ra.s_u, rel=1e-10)


def test_guards():
    m = Lognormal(2.0, 0.5)
    p = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    with pytest.raises(NonFiniteDeparture):
        expected_utility(m, p, float("inf"))
    with pytest.raises(ProbabilityOutOfRange):
        mean_excess_travel_time(m, 1.0)


def test_lognormal_mean_997_worked_values():
    m = lognormal_from_moments(9.97, 1.994)
    prefs = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    assert m.xi == pytest.approx(2.279975, abs=1e-5) and m.psi == pytest.approx(0.198042, abs=1e-5)
    assert m.partial_expectation(0.8) == pytest.approx(2.5916, abs=1e-3)
    rm = risk_measures(m, prefs)
    assert rm.ttb == pytest.approx(11.549, abs=1e-3)
    assert rm.s_u == pytest.approx(0.28180, abs=1e-3)
    assert rm.delta_eed == pytest.approx(1.4090, abs=5e-3)
    assert optimal_departure(m, prefs).departure == pytest.approx(-11.549, abs=1e-3)
    pi = reliability_premium(m, prefs, -rm.ttb)
    assert pi == pytest.approx(0.70450, abs=3e-3)
    assert rm.delta_eed / pi == pytest.approx(2.0, rel=1e-6)
