"""Acceptance criteria, each at its stated tolerance.

Every test carries ``@pytest.mark.criterion(n)``; the conftest prints one
PASS/FAIL line per criterion at the end of the run.  Run this file alone
with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""
import io
import json
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import identity_suite, standard_suite
from ttvou.cli import run
from ttvou.datasets import (ROUTES, ROUTE_PREFS, DATASETS, TRADEOFF_101_1, synthetic_samples, route_models,
                            dataset_lognormals)
from ttvou.errors import DegenerateVariability
from ttvou.quantile_models import (BurrXII, Degenerate, Interpolation, UniformTest, empirical_from_samples,
                                   fit_burr, lognormal_from_moments)
from ttvou.risk_measures import (SchedulingPreferences, departure_mett, optimal_departure,
                                 reliability_premium, risk_measures)
from ttvou.scenarios import Scenario, compare_routes, trip_cost, tradeoff_table
from ttvou.valuation import valuate
from ttvou.verifier import check_derivative_signs, condition_sweep, monte_carlo_audit, vov_gamma_closed_form

SWEEP_GRID = [round(0.5 + 0.05 * i, 2) for i in range(10)] + [0.99]


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------------------------------
# 1. exact identities

IDENTITY = identity_suite()


def _tol(model):
    # uniform tails go through adaptive quadrature
    return 1e-8 if isinstance(model, UniformTest) else 1e-9


@pytest.mark.criterion(1)
def test_c1_suite_size():
    assert len(IDENTITY) >= 20
    kinds = {type(m).__name__ for _, m, _ in IDENTITY}
    assert {"UniformTest", "Lognormal", "BurrXII", "Empirical"} <= kinds


@pytest.mark.criterion(1)
@pytest.mark.parametrize("name,model,prefs", IDENTITY, ids=[c[0] for c in IDENTITY])
def test_c1_identities(name, model, prefs):
    tol = _tol(model)
    a, b, tau = prefs.alpha, prefs.beta, prefs.tau
    rm = risk_measures(model, prefs)
    # delta_EED (1 - tau) = S_u
    assert rel(rm.delta_eed * (1 - tau), rm.s_u) <= tol
    # beta delta_EED = alpha pi at D = -b(tau)
    pi = reliability_premium(model, prefs, -rm.ttb)
    assert rel(b * rm.delta_eed, a * pi) <= tol
    # |EU(D_METT)| >= |EU(D_TTB)| >= alpha mu
    c_mett, c_ttb = departure_mett(model, prefs).cost, optimal_departure(model, prefs).cost
    assert c_mett >= c_ttb * (1 - tol) and c_ttb >= a * model.mean * (1 - tol)
    # zeta consistency
    assert rel(rm.zeta_ett, rm.zeta_ttm + rm.zeta_eed) <= tol
    r = valuate(model, prefs)
    assert rel(r.vov, (r.vor * rm.zeta_ttm + r.vou * rm.zeta_eed) / rm.zeta_ett) <= tol
    assert rel(r.kappa + 1, rm.zeta_ett / rm.zeta_ttm) <= tol
    assert r.ttvr >= b / a * (1 - tol)
    assert r.ell > 1


@pytest.mark.criterion(1)
def test_c1_degenerate_guarded():
    d = Degenerate(10.0)
    prefs = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    assert optimal_departure(d, prefs).cost == departure_mett(d, prefs).cost == 2.0 * 10.0
    with pytest.raises(DegenerateVariability):
        valuate(d, prefs)


# ---------------------------------------------------------------------------
# 2. closed-form uniform point


@pytest.mark.criterion(2)
def test_c2_uniform_point():
    model = UniformTest.from_moments(10.0, 1.0)
    prefs = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    r = valuate(model, prefs)
    expected = {"vor": 4 / 3, "vou": 0.25, "vov": 1.0625, "ttvr": 0.53125, "kappa+1": 4 / 3, "ell": 1.125,
                "eu_ttb": 21.385641, "eu_mett": 21.472243}
    got = {"vor": r.vor, "vou": r.vou, "vov": r.vov, "ttvr": r.ttvr, "kappa+1": r.kappa + 1, "ell": r.ell,
           "eu_ttb": abs(optimal_departure(model, prefs).expected_utility),
           "eu_mett": abs(departure_mett(model, prefs).expected_utility)}
    for key, want in expected.items():
        assert got[key] == pytest.approx(want, abs=1e-6), key


# ---------------------------------------------------------------------------
# 3. six-route trip costs

PREFS2 = SchedulingPreferences.from_gamma(*ROUTE_PREFS)


@pytest.mark.criterion(3)
@pytest.mark.parametrize("row", ROUTES, ids=lambda r: r.name)
def test_c3_route_costs(row):
    model = route_models(2.0)[row.name]
    c = trip_cost(model, PREFS2, Scenario.METT)
    assert c.reliability == pytest.approx(row.reliability, rel=0.02)
    assert c.unreliability == pytest.approx(row.unreliability, rel=0.02)


@pytest.mark.criterion(3)
def test_c3_route_rankings():
    comp = compare_routes(route_models(2.0), PREFS2)
    assert comp.best[Scenario.MEAN] == "Path 5"
    assert comp.best[Scenario.TTB] == "Path 4"
    assert comp.worst[Scenario.METT] == "Path 6"


# ---------------------------------------------------------------------------
# 4. decomposition trend


def _shares():
    comp = compare_routes(route_models(2.0), PREFS2)
    return [r.costs[Scenario.METT].percents[2] for r in comp.routes]


@pytest.mark.criterion(4)
def test_c4_share_increases():
    s = _shares()
    assert all(b > a for a, b in zip(s, s[1:]))


@pytest.mark.criterion(4)
def test_c4_path1_share():
    assert _shares()[0] == pytest.approx(0.0196, abs=0.002)


@pytest.mark.criterion(4)
def test_c4_path6_share():
    assert _shares()[-1] == pytest.approx(0.107, abs=0.005)


# ---------------------------------------------------------------------------
# 5. condition sweep over the datasets

C5_EMPIRICAL_N = 100_000


@pytest.mark.criterion(5)
def test_c5_lognormal_sweep():
    sweeps = condition_sweep(dataset_lognormals(), SWEEP_GRID)
    bad = [(s.name, s.error) for s in sweeps if not s.all_valid]
    assert not bad


@pytest.mark.criterion(5)
def test_c5_burr_sweep():
    models = {r.name: fit_burr(synthetic_samples(r.mean, r.std, r.skewness, 2000, seed=i))
              for i, r in enumerate(DATASETS)}
    sweeps = condition_sweep(models, SWEEP_GRID)
    bad = [(s.name, s.error, min(s.ratio_series, default=None)) for s in sweeps if not s.all_valid]
    assert not bad


@pytest.mark.criterion(5)
def test_c5_empirical_sweep():
    models = {r.name: empirical_from_samples(synthetic_samples(r.mean, r.std, r.skewness, C5_EMPIRICAL_N, seed=i))
              for i, r in enumerate(DATASETS)}
    sweeps = condition_sweep(models, SWEEP_GRID)
    bad = [(s.name, s.error, min(s.ratio_series, default=None)) for s in sweeps if not s.all_valid]
    assert not bad


# ---------------------------------------------------------------------------
# 6. trade-off approximation


@pytest.mark.criterion(6)
def test_c6_tradeoff():
    model = lognormal_from_moments(52.60, 13.51)
    rows = tradeoff_table(model, 2.0, 1.0, [t for t, _, _ in TRADEOFF_101_1])
    first = rows[0]
    assert first.ett == pytest.approx(12.35, rel=0.10)
    assert first.ttvr == pytest.approx(0.6889, rel=0.10)
    assert first.ett == pytest.approx(13.12, abs=0.005) and first.ttvr == pytest.approx(0.6465, abs=5e-5)
    # every reference row: ETT up, TTVR down
    assert all(b.ett > a.ett for a, b in zip(rows, rows[1:]))
    assert all(b.ttvr < a.ttvr for a, b in zip(rows, rows[1:]))
    pub = TRADEOFF_101_1
    assert all(b[1] > a[1] and b[2] < a[2] for a, b in zip(pub, pub[1:]))


# ---------------------------------------------------------------------------
# 7. derivative signs

SUITE = standard_suite()


@pytest.mark.criterion(7)
@pytest.mark.parametrize("name,model", SUITE, ids=[n for n, _ in SUITE])
def test_c7_derivative_signs(name, model):
    prefs = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    rep = check_derivative_signs(model, prefs, step=1e-4)
    assert len(rep.checks) == 11
    assert [c.target.value for c in rep.checks if not c.passed] == []
    assert rep.vov_gamma is not None
    assert rel(rep.vov_gamma.closed_form, rep.vov_gamma.finite_difference) <= 1e-5


@pytest.mark.criterion(7)
def test_c7_vov_gamma_hand_value():
    model = UniformTest.from_moments(10.0, 1.0)
    prefs = SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)
    assert vov_gamma_closed_form(model, prefs) == pytest.approx(-0.015625, rel=1e-5)
    rep = check_derivative_signs(model, prefs, step=1e-4)
    assert rep.vov_gamma.finite_difference == pytest.approx(-0.015625, rel=1e-5)


# ---------------------------------------------------------------------------
# 8. Monte Carlo audits

AUDIT_MODELS = {
    "uniform(10,1)": (UniformTest.from_moments(10.0, 1.0), SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)),
    "lognormal(9.97,1.994)": (lognormal_from_moments(9.97, 1.994), SchedulingPreferences.from_tau(2.0, 1.0, 0.8)),
    "lognormal 101_1": (lognormal_from_moments(52.60, 13.51), SchedulingPreferences.from_tau(2.0, 1.0, 0.9)),
    "burr(3,2,10)": (BurrXII(3.0, 2.0, 10.0), SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)),
    "empirical step": (empirical_from_samples(np.random.default_rng(3).gamma(3.0, 4.0, 500), Interpolation.STEP),
                       SchedulingPreferences.from_tau(2.0, 1.0, 0.85)),
}


@pytest.mark.criterion(8)
@pytest.mark.parametrize("name", list(AUDIT_MODELS))
def test_c8_audit(name):
    model, prefs = AUDIT_MODELS[name]
    a = monte_carlo_audit(model, prefs, n=1_000_000, seed=42)
    assert {e.name for e in a.entries} == {"s_u", "delta_eed", "cost_ttb", "cost_mett"}
    assert [e.name for e in a.entries if not e.passed] == []
    assert monte_carlo_audit(model, prefs, n=1_000_000, seed=42) == a


@pytest.mark.criterion(8)
def test_c8_uniform_mett_cost_target():
    model, prefs = AUDIT_MODELS["uniform(10,1)"]
    a = monte_carlo_audit(model, prefs, n=1_000_000, seed=42)
    assert a["cost_mett"].analytic == pytest.approx(21.472243, abs=1e-6)
    assert abs(a["cost_mett"].estimate - 21.472243) <= 3 * a["cost_mett"].std_error


# ---------------------------------------------------------------------------
# 9. CLI determinism and exit codes

GOLDEN = Path(__file__).parent / "golden"
CASES = json.loads((GOLDEN / "cases.json").read_text())


def _call(argv):
    out, err = io.StringIO(), io.StringIO()
    return run(argv, out, err), out.getvalue()


@pytest.mark.criterion(9)
@pytest.mark.parametrize("name", ["value_uniform", "routes_six", "tradeoff_101_1", "verify_uniform"])
def test_c9_golden_and_rerun(name):
    code, first = _call(CASES[name])
    assert code == 0
    assert first == (GOLDEN / f"{name}.json").read_text(encoding="utf-8")
    assert _call(CASES[name]) == (0, first)


@pytest.mark.criterion(9)
@pytest.mark.parametrize("argv,code", [
    (["value", "--model", "builtin:uniform", "--gamma", "4"], 0),
    (["value", "--model", "builtin:uniform", "--tau", "1.5"], 2),
    (["value", "--model", "builtin:degenerate:10", "--gamma", "4"], 3),
], ids=["exit0", "exit2", "exit3"])
def test_c9_exit_codes(argv, code):
    assert _call(argv)[0] == code


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
