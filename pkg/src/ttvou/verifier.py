"""Numerical checks of the comparative statics and tail conditions.

Everything here is an independent route to a claim the analytic modules rely
on: finite differences for derivative signs, stencil curvature for the
sufficient condition on the quantile function, and seeded simulation for the
tail measures and expected utilities.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateVariability, NonRiskAverse, NotSmooth, NumericalCurvatureUnstable,
                     ProbabilityOutOfRange, SeedRequired, StepTooLarge, TooFewDraws, TTVouError,
                     ValidationError)
from .quantile_models import Interpolation, QuantileModel
from .risk_measures import (SchedulingPreferences, departure_mett, optimal_departure,
                            travel_time_budget, unreliability_area)
from .valuation import _require_valuable, _vov, tail_terms

SIGN_SLACK = 1e-6
STRICT_MARGIN = 1e-9
RICHARDSON_RTOL = 1e-4
CLOSED_FORM_RTOL = 1e-5
TAIL_EPS = 1e-6
CURVATURE_RTOL = 1e-3
MIN_DRAWS = 10_000


class Target(str, enum.Enum):
    ZETA_ETT_WRT_BETA = "zeta_ett/beta"
    ZETA_ETT_WRT_GAMMA = "zeta_ett/gamma"
    VOV_WRT_BETA = "vov/beta"
    VOV_WRT_GAMMA = "vov/gamma"
    VOV_WRT_TAU = "vov/tau"
    TTRR_WRT_ALPHA = "ttrr/alpha"
    TTRR_WRT_BETA = "ttrr/beta"
    TTRR_WRT_GAMMA = "ttrr/gamma"
    TTVR_WRT_ALPHA = "ttvr/alpha"
    TTVR_WRT_BETA = "ttvr/beta"
    TTVR_WRT_GAMMA = "ttvr/gamma"


class Sign(str, enum.Enum):
    NON_NEGATIVE = "nonnegative"
    NON_POSITIVE = "nonpositive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class DerivativeCheck:
    target: Target
    estimate: float
    expected_sign: Sign
    step: float
    passed: bool
    richardson: float
    flagged: bool = False  # step and step/2 disagree by more than RICHARDSON_RTOL
    conditional: bool = False  # only claimed when the valid condition holds
    vacuous: bool = False  # conditional claim with the valid condition failing

    def as_dict(self) -> dict:
        return {"target": self.target.value, "estimate": self.estimate,
                "expected_sign": self.expected_sign.value, "step": self.step,
                "pass": self.passed, "richardson": self.richardson, "flagged": self.flagged,
                "conditional": self.conditional, "vacuous": self.vacuous}


@dataclass(frozen=True)
class ClosedFormCheck:
    closed_form: float
    finite_difference: float
    rel_error: float
    passed: bool

    def as_dict(self) -> dict:
        return {"closed_form": self.closed_form, "finite_difference": self.finite_difference,
                "rel_error": self.rel_error, "pass": self.passed}


@dataclass(frozen=True)
class DerivativeReport:
    checks: tuple[DerivativeCheck, ...]
    vov_gamma: ClosedFormCheck | None
    valid_condition: bool

    @property
    def all_passed(self) -> bool:
        ok = all(c.passed for c in self.checks)
        return ok and (self.vov_gamma is None or self.vov_gamma.passed)

    def as_dict(self) -> dict:
        return {"checks": [c.as_dict() for c in self.checks],
                "vov_gamma": None if self.vov_gamma is None else self.vov_gamma.as_dict(),
                "valid_condition": self.valid_condition, "all_passed": self.all_passed}


# (target, quantity, parameter, sign, conditional)
_SPECS = (
    (Target.ZETA_ETT_WRT_BETA, "zeta_ett", "beta", Sign.NON_POSITIVE, False),
    (Target.ZETA_ETT_WRT_GAMMA, "zeta_ett", "gamma", Sign.NON_NEGATIVE, False),
    (Target.VOV_WRT_BETA, "vov", "beta", Sign.NON_NEGATIVE, False),
    (Target.VOV_WRT_GAMMA, "vov", "gamma", Sign.NON_POSITIVE, True),
    (Target.VOV_WRT_TAU, "vov", "tau", Sign.NON_POSITIVE, True),
    (Target.TTRR_WRT_ALPHA, "ttrr", "alpha", Sign.NEGATIVE, False),
    (Target.TTRR_WRT_BETA, "ttrr", "beta", Sign.NON_NEGATIVE, False),
    (Target.TTRR_WRT_GAMMA, "ttrr", "gamma", Sign.NON_NEGATIVE, False),
    (Target.TTVR_WRT_ALPHA, "ttvr", "alpha", Sign.NEGATIVE, False),
    (Target.TTVR_WRT_BETA, "ttvr", "beta", Sign.NON_NEGATIVE, False),
    (Target.TTVR_WRT_GAMMA, "ttvr", "gamma", Sign.NON_POSITIVE, True),
)


def _quantity(model, prefs, name):
    try:
        terms = _require_valuable(model, prefs)
    except NonRiskAverse as exc:
        raise StepTooLarge(f"perturbed preferences leave the risk-averse domain: {exc}") from exc
    bg = prefs.beta + prefs.gamma
    if name == "zeta_ett":
        return terms.zeta_ett
    if name == "vov":
        return _vov(terms, prefs)
    if name == "ttrr":
        return bg / prefs.alpha * terms.upper
    if name == "ttvr":
        return _vov(terms, prefs) / prefs.alpha
    raise KeyError(name)


def _central(model, prefs, quantity, param, step):
    """Central difference; ``tau`` moves through ``gamma`` holding ``beta``."""
    wrt = "gamma" if param == "tau" else param
    theta = getattr(prefs, wrt)
    h = step * max(1.0, abs(theta))
    if theta - h <= 0:
        raise StepTooLarge(f"step {h:g} exceeds {wrt}={theta:g}")
    up = _quantity(model, prefs.with_(**{wrt: theta + h}), quantity)
    down = _quantity(model, prefs.with_(**{wrt: theta - h}), quantity)
    d = (up - down) / (2.0 * h)
    if param == "tau":
        d /= prefs.beta / (prefs.beta + prefs.gamma) ** 2
    return d


def _passes(estimate, sign):
    slack = SIGN_SLACK * max(1.0, abs(estimate))
    if sign is Sign.NON_NEGATIVE:
        return estimate >= -slack
    if sign is Sign.NON_POSITIVE:
        return estimate <= slack
    return estimate <= -STRICT_MARGIN


def vov_gamma_closed_form(model: QuantileModel, prefs: SchedulingPreferences) -> float:
    """``dVOV/dgamma = -1 + F(z) + zeta_TTM * int_{F(z)}^1 F_X^-1 / z**2`` at ``z = zeta_ETT``."""
    t = _require_valuable(model, prefs)
    return -1.0 + t.f_zeta_ett + t.zeta_ttm * t.upper_beyond_ett / t.zeta_ett ** 2


def check_derivative_signs(model: QuantileModel, prefs: SchedulingPreferences,
                           step: float = 1e-4) -> DerivativeReport:
    if not step > 0:
        raise ValidationError("step must be positive")
    terms = _require_valuable(model, prefs)
    valid = terms.kappa + 1.0 - terms.ell >= 0.0
    checks = []
    fd_gamma = None
    for target, quantity, param, sign, conditional in _SPECS:
        d1 = _central(model, prefs, quantity, param, step)
        d2 = _central(model, prefs, quantity, param, step / 2)
        rich = (4.0 * d2 - d1) / 3.0
        flagged = abs(d1 - d2) > RICHARDSON_RTOL * max(abs(d1), abs(d2), 1e-8)
        vacuous = conditional and not valid
        passed = True if vacuous else _passes(d1, sign)
        wrt = "gamma" if param == "tau" else param
        h = step * max(1.0, abs(getattr(prefs, wrt)))
        checks.append(DerivativeCheck(target, d1, sign, h, passed, rich, flagged, conditional, vacuous))
        if target is Target.VOV_WRT_GAMMA:
            fd_gamma = rich
    vov_gamma = None
    # a step quantile makes VOV piecewise in gamma; the closed form is then only one-sided
    if getattr(model, "interpolation", None) is not Interpolation.STEP:
        closed = vov_gamma_closed_form(model, prefs)
        rel = abs(closed - fd_gamma) / max(abs(closed), 1e-300)
        vov_gamma = ClosedFormCheck(closed, fd_gamma, rel, rel <= CLOSED_FORM_RTOL)
    return DerivativeReport(tuple(checks), vov_gamma, valid)


# ---------------------------------------------------------------------------
# quantile curvature


@dataclass(frozen=True)
class CurvatureResult:
    grid: np.ndarray
    curvature: np.ndarray  # F^-1'' / F^-1'
    bound: np.ndarray  # 1 / (1 - p)
    holds: np.ndarray
    valid_condition: bool
    margin: float

    @property
    def all_hold(self) -> bool:
        return bool(np.all(self.holds))

    @property
    def implication_ok(self) -> bool:
        """Pointwise condition everywhere must imply the valid condition."""
        return (not self.all_hold) or self.valid_condition

    def as_dict(self) -> dict:
        return {"grid": self.grid.tolist(), "curvature": self.curvature.tolist(),
                "bound": self.bound.tolist(), "holds": self.holds.tolist(),
                "all_hold": self.all_hold, "valid_condition": self.valid_condition,
                "margin": self.margin, "implication_ok": self.implication_ok}


def _stencil_ratio(model, q, h):
    # quantile at p + j*h is isf(q - j*h)
    f = [float(model.isf(q - j * h)) for j in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return d2 / d1


def quantile_curvature(model: QuantileModel, p: float) -> float:
    """``F^-1''(p) / F^-1'(p)`` by five-point stencils, step scaled to ``1 - p``."""
    if not model.continuous:
        raise NotSmooth(f"{model.kind.value} quantile is not twice differentiable")
    if model.is_degenerate:
        raise DegenerateVariability("degenerate model has no quantile curvature")
    q = 1.0 - p
    h = 0.01 * min(q, p)
    r1 = _stencil_ratio(model, q, h)
    r2 = _stencil_ratio(model, q, h / 2)
    scale = max(abs(r2), 1.0 / q)
    if not (math.isfinite(r1) and math.isfinite(r2)) or abs(r1 - r2) > CURVATURE_RTOL * scale:
        raise NumericalCurvatureUnstable(f"curvature at p={p:.8g} unstable: {r1:.6g} vs {r2:.6g}")
    return r2


def _condition_at(model, tau):
    terms = tail_terms(model, tau)
    if terms.zeta_ttm <= 0:
        return True, math.inf
    margin = terms.kappa + 1.0 - terms.ell
    return margin >= 0.0, margin


def curvature_condition(model: QuantileModel, tau: float, grid_n: int = 200) -> CurvatureResult:
    """Test ``F^-1'' / F^-1' <= 1/(1-p)`` on ``[tau, 1 - 1e-6]`` and the
    valid condition at ``tau`` it is supposed to guarantee."""
    if model.is_degenerate:
        raise DegenerateVariability("degenerate model has no quantile curvature")
    if not model.continuous:
        raise NotSmooth(f"{model.kind.value} quantile is not twice differentiable")
    if not 0 < tau < 1 - TAIL_EPS:
        raise ProbabilityOutOfRange(f"tau must lie in (0, 1 - {TAIL_EPS:g})")
    if grid_n < 2:
        raise ValidationError("grid_n must be at least 2")
    grid = np.linspace(tau, 1.0 - TAIL_EPS, grid_n)
    curv = np.array([quantile_curvature(model, p) for p in grid])
    bound = 1.0 / (1.0 - grid)
    valid, margin = _condition_at(model, tau)
    return CurvatureResult(grid, curv, bound, curv <= bound, valid, margin)


# ---------------------------------------------------------------------------
# simulation oracle


@dataclass(frozen=True)
class AuditEntry:
    name: str
    estimate: float
    std_error: float
    analytic: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "estimate": self.estimate, "std_error": self.std_error,
                "analytic": self.analytic, "pass": self.passed}


@dataclass(frozen=True)
class MonteCarloAudit:
    n: int
    seed: int
    entries: tuple[AuditEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, name) -> AuditEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"n": self.n, "seed": self.seed, "passed": self.passed,
                "entries": [e.as_dict() for e in self.entries]}


def _mean_se(x):
    if x.size == 0:
        return 0.0, 0.0
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _entry(name, x, analytic, k=3.0):
    est, se = _mean_se(x)
    ok = abs(est - analytic) <= k * se + 1e-12 * max(1.0, abs(analytic))
    return AuditEntry(name, est, se, float(analytic), bool(ok))


def scheduling_cost(prefs: SchedulingPreferences, departure: float, t: np.ndarray) -> np.ndarray:
    """Realized cost ``alpha T + beta SDE + gamma SDL`` with arrival ``D + T``."""
    arrival = departure + t
    return prefs.alpha * t + prefs.beta * np.maximum(-arrival, 0.0) + prefs.gamma * np.maximum(arrival, 0.0)


def monte_carlo_audit(model: QuantileModel, prefs: SchedulingPreferences, n: int = 1_000_000,
                      seed: int | None = None) -> MonteCarloAudit:
    """Simulate ``n`` travel times and compare the tail measures and the
    expected costs at both departures with their analytic values."""
    if seed is None:
        raise SeedRequired("monte_carlo_audit needs an explicit seed")
    if n < MIN_DRAWS:
        raise TooFewDraws(f"need at least {MIN_DRAWS} draws, got {n}")
    rng = np.random.default_rng(seed)
    t = np.asarray(model.sample(rng, n), dtype=float)
    tau = prefs.tau
    b = travel_time_budget(model, tau)
    excess = np.maximum(t - b, 0.0)
    s_u = unreliability_area(model, tau)
    # the conditional excess divides by P(T > b), which is 1 - tau unless b is an atom
    p_exceed = 1.0 - float(model.cdf(b))
    eed = s_u / p_exceed if p_exceed > 0 else 0.0
    ttb = optimal_departure(model, prefs)
    mett = departure_mett(model, prefs)
    entries = (
        _entry("s_u", excess, s_u),
        _entry("delta_eed", (t - b)[t > b], eed),
        _entry("cost_ttb", scheduling_cost(prefs, ttb.departure, t), ttb.cost),
        _entry("cost_mett", scheduling_cost(prefs, mett.departure, t), mett.cost),
    )
    return MonteCarloAudit(n, seed, entries)


# ---------------------------------------------------------------------------
# condition sweep


@dataclass(frozen=True)
class ConditionSweep:
    """Per-model ``(kappa + 1) / l`` over a punctuality grid.

    Where the standardized ``tau``-quantile is not positive, ``kappa`` is
    undefined; the condition then holds trivially and the ratio is ``inf``.
    """

    name: str
    tau_grid: tuple[float, ...]
    ratio_series: tuple[float, ...] = ()
    trivially_valid: tuple[bool, ...] = ()
    curvature_holds: tuple[bool | None, ...] = ()
    error: str | None = None

    @property
    def all_valid(self) -> bool:
        return self.error is None and all(r >= 1.0 - 1e-9 for r in self.ratio_series)

    def as_dict(self) -> dict:
        return {"name": self.name, "tau_grid": list(self.tau_grid),
                "ratio_series": [None if math.isinf(r) else r for r in self.ratio_series],
                "trivially_valid": list(self.trivially_valid),
                "curvature_holds": list(self.curvature_holds),
                "all_valid": self.all_valid, "error": self.error}


def _check_grid(tau_grid):
    g = tuple(float(t) for t in tau_grid)
    if not g:
        raise ValidationError("tau grid is empty")
    if any(not 0 < t < 1 for t in g):
        raise ProbabilityOutOfRange("tau grid must lie in (0, 1)")
    if any(b <= a for a, b in zip(g[:-1], g[1:])):
        raise ValidationError("tau grid must be strictly increasing")
    return g


def _sweep_one(name, model, grid):
    ratios, trivial, app_b = [], [], []
    for tau in grid:
        terms = tail_terms(model, tau)
        if terms.zeta_ttm > 0:
            ratios.append((terms.zeta_ett / terms.zeta_ttm) / terms.ell)
            trivial.append(False)
        else:
            ratios.append(math.inf)
            trivial.append(True)
        if model.continuous:
            app_b.append(bool(quantile_curvature(model, tau) <= 1.0 / (1.0 - tau)))
        else:
            app_b.append(None)
    return ConditionSweep(name, grid, tuple(ratios), tuple(trivial), tuple(app_b))


def condition_sweep(models, tau_grid) -> list[ConditionSweep]:
    """Sweep each model independently; a model that fails is reported with its
    error and does not affect the others.  ``models`` is a mapping or a
    sequence of ``(name, model)`` pairs."""
    grid = _check_grid(tau_grid)
    items = list(models.items()) if hasattr(models, "items") else list(models)
    out = []
    for name, model in items:
        try:
            out.append(_sweep_one(str(name), model, grid))
        except TTVouError as exc:
            out.append(ConditionSweep(str(name), grid, error=f"{type(exc).__name__}: {exc}"))
    return out
