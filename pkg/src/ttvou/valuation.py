"""Monetary values of reliability, unreliability and variability.

All valuations are per unit of the corresponding buffer (travel time margin,
expected excess delay, excess travel time) and are computed twice: once from
the standardized quantile integrals and once as a quotient of expected-utility
differences.  The two must agree to ``CROSS_RTOL``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CrossCheckFailed, DegenerateVariability, NonRiskAverse
from .quantile_models import QuantileModel
from .risk_measures import (SchedulingPreferences, departure_mett, mean_excess_travel_time,
                            optimal_departure)

CROSS_RTOL = 1e-8


@dataclass(frozen=True)
class TailTerms:
    """Standardized integrals shared by every valuation at one ``tau``."""

    tau: float
    zeta_ttm: float
    zeta_eed: float
    zeta_ett: float
    upper: float  # int_tau^1 F_X^-1
    f_zeta_ett: float
    upper_beyond_ett: float  # int_{F(zeta_ett)}^1 F_X^-1
    top: float | None = None  # upper end of X's support, used when F(zeta_ett) = 1

    @property
    def kappa(self) -> float:
        return self.zeta_eed / self.zeta_ttm

    @property
    def ell(self) -> float:
        return self.tail_mean_beyond_ett / self.zeta_ett

    @property
    def tail_mean_beyond_ett(self) -> float:
        if self.f_zeta_ett >= 1.0:
            return self.top
        return self.upper_beyond_ett / (1.0 - self.f_zeta_ett)


def tail_terms(model: QuantileModel, tau: float) -> TailTerms:
    if model.is_degenerate:
        raise DegenerateVariability("valuations need a travel-time distribution with positive spread")
    rm = mean_excess_travel_time(model, tau)
    view = model.standardized()
    upper = view.tail_integral(tau)
    f_z = float(view.cdf_x(rm.zeta_ett))
    if f_z >= 1.0:
        # no mass beyond zeta_ett: the conditional tail mean collapses onto the top of the support
        return TailTerms(tau, rm.zeta_ttm, rm.zeta_eed, rm.zeta_ett, upper, 1.0, 0.0,
                         float(view.quantile_x(1.0)))
    return TailTerms(tau, rm.zeta_ttm, rm.zeta_eed, rm.zeta_ett, upper, f_z, view.tail_integral(f_z))


def _require_valuable(model: QuantileModel, prefs: SchedulingPreferences) -> TailTerms:
    if model.is_degenerate:
        raise DegenerateVariability("valuations need a travel-time distribution with positive spread")
    if not prefs.risk_averse:
        raise NonRiskAverse(f"valuations need gamma > beta (got beta={prefs.beta}, gamma={prefs.gamma})")
    terms = tail_terms(model, prefs.tau)
    if not terms.zeta_ttm > 0:
        raise NonRiskAverse(f"standardized quantile at tau={prefs.tau} is {terms.zeta_ttm:.6g}; needs > 0")
    return terms


def _cross_check(name, a, b, rtol=CROSS_RTOL):
    resid = abs(a - b) / max(abs(a), abs(b), 1e-300)
    if resid > rtol:
        raise CrossCheckFailed(f"{name}: formula {a!r} vs utility quotient {b!r} (relative gap {resid:.3g})")
    return resid


def _vor(terms, prefs):
    return (prefs.beta + prefs.gamma) * terms.upper / terms.zeta_ttm


def _no_excess(terms):
    # an atom at the top of the support: nothing lies beyond the budget
    return terms.zeta_eed <= 1e-12 * abs(terms.zeta_ett)


def _vou(terms, prefs):
    if _no_excess(terms):
        return float("nan")
    z = terms.zeta_ett
    return (prefs.beta + prefs.gamma) * (z * terms.f_zeta_ett - z + terms.upper_beyond_ett) / terms.zeta_eed


def _vov(terms, prefs):
    bg = prefs.beta + prefs.gamma
    return -prefs.gamma + bg * terms.f_zeta_ett + bg * terms.upper_beyond_ett / terms.zeta_ett


def _utility_quotients(model, prefs, terms):
    certainty = prefs.alpha * model.mean
    ttb = optimal_departure(model, prefs).cost
    mett = departure_mett(model, prefs).cost
    sigma = model.std
    return {
        "vor": (ttb - certainty) / (sigma * terms.zeta_ttm),
        "vou": float("nan") if _no_excess(terms) else (mett - ttb) / (sigma * terms.zeta_eed),
        "vov": (mett - certainty) / (sigma * terms.zeta_ett),
    }


def value_of_reliability(model: QuantileModel, prefs: SchedulingPreferences) -> float:
    """VOR: cost per unit of travel time margin."""
    terms = _require_valuable(model, prefs)
    v = _vor(terms, prefs)
    _cross_check("VOR", v, _utility_quotients(model, prefs, terms)["vor"])
    return v


def value_of_unreliability(model: QuantileModel, prefs: SchedulingPreferences) -> float:
    """VOU: cost per unit of expected excess delay."""
    terms = _require_valuable(model, prefs)
    if _no_excess(terms):
        raise DegenerateVariability(f"no excess delay beyond the budget at tau={prefs.tau}; VOU is undefined")
    v = _vou(terms, prefs)
    _cross_check("VOU", v, _utility_quotients(model, prefs, terms)["vou"])
    return v


def value_of_variability(model: QuantileModel, prefs: SchedulingPreferences) -> float:
    """VOV: cost per unit of excess travel time."""
    terms = _require_valuable(model, prefs)
    v = _vov(terms, prefs)
    _cross_check("VOV", v, _utility_quotients(model, prefs, terms)["vov"])
    return v


def kappa_and_ell(model: QuantileModel, prefs: SchedulingPreferences) -> tuple[float, float]:
    terms = _require_valuable(model, prefs)
    return terms.kappa, terms.ell


@dataclass(frozen=True)
class ConditionVerdict:
    holds: bool
    margin: float  # kappa + 1 - l

    def __bool__(self):
        return self.holds


def valid_condition(model: QuantileModel, prefs: SchedulingPreferences) -> ConditionVerdict:
    """``l <= kappa + 1``: VOV is then nonincreasing in ``gamma`` and ``tau``."""
    kappa, ell = kappa_and_ell(model, prefs)
    margin = kappa + 1.0 - ell
    return ConditionVerdict(margin >= 0.0, margin)


def reliability_ratio(model: QuantileModel, prefs: SchedulingPreferences) -> float:
    """VOR per standard deviation of travel time, relative to the value of time."""
    terms = _require_valuable(model, prefs)
    return (prefs.beta + prefs.gamma) / prefs.alpha * terms.upper


def variability_ratio(model: QuantileModel, prefs: SchedulingPreferences) -> float:
    """VOV relative to the value of time; bounded below by ``beta / alpha``."""
    terms = _require_valuable(model, prefs)
    return _vov(terms, prefs) / prefs.alpha


@dataclass(frozen=True)
class ValuationReport:
    vor: float
    vou: float
    vov: float
    ttrr: float
    ttvr: float
    kappa: float
    ell: float
    valid_condition: bool
    margin: float
    f_zeta_ett: float
    residuals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"vor": self.vor, "vou": self.vou, "vov": self.vov, "ttrr": self.ttrr,
                "ttvr": self.ttvr, "kappa": self.kappa, "ell": self.ell,
                "valid_condition": self.valid_condition, "margin": self.margin,
                "f_zeta_ett": self.f_zeta_ett, "residuals": dict(self.residuals)}


def valuate(model: QuantileModel, prefs: SchedulingPreferences, rtol: float = CROSS_RTOL) -> ValuationReport:
    """Every valuation at once, with the cross-check residuals recorded."""
    terms = _require_valuable(model, prefs)
    vor, vou, vov = _vor(terms, prefs), _vou(terms, prefs), _vov(terms, prefs)
    quot = _utility_quotients(model, prefs, terms)
    residuals = {"vor": _cross_check("VOR", vor, quot["vor"], rtol)}
    if not _no_excess(terms):
        # VOU is left as NaN when the excess delay is zero
        residuals["vou"] = _cross_check("VOU", vou, quot["vou"], rtol)
    residuals["vov"] = _cross_check("VOV", vov, quot["vov"], rtol)
    eed_part = 0.0 if _no_excess(terms) else vou * terms.zeta_eed
    weighted = (vor * terms.zeta_ttm + eed_part) / terms.zeta_ett
    residuals["decomposition"] = _cross_check("VOV decomposition", vov, weighted, rtol)
    kappa, ell = terms.kappa, terms.ell
    margin = kappa + 1.0 - ell
    return ValuationReport(
        vor=vor, vou=vou, vov=vov,
        ttrr=(prefs.beta + prefs.gamma) / prefs.alpha * terms.upper,
        ttvr=vov / prefs.alpha,
        kappa=kappa, ell=ell, valid_condition=margin >= 0.0, margin=margin,
        f_zeta_ett=terms.f_zeta_ett, residuals=residuals,
    )
