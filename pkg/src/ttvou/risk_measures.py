"""Tail-risk measures of a travel-time model under the step scheduling model.

Utilities follow the sign of the scheduling model (nonpositive); anything
called ``cost`` is the magnitude ``-EU``.  The preferred arrival time is
normalized to zero, so a departure ``D`` is a (negative) head start and the
arrival time is ``D + T``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (CrossCheckFailed, NonFiniteDeparture, ProbabilityOutOfRange,
                     ValidationError)
from .quantile_models import QuantileModel

IDENTITY_RTOL = 1e-10


@dataclass(frozen=True)
class SchedulingPreferences:
    """``(alpha, beta, gamma)`` step-model rates and the implied punctuality
    requirement ``tau = gamma / (beta + gamma)``.

    ``alpha`` doubles as the value of travel time.  Build with
    :meth:`from_gamma` or :meth:`from_tau`; direct construction checks the
    coupling.
    """

    alpha: float
    beta: float
    gamma: float
    tau: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "tau"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
        if not (self.alpha > 0 and self.beta > 0 and self.gamma > 0):
            raise ValidationError("alpha, beta and gamma must be positive")
        if not 0 < self.tau < 1:
            raise ProbabilityOutOfRange(f"tau must lie in (0, 1), got {self.tau}")
        implied = self.gamma / (self.beta + self.gamma)
        if abs(implied - self.tau) > 1e-12:
            raise ValidationError(f"tau={self.tau} inconsistent with gamma/(beta+gamma)={implied}")

    @classmethod
    def from_gamma(cls, alpha: float, beta: float, gamma: float) -> SchedulingPreferences:
        return cls(alpha, beta, gamma, gamma / (beta + gamma))

    @classmethod
    def from_tau(cls, alpha: float, beta: float, tau: float) -> SchedulingPreferences:
        if not 0 < tau < 1:
            raise ProbabilityOutOfRange(f"tau must lie in (0, 1), got {tau}")
        gamma = beta * tau / (1.0 - tau)
        return cls(alpha, beta, gamma, gamma / (beta + gamma))

    @property
    def risk_averse(self) -> bool:
        return self.gamma > self.beta

    @property
    def value_of_time(self) -> float:
        return self.alpha

    def scaled(self, lam: float) -> SchedulingPreferences:
        return SchedulingPreferences.from_gamma(lam * self.alpha, lam * self.beta, lam * self.gamma)

    def with_(self, **kw) -> SchedulingPreferences:
        a = kw.get("alpha", self.alpha)
        b = kw.get("beta", self.beta)
        g = kw.get("gamma", self.gamma)
        return SchedulingPreferences.from_gamma(a, b, g)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "tau": self.tau}


@dataclass(frozen=True)
class RiskMeasures:
    tau: float
    s_u: float
    ttb: float
    delta_ttm: float
    delta_eed: float
    mett: float
    zeta_ttm: float
    zeta_eed: float
    zeta_ett: float
    premium: float | None = None

    @property
    def ett(self) -> float:
        """Excess travel time, ``delta_ttm + delta_eed``."""
        return self.mett - self.ttb + self.delta_ttm

    def as_dict(self) -> dict:
        return {"tau": self.tau, "s_u": self.s_u, "ttb": self.ttb, "delta_ttm": self.delta_ttm,
                "delta_eed": self.delta_eed, "mett": self.mett, "zeta_ttm": self.zeta_ttm,
                "zeta_eed": self.zeta_eed, "zeta_ett": self.zeta_ett, "premium": self.premium}


class Criterion(str, enum.Enum):
    MEAN = "mean"
    TTB = "ttb"
    METT = "mett"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DepartureAnalysis:
    departure: float
    expected_utility: float
    criterion: Criterion
    degenerate: bool = False

    @property
    def cost(self) -> float:
        return -self.expected_utility

    def as_dict(self) -> dict:
        return {"criterion": self.criterion.value, "departure": self.departure,
                "expected_utility": self.expected_utility, "cost": self.cost,
                "degenerate": self.degenerate}


def _check_tau(tau):
    if not 0 < tau < 1:
        raise ProbabilityOutOfRange(f"tau must lie in (0, 1), got {tau}")


def _rel_close(a, b, rtol):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def travel_time_budget(model: QuantileModel, tau: float) -> float:
    """``b(tau) = mu + sigma F_X^{-1}(tau)``, the tau-quantile of travel time."""
    _check_tau(tau)
    return float(model.quantile(tau))


def unreliability_area(model: QuantileModel, tau: float) -> float:
    """Sum of all unexpected delays beyond the travel time budget."""
    _check_tau(tau)
    if model.is_degenerate:
        return 0.0
    b = float(model.quantile(tau))
    return float(max(model.partial_expectation(tau) - (1.0 - tau) * b, 0.0))


def expected_excess_delay(model: QuantileModel, tau: float) -> float:
    return unreliability_area(model, tau) / (1.0 - tau)


def mean_excess_travel_time(model: QuantileModel, tau: float) -> RiskMeasures:
    _check_tau(tau)
    mu = model.mean
    b = travel_time_budget(model, tau)
    if model.is_degenerate:
        return RiskMeasures(tau, 0.0, b, 0.0, 0.0, b, 0.0, 0.0, 0.0)
    sigma = model.std
    s_u = unreliability_area(model, tau)
    delta_ttm = b - mu
    delta_eed = s_u / (1.0 - tau)
    zeta_ttm = delta_ttm / sigma
    zeta_eed = delta_eed / sigma
    # (beta+gamma)/beta = 1/(1-tau)
    zeta_ett = model.standardized().tail_integral(tau) / (1.0 - tau)
    if not _rel_close(zeta_ett, zeta_ttm + zeta_eed, IDENTITY_RTOL) and abs(zeta_ett - zeta_ttm - zeta_eed) > 1e-12:
        raise CrossCheckFailed(f"zeta_ETT {zeta_ett!r} != zeta_TTM + zeta_EED {zeta_ttm + zeta_eed!r}")
    return RiskMeasures(tau, s_u, b, delta_ttm, delta_eed, b + delta_eed, zeta_ttm, zeta_eed, float(zeta_ett))


def risk_measures(model: QuantileModel, prefs: SchedulingPreferences) -> RiskMeasures:
    """All tail measures at ``prefs.tau``, including the reliability premium
    at the optimal departure ``D = -b(tau)``."""
    rm = mean_excess_travel_time(model, prefs.tau)
    premium = (prefs.beta + prefs.gamma) / prefs.alpha * rm.s_u
    return replace(rm, premium=premium)


def _check_departure(departure):
    if not math.isfinite(departure):
        raise NonFiniteDeparture(f"departure must be finite, got {departure!r}")


def expected_utility(model: QuantileModel, prefs: SchedulingPreferences, departure: float) -> float:
    """Expected step-model utility of departing at ``departure``.

    ``EU = -{(alpha - beta) mu - beta D + (beta + gamma) E[(T + D)^+]}``, with
    the late-arrival expectation taken in the quantile domain.
    """
    _check_departure(departure)
    a, b, g = prefs.alpha, prefs.beta, prefs.gamma
    late = model.expected_excess(-departure)
    return float(-((a - b) * model.mean - b * departure + (b + g) * late))


def optimal_departure(model: QuantileModel, prefs: SchedulingPreferences) -> DepartureAnalysis:
    """``D* = -b(tau)``; the maximizer of :func:`expected_utility`."""
    if model.is_degenerate:
        d = -model.mean
        return DepartureAnalysis(d, -prefs.alpha * model.mean, Criterion.TTB, degenerate=True)
    d = -travel_time_budget(model, prefs.tau)
    return DepartureAnalysis(d, expected_utility(model, prefs, d), Criterion.TTB)


def departure_mett(model: QuantileModel, prefs: SchedulingPreferences) -> DepartureAnalysis:
    """Departure that budgets the mean-excess travel time, ``D = -eta(tau)``."""
    if model.is_degenerate:
        d = -model.mean
        return DepartureAnalysis(d, -prefs.alpha * model.mean, Criterion.METT, degenerate=True)
    rm = mean_excess_travel_time(model, prefs.tau)
    a, b, g = prefs.alpha, prefs.beta, prefs.gamma
    mu, sigma, zeta = model.mean, model.std, rm.zeta_ett
    view = model.standardized()
    f_zeta = float(view.cdf_x(zeta))
    late = view.tail_integral(f_zeta) - zeta * (1.0 - f_zeta)
    cost = float(a * mu + b * sigma * zeta + (b + g) * sigma * late)
    generic = -expected_utility(model, prefs, -rm.mett)
    if not _rel_close(cost, generic, IDENTITY_RTOL):
        raise CrossCheckFailed(f"METT cost {cost!r} disagrees with direct evaluation {generic!r}")
    return DepartureAnalysis(float(-rm.mett), -cost, Criterion.METT)


def departure_mean(model: QuantileModel, prefs: SchedulingPreferences) -> DepartureAnalysis:
    """Plan on the mean; the cost reported is the certainty cost ``alpha mu``."""
    return DepartureAnalysis(-model.mean, -prefs.alpha * model.mean, Criterion.MEAN,
                             degenerate=model.is_degenerate)


def reliability_premium(model: QuantileModel, prefs: SchedulingPreferences, departure: float) -> float:
    """Largest early shift of ``departure`` a traveler would accept to remove
    all travel-time variability."""
    _check_departure(departure)
    if model.is_degenerate:
        return 0.0
    return (prefs.beta + prefs.gamma) / prefs.alpha * model.expected_excess(-departure)


def expected_utility_time_domain(model: QuantileModel, prefs: SchedulingPreferences, departure: float) -> float:
    """Same as :func:`expected_utility` but integrating the density over ``t``.

    Independent route used to check the quantile-domain evaluation; needs a
    model with a density.
    """
    from scipy import integrate

    _check_departure(departure)
    a, b, g = prefs.alpha, prefs.beta, prefs.gamma
    d = -departure
    lo = float(model.quantile(0.0))
    lo = lo if np.isfinite(lo) else -np.inf
    start = max(d, lo)

    def integrand(t):
        return (t - d) * float(model.pdf(t))

    hi = float(model.quantile(1.0))
    points = [float(model.quantile(p)) for p in (0.9, 0.99, 0.999) if float(model.quantile(p)) > start]
    late = 0.0
    edges = [start] + points
    for left, right in zip(edges[:-1], edges[1:]):
        late += integrate.quad(integrand, left, right, epsabs=0.0, epsrel=1e-12, limit=500)[0]
    if np.isfinite(hi):
        late += integrate.quad(integrand, edges[-1], hi, epsabs=0.0, epsrel=1e-12, limit=500)[0]
    else:
        late += integrate.quad(integrand, edges[-1], np.inf, epsabs=0.0, epsrel=1e-12, limit=500)[0]
    return -((a - b) * model.mean - b * departure + (b + g) * late)
