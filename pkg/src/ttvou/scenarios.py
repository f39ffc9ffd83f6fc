"""Trip costs under three planning scenarios, route comparison and the
punctuality trade-off table."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import CrossCheckFailed, ProbabilityOutOfRange, TTVouError, ValidationError
from .quantile_models import QuantileModel
from .risk_measures import (SchedulingPreferences, departure_mett, mean_excess_travel_time,
                            optimal_departure)
from .valuation import valuate

IDENTITY_RTOL = 1e-8


class Scenario(str, enum.Enum):
    MEAN = "mean"
    TTB = "ttb"
    METT = "mett"


@dataclass(frozen=True)
class TripCostBreakdown:
    scenario: Scenario
    certainty: float
    reliability: float
    unreliability: float

    @property
    def total(self) -> float:
        return self.certainty + self.reliability + self.unreliability

    @property
    def percents(self) -> tuple[float, float, float]:
        t = self.total
        return self.certainty / t, self.reliability / t, self.unreliability / t

    def as_dict(self) -> dict:
        c, r, u = self.percents
        return {"scenario": self.scenario.value, "certainty": self.certainty,
                "reliability": self.reliability, "unreliability": self.unreliability,
                "total": self.total, "certainty_pct": c, "reliability_pct": r,
                "unreliability_pct": u}


def _check_identity(name, total, direct):
    if abs(total - direct) > IDENTITY_RTOL * max(abs(total), abs(direct)):
        raise CrossCheckFailed(f"{name} trip cost {total!r} differs from expected cost {direct!r}")


def trip_cost(model: QuantileModel, prefs: SchedulingPreferences,
              scenario: Scenario | str) -> TripCostBreakdown:
    """Certainty, reliability and unreliability components of the trip cost.

    The TTB and METT totals are checked against the expected scheduling cost
    at the corresponding departure.
    """
    scenario = Scenario(scenario)
    certainty = prefs.alpha * model.mean
    if scenario is Scenario.MEAN:
        return TripCostBreakdown(scenario, certainty, 0.0, 0.0)
    report = valuate(model, prefs)
    rm = mean_excess_travel_time(model, prefs.tau)
    reliability = rm.delta_ttm * report.vor
    if scenario is Scenario.TTB:
        out = TripCostBreakdown(scenario, certainty, reliability, 0.0)
        _check_identity("TTB", out.total, optimal_departure(model, prefs).cost)
        return out
    unreliability = rm.delta_eed * report.vou if rm.delta_eed > 0 else 0.0
    out = TripCostBreakdown(scenario, certainty, reliability, unreliability)
    _check_identity("METT", out.total, departure_mett(model, prefs).cost)
    return out


@dataclass(frozen=True)
class RouteResult:
    name: str
    costs: dict  # Scenario -> TripCostBreakdown
    error: str | None = None

    def total(self, scenario: Scenario) -> float:
        return self.costs[scenario].total

    def as_dict(self) -> dict:
        return {"name": self.name, "error": self.error,
                "costs": {s.value: b.as_dict() for s, b in self.costs.items()}}


@dataclass(frozen=True)
class RouteComparison:
    routes: tuple[RouteResult, ...]
    best: dict  # Scenario -> route name
    worst: dict

    def __getitem__(self, name) -> RouteResult:
        for r in self.routes:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"routes": [r.as_dict() for r in self.routes],
                "best": {s.value: n for s, n in self.best.items()},
                "worst": {s.value: n for s, n in self.worst.items()}}


def compare_routes(routes, prefs: SchedulingPreferences) -> RouteComparison:
    """Trip costs of every route under every scenario, plus the cheapest and
    dearest route per scenario (ties go to the lexicographically first name).

    ``routes`` is a mapping or a sequence of ``(name, model)`` pairs.  A route
    that cannot be costed is kept with its error and left out of the rankings.
    """
    items = list(routes.items()) if hasattr(routes, "items") else list(routes)
    if len(items) < 2:
        raise ValidationError("route comparison needs at least two routes")
    names = [str(n) for n, _ in items]
    if len(set(names)) != len(names):
        raise ValidationError("route names must be unique")
    results = []
    for name, model in items:
        try:
            costs = {s: trip_cost(model, prefs, s) for s in Scenario}
            results.append(RouteResult(str(name), costs))
        except TTVouError as exc:
            results.append(RouteResult(str(name), {}, f"{type(exc).__name__}: {exc}"))
    ok = [r for r in results if r.error is None]
    best, worst = {}, {}
    if ok:
        for s in Scenario:
            best[s] = min(ok, key=lambda r: (r.total(s), r.name)).name
            worst[s] = min(ok, key=lambda r: (-r.total(s), r.name)).name
    return RouteComparison(tuple(results), best, worst)


# ---------------------------------------------------------------------------
# punctuality trade-off


def _marker(pct):
    if pct > 0:
        return "↑"
    if pct < 0:
        return "↓"
    return ""


@dataclass(frozen=True)
class TradeoffRow:
    tau: float
    gamma: float
    ett: float
    ttvr: float
    ett_change_pct: float
    ttvr_change_pct: float
    valid_condition: bool

    @property
    def ett_marker(self) -> str:
        return _marker(self.ett_change_pct)

    @property
    def ttvr_marker(self) -> str:
        return _marker(self.ttvr_change_pct)

    def formatted(self) -> tuple[str, str, str]:
        """``(tau, ett, ttvr)`` cells with the change against the first row."""
        ett = f"{self.ett:.2f}"
        ttvr = f"{self.ttvr:.4f}"
        if self.ett_change_pct or self.ttvr_change_pct:
            ett += f" ({self.ett_marker} {abs(self.ett_change_pct):.2f}%)"
            ttvr += f" ({self.ttvr_marker} {abs(self.ttvr_change_pct):.2f}%)"
        return f"{self.tau:.2f}", ett, ttvr

    def as_dict(self) -> dict:
        return {"tau": self.tau, "gamma": self.gamma, "ett": self.ett, "ttvr": self.ttvr,
                "ett_change_pct": self.ett_change_pct, "ttvr_change_pct": self.ttvr_change_pct,
                "ett_marker": self.ett_marker, "ttvr_marker": self.ttvr_marker,
                "valid_condition": self.valid_condition}


def tradeoff_table(model: QuantileModel, alpha: float, beta: float, tau_grid) -> list[TradeoffRow]:
    """Excess travel time and variability ratio as the punctuality requirement
    rises with ``beta`` held fixed (so ``gamma = beta tau / (1 - tau)``)."""
    grid = [float(t) for t in tau_grid]
    if not grid:
        raise ValidationError("tau grid is empty")
    if any(not 0.5 < t < 1 for t in grid):
        raise ProbabilityOutOfRange("trade-off grid must lie in (0.5, 1)")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ValidationError("tau grid must be strictly increasing")
    raw = []
    for tau in grid:
        prefs = SchedulingPreferences.from_tau(alpha, beta, tau)
        report = valuate(model, prefs)
        rm = mean_excess_travel_time(model, tau)
        raw.append((tau, prefs.gamma, model.std * rm.zeta_ett, report.ttvr, report.valid_condition))
    ett0, ttvr0 = raw[0][2], raw[0][3]
    return [TradeoffRow(tau, g, ett, ttvr, 100.0 * (ett - ett0) / ett0, 100.0 * (ttvr - ttvr0) / ttvr0, ok)
            for tau, g, ett, ttvr, ok in raw]
