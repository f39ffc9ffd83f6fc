"""Reference summary tables and moment-matched synthetic samples.

Only summaries of the travel-time datasets are available, so sample-based
workflows run on synthetic draws whose mean and standard deviation match a
row exactly and whose skewness matches approximately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ConvergenceFailure, NonPositiveMean, TooFewSamples, ValidationError
from .quantile_models import QuantileModel, lognormal_from_moments


@dataclass(frozen=True)
class DatasetRow:
    name: str
    mean: float
    std: float
    skewness: float
    kurtosis: float  # excess
    unit: str

    @property
    def cov(self) -> float:
        return self.std / self.mean


DATASETS = (
    DatasetRow("Campus 1", 59.90, 7.76, 1.09, 3.09, "min"),
    DatasetRow("Campus 2", 57.80, 7.16, 1.47, 2.70, "min"),
    DatasetRow("Campus 3", 51.97, 7.56, 2.44, 8.57, "min"),
    DatasetRow("Campus 4", 65.71, 11.13, 1.21, 2.78, "min"),
    DatasetRow("Campus 5", 80.79, 17.09, 0.66, -0.49, "min"),
    DatasetRow("Link 1", 36.57, 25.23, 0.37, -0.78, "s"),
    DatasetRow("Link 2", 15.24, 9.93, 2.80, 10.86, "s"),
    DatasetRow("Link 3", 15.85, 13.45, 1.67, 1.76, "s"),
    DatasetRow("Path", 84.60, 28.11, 0.30, 0.04, "s"),
    DatasetRow("101_1", 52.60, 13.51, 0.94, 1.35, "s"),
    DatasetRow("101_2", 68.42, 21.79, 0.40, -0.89, "s"),
    DatasetRow("101_3", 80.84, 18.88, -0.26, 0.50, "s"),
    DatasetRow("101_4", 65.23, 21.38, 0.52, -0.52, "s"),
)


def dataset_row(name: str) -> DatasetRow:
    for row in DATASETS:
        if row.name == name:
            return row
    raise KeyError(name)


@dataclass(frozen=True)
class RouteRow:
    name: str
    cov: float
    cost_mean: float
    reliability: float
    unreliability: float

    @property
    def cost_ttb(self) -> float:
        return self.cost_mean + self.reliability

    @property
    def cost_mett(self) -> float:
        return self.cost_mean + self.reliability + self.unreliability


ROUTES = (
    RouteRow("Path 1", 0.20, 19.94, 2.41, 0.39),
    RouteRow("Path 2", 0.41, 15.93, 4.01, 0.80),
    RouteRow("Path 3", 0.64, 13.93, 5.58, 1.32),
    RouteRow("Path 4", 0.79, 12.65, 6.15, 1.60),
    RouteRow("Path 5", 0.94, 12.36, 7.01, 1.98),
    RouteRow("Path 6", 1.10, 12.80, 8.21, 2.51),
)

# preferences inferred from the Path 1 reliability cost (beta/alpha = 0.4 at tau = 0.8)
ROUTE_PREFS = (2.0, 0.8, 3.2)

# (tau, excess travel time, variability ratio) for dataset 101_1
TRADEOFF_101_1 = (
    (0.60, 12.35, 0.6889),
    (0.65, 14.07, 0.6642),
    (0.70, 15.80, 0.6457),
    (0.75, 18.10, 0.6256),
    (0.80, 20.99, 0.6061),
    (0.85, 24.40, 0.5884),
    (0.90, 29.14, 0.5613),
)


def route_models(alpha: float = ROUTE_PREFS[0]) -> dict[str, QuantileModel]:
    """Lognormal routes with mean ``cost / alpha`` and the tabulated CoV."""
    out = {}
    for row in ROUTES:
        mu = row.cost_mean / alpha
        out[row.name] = lognormal_from_moments(mu, row.cov * mu)
    return out


def dataset_lognormals() -> dict[str, QuantileModel]:
    return {row.name: lognormal_from_moments(row.mean, row.std) for row in DATASETS}


# ---------------------------------------------------------------------------
# synthetic samples


def _lognormal_skew(w):
    return (w + 2.0) * math.sqrt(w - 1.0)


def _standard_shape(skew, cov, rng, n):
    """Draws with mean 0, std 1, the requested skewness and a lower bound
    above ``-1/cov`` (so that ``mean + std * x`` stays positive)."""
    lower = -1.0 / cov
    if skew > _lognormal_skew(1.0 + cov * cov):
        # shifted lognormal; its support starts -1/sqrt(w - 1) std below the mean
        w = optimize.brentq(lambda w: _lognormal_skew(w) - skew, 1.0 + 1e-12, 1e6)
        psi = math.sqrt(math.log(w))
        z = rng.standard_normal(n)
        x = np.exp(psi * z)
        m = math.exp(psi * psi / 2)
        return (x - m) / (m * math.sqrt(w - 1.0))
    if skew > 2.0 * cov:
        # shifted gamma; support starts 2/skew std below the mean
        k = 4.0 / skew ** 2
        g = rng.gamma(k, 1.0, n)
        return (g - k) / math.sqrt(k)
    # beta on [lower, upper], lower fixed at zero travel time
    a, b = _beta_shape(skew, -lower)
    span = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1)))
    x = rng.beta(a, b, n)
    return (x - a / (a + b)) / span


def _beta_shape(skew, dist):
    """Beta ``(a, b)`` whose lower bound sits ``dist`` std below the mean."""

    def eqs(v):
        a, b = np.exp(v)
        s = a + b
        d = math.sqrt(a * (s + 1) / b)  # mean minus lower bound, in std units
        sk = 2 * (b - a) * math.sqrt(s + 1) / ((s + 2) * math.sqrt(a * b))
        return [math.log(d / dist), sk - skew]

    best = None
    for a0 in (0.5, 2.0, 8.0, 32.0):
        for b0 in (0.5, 2.0, 8.0, 32.0):
            sol, info, ier, _ = optimize.fsolve(eqs, np.log([a0, b0]), full_output=True, xtol=1e-13)
            if ier == 1 and max(abs(r) for r in eqs(sol)) < 1e-10:
                best = sol
                break
        if best is not None:
            break
    if best is None:
        raise ConvergenceFailure(f"no beta shape with skewness {skew} and lower bound {dist} std below the mean")
    a, b = np.exp(best)
    return float(a), float(b)


_MAX_REDRAWS = 100


def synthetic_samples(mean: float, std: float, skewness: float, n: int = 2000,
                      seed: int = 0) -> np.ndarray:
    """Positive draws whose sample mean and (unbiased) std equal ``mean`` and
    ``std`` exactly and whose skewness is close to ``skewness``.

    Shape family: shifted lognormal when the skewness exceeds what a
    lognormal with this CoV has, shifted gamma when it still exceeds
    ``2 * CoV``, otherwise a beta anchored at zero.  The draws are then
    re-centred and re-scaled to hit the moments.
    """
    if not mean > 0:
        raise NonPositiveMean("mean must be positive")
    if not std > 0:
        raise ValidationError("std must be positive")
    if n < 10:
        raise TooFewSamples("need at least 10 samples")
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_REDRAWS):
        x = _standard_shape(float(skewness), std / mean, rng, n)
        x = (x - x.mean()) / x.std(ddof=1)
        out = mean + std * x
        # shapes anchored near zero can dip below it after the correction; redraw from the same stream
        if np.all(out > 0):
            return out
    raise ConvergenceFailure("could not draw a positive sample with these moments")


def dataset_samples(n: int = 2000, seed: int = 0) -> dict[str, np.ndarray]:
    return {row.name: synthetic_samples(row.mean, row.std, row.skewness, n, seed + i)
            for i, row in enumerate(DATASETS)}
