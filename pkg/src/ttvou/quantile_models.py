"""Travel-time distributions seen through their quantile functions.

Every downstream quantity is an integral of the quantile function over an
upper probability interval, so each model exposes ``quantile``, ``isf``
(the quantile of an upper-tail probability, accurate when ``q`` is tiny),
``cdf``, ``pdf`` and ``partial_expectation(p) = int_p^1 quantile(x) dx``.

Models are immutable.  Use the constructors at the bottom of the module
(``lognormal_from_moments``, ``fit_lognormal_mle``, ``fit_burr``,
``empirical_from_samples``) rather than building parametric kinds by hand
when starting from data.
"""
from __future__ import annotations

import enum
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy import integrate, optimize, special

from ._normal import norm_cdf, norm_isf, norm_pdf, norm_ppf, norm_sf
from .errors import (ConvergenceFailure, MomentNotFinite, NonFinite,
                     NonPositiveMean, NonPositiveSample, ProbabilityOutOfRange,
                     TailDivergence, TooFewSamples, ValidationError, ZeroVariance)

QUAD_RTOL = 1e-9
QUAD_LIMIT = 10_000
# Light or left-skewed data push the Burr MLE toward its Weibull limit (k -> inf,
# scale -> inf); the search keeps k below this, where betainc is still accurate.
BURR_K_MAX = 1e3


class Kind(str, enum.Enum):
    LOGNORMAL = "lognormal"
    BURR_XII = "burr"
    EMPIRICAL = "empirical"
    DEGENERATE = "degenerate"
    UNIFORM_TEST = "uniform"


class Interpolation(str, enum.Enum):
    LINEAR = "linear"
    STEP = "step"


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_prob(p, *, open_interval=False):
    arr = np.asarray(p, dtype=float)
    if open_interval:
        bad = ~((arr > 0) & (arr < 1))
    else:
        bad = ~((arr >= 0) & (arr <= 1))
    if np.any(bad):
        raise ProbabilityOutOfRange(f"probability outside {'(0, 1)' if open_interval else '[0, 1]'}: {p!r}")
    return arr


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise NonFinite(f"non-finite input: {v!r}")


class QuantileModel(ABC):
    """A univariate travel-time distribution.

    Subclasses set ``mean`` and ``std`` to the exact moments of the
    distribution their quantile function defines.
    """

    kind: ClassVar[Kind]
    continuous: ClassVar[bool] = True
    mean: float
    std: float

    @abstractmethod
    def quantile(self, p):
        ...

    def isf(self, q):
        """Quantile at upper-tail probability ``q``, i.e. ``quantile(1 - q)``."""
        return self.quantile(1.0 - np.asarray(q, dtype=float))

    @abstractmethod
    def cdf(self, t):
        """Right-continuous distribution function of ``T``."""

    def pdf(self, t):
        raise NotImplementedError(f"{self.kind.value} model has no density")

    @abstractmethod
    def _upper_integral(self, p: float) -> float:
        """``int_p^1 quantile(x) dx`` for ``p`` in ``[0, 1]``."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        ...

    @abstractmethod
    def params(self) -> dict:
        ...

    def partial_expectation(self, p: float) -> float:
        p = float(_check_prob(p, open_interval=True))
        return self._upper_integral(p)

    def expected_excess(self, threshold: float) -> float:
        """``E[(T - threshold)^+]`` evaluated in the quantile domain."""
        p = float(self.cdf(threshold))
        if p >= 1.0:
            return 0.0
        if p <= 0.0:
            return self.mean - threshold
        return max(self._upper_integral(p) - (1.0 - p) * threshold, 0.0)

    @property
    def is_degenerate(self) -> bool:
        return self.std == 0.0

    def standardized(self) -> StandardizedView:
        return StandardizedView(self)

    def describe(self) -> dict:
        return {"kind": self.kind.value, **self.params(),
                "mean": self.mean, "std": self.std}


# ---------------------------------------------------------------------------
# parametric kinds


@dataclass(frozen=True)
class Lognormal(QuantileModel):
    xi: float
    psi: float
    mean: float = field(init=False)
    std: float = field(init=False)

    kind: ClassVar[Kind] = Kind.LOGNORMAL

    def __post_init__(self):
        _check_finite(self.xi, self.psi)
        if not self.psi > 0:
            raise ValidationError("lognormal log-scale psi must be positive")
        m = math.exp(self.xi + 0.5 * self.psi ** 2)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "std", m * math.sqrt(math.expm1(self.psi ** 2)))

    def quantile(self, p):
        p = _check_prob(p)
        return _scalar_or_array(np.exp(self.xi + self.psi * np.asarray(norm_ppf(p))))

    def isf(self, q):
        q = _check_prob(q)
        return _scalar_or_array(np.exp(self.xi + self.psi * np.asarray(norm_isf(q))))

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(np.where(t > 0, t, 1.0)) - self.xi) / self.psi
        return _scalar_or_array(np.where(t > 0, norm_cdf(z), 0.0))

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        safe = np.where(t > 0, t, 1.0)
        z = (np.log(safe) - self.xi) / self.psi
        return _scalar_or_array(np.where(t > 0, norm_pdf(z) / (safe * self.psi), 0.0))

    def _upper_integral(self, p):
        if p <= 0.0:
            return self.mean
        if p >= 1.0:
            return 0.0
        # E[T; T > Q(p)] = e^(xi + psi^2/2) * Phi(psi - Phi^-1(p))
        return self.mean * norm_sf(norm_ppf(p) - self.psi)

    def sample(self, rng, n):
        return rng.lognormal(self.xi, self.psi, size=n)

    def params(self):
        return {"xi": self.xi, "psi": self.psi}


@dataclass(frozen=True)
class BurrXII(QuantileModel):
    """Burr type XII with ``CDF(x) = 1 - (1 + (x/scale)**c)**(-k)``.

    Only parameterizations with ``c * k > 2`` are accepted so that mean and
    variance exist.
    """

    c: float
    k: float
    scale: float
    mean: float = field(init=False)
    std: float = field(init=False)

    kind: ClassVar[Kind] = Kind.BURR_XII

    def __post_init__(self):
        _check_finite(self.c, self.k, self.scale)
        if not (self.c > 0 and self.k > 0 and self.scale > 0):
            raise ValidationError("Burr XII parameters must be positive")
        if not self.c * self.k > 2:
            raise MomentNotFinite(f"Burr XII variance needs c*k > 2, got {self.c * self.k:.6g}")
        m1 = self._raw_moment(1)
        m2 = self._raw_moment(2)
        object.__setattr__(self, "mean", m1)
        object.__setattr__(self, "std", math.sqrt(max(m2 - m1 * m1, 0.0)))

    def _raw_moment(self, r):
        # E[T^r] = scale^r * k * B(k - r/c, 1 + r/c)
        c, k = self.c, self.k
        logb = special.betaln(k - r / c, 1.0 + r / c)
        return self.scale ** r * k * math.exp(logb)

    def quantile(self, p):
        p = _check_prob(p)
        with np.errstate(divide="ignore"):
            return self.isf(1.0 - p)

    def isf(self, q):
        q = _check_prob(q)
        with np.errstate(divide="ignore"):
            inner = np.expm1(-np.log(q) / self.k)
        return _scalar_or_array(self.scale * inner ** (1.0 / self.c))

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        u = np.where(t > 0, (np.maximum(t, 0.0) / self.scale) ** self.c, 0.0)
        return _scalar_or_array(-np.expm1(-self.k * np.log1p(u)))

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        y = np.maximum(t, 0.0) / self.scale
        with np.errstate(divide="ignore"):
            dens = (self.c * self.k / self.scale) * y ** (self.c - 1) * (1 + y ** self.c) ** (-self.k - 1)
        return _scalar_or_array(np.where(t > 0, dens, 0.0))

    def _upper_integral(self, p):
        if p <= 0.0:
            return self.mean
        if p >= 1.0:
            return 0.0
        # substitute q = w^k in int_0^(1-p) isf(q) dq:
        # scale * k * B(a, b) * I_{(1-p)^(1/k)}(a, b), a = k - 1/c, b = 1 + 1/c
        a = self.k - 1.0 / self.c
        b = 1.0 + 1.0 / self.c
        w0 = math.exp(math.log1p(-p) / self.k)
        return float(self.scale * self.k * math.exp(special.betaln(a, b)) * special.betainc(a, b, w0))

    def sample(self, rng, n):
        from scipy.stats import burr12
        return burr12(self.c, self.k, scale=self.scale).rvs(size=n, random_state=rng)

    def params(self):
        return {"c": self.c, "k": self.k, "scale": self.scale}


@dataclass(frozen=True)
class UniformTest(QuantileModel):
    """Uniform on ``[lower, upper]``; its quantile function is linear, which
    makes every tail integral hand-checkable."""

    lower: float
    upper: float
    mean: float = field(init=False)
    std: float = field(init=False)

    kind: ClassVar[Kind] = Kind.UNIFORM_TEST

    def __post_init__(self):
        _check_finite(self.lower, self.upper)
        if not self.upper > self.lower:
            raise ValidationError("uniform needs upper > lower")
        object.__setattr__(self, "mean", 0.5 * (self.lower + self.upper))
        object.__setattr__(self, "std", (self.upper - self.lower) / math.sqrt(12.0))

    @classmethod
    def from_moments(cls, mean: float, std: float) -> UniformTest:
        half = math.sqrt(3.0) * std
        return cls(mean - half, mean + half)

    def quantile(self, p):
        p = _check_prob(p)
        return _scalar_or_array(self.lower + (self.upper - self.lower) * p)

    def isf(self, q):
        q = _check_prob(q)
        return _scalar_or_array(self.upper - (self.upper - self.lower) * q)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(np.clip((t - self.lower) / (self.upper - self.lower), 0.0, 1.0))

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.lower) & (t <= self.upper)
        return _scalar_or_array(np.where(inside, 1.0 / (self.upper - self.lower), 0.0))

    def _upper_integral(self, p):
        return tail_integral_quad(self, p)

    def sample(self, rng, n):
        return rng.uniform(self.lower, self.upper, size=n)

    def params(self):
        return {"lower": self.lower, "upper": self.upper}


@dataclass(frozen=True)
class Degenerate(QuantileModel):
    value: float
    mean: float = field(init=False)
    std: float = field(init=False)

    kind: ClassVar[Kind] = Kind.DEGENERATE
    continuous: ClassVar[bool] = False

    def __post_init__(self):
        _check_finite(self.value)
        object.__setattr__(self, "mean", float(self.value))
        object.__setattr__(self, "std", 0.0)

    def quantile(self, p):
        p = _check_prob(p)
        return _scalar_or_array(np.full_like(p, self.value))

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(np.where(t >= self.value, 1.0, 0.0))

    def _upper_integral(self, p):
        return (1.0 - p) * self.value

    def sample(self, rng, n):
        return np.full(n, float(self.value))

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True, eq=False)
class Empirical(QuantileModel):
    """Distribution defined by order statistics.

    ``LINEAR`` interpolates the quantile between plotting positions
    ``(i - 0.5)/n`` and is flat outside them; ``STEP`` is the left-continuous
    inverse of the ECDF.  ``mean``/``std`` are the exact moments of the
    resulting distribution: the sample mean in both cases, and for ``STEP``
    the population (``ddof=0``) standard deviation.
    """

    samples: np.ndarray
    interpolation: Interpolation = Interpolation.LINEAR
    mean: float = field(init=False)
    std: float = field(init=False)

    kind: ClassVar[Kind] = Kind.EMPIRICAL
    continuous: ClassVar[bool] = False

    def __post_init__(self):
        x = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if x.size < 2:
            raise TooFewSamples("empirical model needs at least 2 samples")
        _check_finite(x)
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "interpolation", Interpolation(self.interpolation))
        n = x.size
        if self.interpolation is Interpolation.STEP:
            mean = float(x.mean())
            var = float(np.mean((x - mean) ** 2))
        else:
            knots, vals = self._knots()
            w = np.diff(knots)
            a, b = vals[:-1], vals[1:]
            mean = float(np.sum(w * (a + b) / 2))
            # centre before squaring to keep the variance well conditioned
            ac, bc = a - mean, b - mean
            var = float(np.sum(w * (ac * ac + ac * bc + bc * bc) / 3))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", math.sqrt(max(var, 0.0)))
        object.__setattr__(self, "_n", n)

    def _knots(self):
        x = self.samples
        n = x.size
        pos = (np.arange(1, n + 1) - 0.5) / n
        knots = np.concatenate(([0.0], pos, [1.0]))
        vals = np.concatenate(([x[0]], x, [x[-1]]))
        return knots, vals

    def quantile(self, p):
        p = _check_prob(p)
        x = self.samples
        n = x.size
        if self.interpolation is Interpolation.STEP:
            idx = np.clip(np.ceil(p * n - 1e-12).astype(int), 1, n) - 1
            return _scalar_or_array(x[idx])
        knots, vals = self._knots()
        return _scalar_or_array(np.interp(p, knots, vals))

    def isf(self, q):
        return self.quantile(1.0 - np.asarray(q, dtype=float))

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        x = self.samples
        n = x.size
        j = np.searchsorted(x, t, side="right")
        if self.interpolation is Interpolation.STEP:
            return _scalar_or_array(j / n)
        jj = np.clip(j, 1, n - 1)
        lo, hi = x[jj - 1], x[jj]
        span = np.where(hi > lo, hi - lo, 1.0)
        inner = (jj - 0.5) / n + (t - lo) / span / n
        out = np.where(j <= 0, 0.0, np.where(j >= n, 1.0, inner))
        return _scalar_or_array(out)

    def _upper_integral(self, p):
        x = self.samples
        n = x.size
        if p <= 0.0:
            return self.mean
        if p >= 1.0:
            return 0.0
        if self.interpolation is Interpolation.STEP:
            k = min(max(math.ceil(p * n - 1e-12), 1), n)
            return float(x[k - 1] * (k / n - p) + x[k:].sum() / n)
        knots, vals = self._knots()
        seg = int(np.searchsorted(knots, p, side="right")) - 1
        seg = min(max(seg, 0), knots.size - 2)
        k0, k1 = knots[seg], knots[seg + 1]
        v0, v1 = vals[seg], vals[seg + 1]
        vp = v0 + (v1 - v0) * (p - k0) / (k1 - k0)
        head = (k1 - p) * (vp + v1) / 2
        w = np.diff(knots[seg + 1:])
        tail = float(np.sum(w * (vals[seg + 1:-1] + vals[seg + 2:]) / 2))
        return float(head + tail)

    def sample(self, rng, n):
        if self.interpolation is Interpolation.STEP:
            return rng.choice(self.samples, size=n, replace=True)
        return np.asarray(self.quantile(rng.random(n)))

    def params(self):
        return {"n": int(self.samples.size), "interpolation": self.interpolation.value}


# ---------------------------------------------------------------------------
# standardized view


@dataclass(frozen=True)
class StandardizedView:
    """``X = (T - mean) / std`` for a non-degenerate model."""

    base: QuantileModel

    def __post_init__(self):
        if self.base.is_degenerate:
            from .errors import DegenerateVariability
            raise DegenerateVariability("cannot standardize a zero-variance model")

    @property
    def mu(self):
        return self.base.mean

    @property
    def sigma(self):
        return self.base.std

    def quantile_x(self, p):
        return _scalar_or_array((np.asarray(self.base.quantile(p)) - self.mu) / self.sigma)

    def cdf_x(self, x):
        return self.base.cdf(self.mu + self.sigma * np.asarray(x, dtype=float))

    def pdf_x(self, x):
        return _scalar_or_array(self.sigma * np.asarray(self.base.pdf(self.mu + self.sigma * np.asarray(x, dtype=float))))

    def tail_integral(self, p: float) -> float:
        """``int_p^1 quantile_x(x) dx`` for ``p`` in ``[0, 1]``."""
        return (self.base._upper_integral(p) - (1.0 - p) * self.mu) / self.sigma


# ---------------------------------------------------------------------------
# primitives


def partial_expectation(model: QuantileModel, p: float) -> float:
    """``int_p^1 F_T^{-1}(x) dx``; the building block of every tail measure."""
    return model.partial_expectation(p)


def tail_integral_quad(model: QuantileModel, p: float, rtol: float = QUAD_RTOL) -> float:
    """Adaptive Gauss-Kronrod evaluation of ``int_p^1 quantile``.

    The upper tail is mapped to ``u`` in ``[-log(1-p), inf)`` with
    ``x = 1 - exp(-u)``, and the quantile is evaluated through ``isf`` so
    that the tail probability never loses precision.
    """
    if p >= 1.0:
        return 0.0
    if p <= 0.0:
        p = 0.0
    u0 = -math.log1p(-p)

    def integrand(u):
        q = math.exp(-u)
        if q == 0.0:
            return 0.0
        return float(model.isf(q)) * q

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(integrand, u0, np.inf, epsabs=0.0, epsrel=rtol,
                                        limit=QUAD_LIMIT, full_output=True)[:3]
    if not np.isfinite(val) or err > max(100 * rtol * abs(val), 1e-300):
        raise TailDivergence(f"tail integral did not converge (value {val:.6g}, error {err:.3g})")
    return float(val)


# ---------------------------------------------------------------------------
# construction and fitting


def lognormal_from_moments(mean: float, std: float) -> Lognormal | Degenerate:
    _check_finite(mean, std)
    if not mean > 0:
        raise NonPositiveMean(f"mean must be positive, got {mean}")
    if std < 0:
        raise ValidationError("std must be nonnegative")
    if std == 0:
        return Degenerate(float(mean))
    psi2 = math.log1p((std / mean) ** 2)
    return Lognormal(math.log(mean) - psi2 / 2, math.sqrt(psi2))


def _positive_samples(samples, min_n):
    x = np.asarray(samples, dtype=float).ravel()
    _check_finite(x)
    if x.size < min_n:
        raise TooFewSamples(f"need at least {min_n} samples, got {x.size}")
    if np.any(x <= 0):
        raise NonPositiveSample("travel times must be positive")
    return x


def fit_lognormal_mle(samples) -> Lognormal | Degenerate:
    x = _positive_samples(samples, 2)
    logs = np.log(x)
    psi = float(np.std(logs))
    if psi == 0.0:
        return Degenerate(float(x[0]))
    return Lognormal(float(np.mean(logs)), psi)


def _burr_profile_k(c, log_s, logy):
    # closed-form MLE of k for fixed (c, scale): n / sum log(1 + (y/s)^c);
    # the likelihood is concave in k, so clipping gives the constrained optimum
    return min(logy.size / float(np.sum(np.logaddexp(0.0, c * (logy - log_s)))), BURR_K_MAX)


def fit_burr(samples, *, max_iter: int = 2000) -> BurrXII | Degenerate:
    """Maximum-likelihood Burr XII fit.

    ``k`` is profiled out in closed form (capped at ``BURR_K_MAX``);
    ``(log c, log scale)`` are searched with bounded Nelder-Mead from a small
    grid of seeds, keeping the best.
    """
    x = _positive_samples(samples, 10)
    if np.all(x == x[0]):
        return Degenerate(float(x[0]))
    med = float(np.median(x))
    logy = np.log(x / med)  # fit on the median-normalized scale
    n = logy.size
    sd_log = float(np.std(logy)) or 1e-3

    def nll(theta):
        c = math.exp(theta[0])
        log_s = theta[1]
        z = logy - log_s
        soft = np.logaddexp(0.0, c * z)
        k = min(n / float(np.sum(soft)), BURR_K_MAX)
        ll = n * (math.log(c) + math.log(k) - log_s) + (c - 1.0) * float(np.sum(z)) - (k + 1.0) * float(np.sum(soft))
        return -ll / n

    bounds = [(math.log(0.05), math.log(500.0)), (-30.0, 30.0)]
    seeds = [np.array([math.log(cm / sd_log), ls]) for cm in (0.8, 1.28, 2.5) for ls in (-1.0, 0.0, 1.0)]
    seeds.sort(key=nll)

    coarse = {"maxiter": max_iter, "maxfev": 2 * max_iter, "xatol": 1e-5, "fatol": 1e-9}
    fine = {"maxiter": max_iter, "maxfev": 2 * max_iter, "xatol": 1e-9, "fatol": 1e-13}
    best = None
    for start in seeds[:3]:
        res = optimize.minimize(nll, start, method="Nelder-Mead", bounds=bounds, options=coarse)
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is not None:
        best = optimize.minimize(nll, best.x, method="Nelder-Mead", bounds=bounds, options=fine)
    if best is None or not best.success or not np.isfinite(best.fun):
        raise ConvergenceFailure("Burr XII likelihood search did not converge")
    c = math.exp(best.x[0])
    k = _burr_profile_k(c, best.x[1], logy)
    scale = med * math.exp(best.x[1])
    if not c * k > 2:
        raise MomentNotFinite(f"best Burr XII fit has c*k = {c * k:.4g} <= 2")
    return BurrXII(c, k, scale)


def empirical_from_samples(samples, interpolation: Interpolation | str = Interpolation.LINEAR) -> Empirical:
    return Empirical(np.asarray(samples, dtype=float), Interpolation(interpolation))


# ---------------------------------------------------------------------------
# sample summaries


@dataclass(frozen=True)
class SampleSummary:
    """Mean, unbiased standard deviation, skewness and excess kurtosis.

    The shape statistics raise ``ZeroVariance`` for constant samples; mean and
    std are always available.
    """

    n: int
    mean: float
    std: float
    _skewness: float | None = field(default=None, repr=False)
    _kurtosis: float | None = field(default=None, repr=False)

    @property
    def skewness(self) -> float:
        if self._skewness is None:
            raise ZeroVariance("skewness undefined for a constant sample")
        return self._skewness

    @property
    def kurtosis(self) -> float:
        if self._kurtosis is None:
            raise ZeroVariance("kurtosis undefined for a constant sample")
        return self._kurtosis

    def as_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "std": self.std,
                "skewness": self._skewness, "kurtosis": self._kurtosis}


def summary_stats(samples) -> SampleSummary:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise TooFewSamples("summary statistics need at least 2 samples")
    _check_finite(x)
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d ** 2))
    std = float(np.std(x, ddof=1))
    if m2 == 0.0:
        return SampleSummary(x.size, mean, 0.0)
    skew = float(np.mean(d ** 3) / m2 ** 1.5)
    kurt = float(np.mean(d ** 4) / m2 ** 2 - 3.0)
    return SampleSummary(x.size, mean, std, skew, kurt)
