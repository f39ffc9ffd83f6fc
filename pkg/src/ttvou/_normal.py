"""Standard normal CDF and quantile.

The quantile is Wichura's algorithm AS 241 (PPND16, Applied Statistics 37,
1988): three rational approximations of degree 7/7,

* central region ``|p - 0.5| <= 0.425``: ``x = q A(r) / B(r)`` with
  ``q = p - 0.5`` and ``r = 0.180625 - q**2``;
* intermediate tail ``sqrt(-log(min(p, 1-p))) <= 5``: ``C(r - 1.6) / D(r - 1.6)``;
* far tail: ``E(r - 5) / F(r - 5)``,

with published relative accuracy of about 1e-16.  The CDF goes through the
C library ``erfc``, which is accurate to a few ulps over the whole line.
"""
import math

import numpy as np

_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4, 5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15)

_SQRT2 = math.sqrt(2.0)


def _poly(coef, x):
    out = np.zeros_like(x) + coef[-1]
    for c in reversed(coef[:-1]):
        out = out * x + c
    return out


def _ppnd16(p):
    p = np.asarray(p, dtype=float)
    q = p - 0.5
    central = np.abs(q) <= 0.425

    r = 0.180625 - q * q
    x_central = q * _poly(_A, r) / _poly(_B, r)

    with np.errstate(divide="ignore", invalid="ignore"):
        rt = np.sqrt(-np.log(np.minimum(p, 1.0 - p)))
        x_mid = _poly(_C, rt - 1.6) / _poly(_D, rt - 1.6)
        x_far = _poly(_E, rt - 5.0) / _poly(_F, rt - 5.0)
    x_tail = np.where(rt <= 5.0, x_mid, x_far)
    x_tail = np.where(q < 0, -x_tail, x_tail)

    x = np.where(central, x_central, x_tail)
    x = np.where(p == 0.0, -np.inf, x)
    x = np.where(p == 1.0, np.inf, x)
    return np.where((p < 0) | (p > 1) | np.isnan(p), np.nan, x)


def norm_ppf(p):
    """Inverse of the standard normal CDF."""
    x = _ppnd16(p)
    return float(x) if x.ndim == 0 else x


def norm_isf(q):
    """``norm_ppf(1 - q)`` without forming ``1 - q``."""
    x = -_ppnd16(q)
    return float(x) if x.ndim == 0 else x


_erfc = np.vectorize(math.erfc, otypes=[float])


def norm_cdf(x):
    x = np.asarray(x, dtype=float)
    out = 0.5 * _erfc(-x / _SQRT2)
    return float(out) if out.ndim == 0 else out


def norm_sf(x):
    x = np.asarray(x, dtype=float)
    out = 0.5 * _erfc(x / _SQRT2)
    return float(out) if out.ndim == 0 else out


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out
