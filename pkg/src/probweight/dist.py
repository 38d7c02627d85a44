"""Gaussian and Student-t distributions and the special functions behind them.

All public functions accept scalars or array-likes and broadcast like numpy
ufuncs. Scalar input gives a Python ``float`` back.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erfc, gammaln

from .errors import DomainError

__all__ = [
    "Family",
    "DistributionSpec",
    "pdf",
    "cdf",
    "quantile",
    "standardize",
    "reg_inc_beta",
    "norm_cdf",
    "norm_ppf",
]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

BETA_MAX_ITER = 200
BETA_TOL = 1e-14
_T_FAR = 1e100


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    STUDENT_T = "t"


@dataclass(frozen=True)
class DistributionSpec:
    """A location/scale(/shape) distribution, Gaussian or Student-t.

    ``shape`` is the number of degrees of freedom and must be given exactly
    when ``family`` is Student-t. A scale factor between two specs plays the
    role of the width ratio between a decision maker's and an observer's
    model; it is never stored separately.
    """

    family: Family
    location: float
    scale: float
    shape: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (math.isfinite(self.location)):
            raise DomainError(f"location must be finite, got {self.location!r}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"scale must be > 0, got {self.scale!r}")
        if self.family is Family.STUDENT_T:
            if self.shape is None or not (self.shape > 0):
                raise DomainError(f"shape must be > 0 for Student-t, got {self.shape!r}")
        elif self.shape is not None:
            raise DomainError("shape is only defined for the Student-t family")

    @classmethod
    def gaussian(cls, location: float = 0.0, scale: float = 1.0) -> "DistributionSpec":
        return cls(Family.GAUSSIAN, float(location), float(scale))

    @classmethod
    def student_t(cls, location: float = 0.0, scale: float = 1.0,
                  shape: float = 1.0) -> "DistributionSpec":
        return cls(Family.STUDENT_T, float(location), float(scale), float(shape))

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse ``gaussian:loc,scale`` or ``t:loc,scale,shape``."""
        try:
            name, _, rest = text.partition(":")
            values = [float(v) for v in rest.split(",")] if rest else []
        except ValueError as exc:
            raise DomainError(f"cannot parse distribution {text!r}: {exc}") from None
        name = name.strip().lower()
        if name in ("gaussian", "normal", "gauss", "n"):
            if len(values) != 2:
                raise DomainError(f"gaussian needs 'location,scale', got {text!r}")
            return cls.gaussian(*values)
        if name in ("t", "student", "studentt", "student_t"):
            if len(values) != 3:
                raise DomainError(f"t needs 'location,scale,shape', got {text!r}")
            return cls.student_t(*values)
        raise DomainError(f"unknown distribution family {name!r}")

    @property
    def label(self) -> str:
        if self.family is Family.GAUSSIAN:
            return f"gaussian:{self.location:g},{self.scale:g}"
        return f"t:{self.location:g},{self.scale:g},{self.shape:g}"

    def to_dict(self) -> dict:
        d = {"family": self.family.value, "location": self.location, "scale": self.scale}
        if self.shape is not None:
            d["shape"] = self.shape
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionSpec":
        return cls(Family(d["family"]), float(d["location"]), float(d["scale"]),
                   None if d.get("shape") is None else float(d["shape"]))


def _result(arr, like):
    """Return a float for scalar input, otherwise the array."""
    if np.ndim(like) == 0 and np.ndim(arr) == 0:
        return float(arr)
    return arr


def _check(spec):
    if not isinstance(spec, DistributionSpec):
        raise DomainError(f"expected DistributionSpec, got {type(spec).__name__}")


def standardize(x, location, scale):
    """Map ``x`` to ``(x - location) / scale``."""
    if not np.all(np.asarray(scale) > 0):
        raise DomainError(f"scale must be > 0, got {scale!r}")
    z = (np.asarray(x, dtype=float) - location) / scale
    return _result(z, x)


# --- standard normal --------------------------------------------------------

def norm_cdf(z):
    """Standard normal CDF."""
    z = np.asarray(z, dtype=float)
    return _result(0.5 * erfc(-z / _SQRT2), z)


def _norm_sf(z):
    return 0.5 * erfc(z / _SQRT2)


# Acklam's rational approximation, |rel err| < 1.15e-9 before refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _tail_approx(r):
    num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
    den = (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
    return num / den


def norm_ppf(q):
    """Inverse of the standard normal CDF.

    Rational approximation followed by one Newton step on the CDF; the
    upper half is refined against the survival function so that ``q`` close
    to 1 keeps full relative accuracy in ``1 - q``.
    """
    q = np.asarray(q, dtype=float)
    if np.any(~((q > 0) & (q < 1))):
        raise DomainError("quantile level must lie in the open interval (0, 1)")
    x = np.empty_like(q)
    lo = q < _P_LOW
    hi = q > 1 - _P_LOW
    mid = ~(lo | hi)
    if np.any(lo):
        x[lo] = _tail_approx(np.sqrt(-2.0 * np.log(q[lo])))
    if np.any(hi):
        x[hi] = -_tail_approx(np.sqrt(-2.0 * np.log1p(-q[hi])))
    if np.any(mid):
        s = q[mid] - 0.5
        r = s * s
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num / den

    dens = np.exp(-0.5 * x * x) / _SQRT2PI
    upper = q > 0.5
    # cdf(x) - q, written as (1 - q) - sf(x) in the upper half
    err = np.where(upper, (1.0 - q) - _norm_sf(x), norm_cdf(x) - q)
    x = x - err / dens
    return _result(x, q)


# --- regularized incomplete beta -------------------------------------------

def _betacf(x, a, b):
    """Continued fraction for I_x(a, b) by the modified Lentz method (vectorized)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < tiny, tiny, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= BETA_TOL
        if not active.any():
            break
    else:
        warnings.warn(f"incomplete beta continued fraction did not converge in "
                      f"{BETA_MAX_ITER} iterations", RuntimeWarning, stacklevel=3)
    return h


def _betainc(x, y, a, b):
    """I_x(a, b) with ``y = 1 - x`` supplied separately to avoid cancellation."""
    x, y, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, a, b)))
    out = np.empty(x.shape)
    zero = x <= 0
    one = y <= 0
    inner = ~(zero | one)
    out[zero] = 0.0
    out[one] = 1.0
    if np.any(inner):
        xi, yi, ai, bi = x[inner], y[inner], a[inner], b[inner]
        lbeta = gammaln(ai) + gammaln(bi) - gammaln(ai + bi)
        front = np.exp(ai * np.log(xi) + bi * np.log(yi) - lbeta)
        swap = xi > (ai + 1.0) / (ai + bi + 2.0)
        res = np.empty(xi.shape)
        direct = ~swap
        if np.any(direct):
            res[direct] = front[direct] * _betacf(xi[direct], ai[direct], bi[direct]) / ai[direct]
        if np.any(swap):
            res[swap] = 1.0 - front[swap] * _betacf(yi[swap], bi[swap], ai[swap]) / bi[swap]
        out[inner] = np.clip(res, 0.0, 1.0)
    return out


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta function I_x(a, b).

    Parameters
    ----------
    x : float or array_like
        Upper integration limit, in [0, 1].
    a, b : float or array_like
        Positive shape parameters.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~((xa >= 0) & (xa <= 1))):
        raise DomainError("reg_inc_beta requires 0 <= x <= 1")
    if np.any(~(np.asarray(a) > 0)) or np.any(~(np.asarray(b) > 0)):
        raise DomainError("reg_inc_beta requires a > 0 and b > 0")
    out = _betainc(xa, 1.0 - xa, a, b)
    return float(out) if out.ndim == 0 else out


# --- distribution functions ------------------------------------------------

def pdf(spec: DistributionSpec, x):
    """Probability density of ``spec`` at ``x``."""
    _check(spec)
    z = (np.asarray(x, dtype=float) - spec.location) / spec.scale
    if spec.family is Family.GAUSSIAN:
        out = np.exp(-0.5 * z * z) / (_SQRT2PI * spec.scale)
    else:
        nu = spec.shape
        log_norm = gammaln(0.5 * (nu + 1)) - gammaln(0.5 * nu) - 0.5 * math.log(math.pi * nu)
        out = np.exp(log_norm - 0.5 * (nu + 1) * np.log1p(z * z / nu)) / spec.scale
    return _result(out, x)


def _t_beta_args(z, nu):
    """``nu/(z^2+nu)`` and its complement without overflowing for huge ``|z|``."""
    a = np.abs(z)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        near = a <= math.sqrt(nu)
        z2 = np.where(near, a * a, 0.0)
        u2 = np.where(near, 0.0, (math.sqrt(nu) / a) ** 2)
        xb = np.where(near, nu / (z2 + nu), u2 / (1.0 + u2))
        yb = np.where(near, z2 / (z2 + nu), 1.0 / (1.0 + u2))
    return xb, yb


def _t_half_tail(z, nu):
    """``P(T > |z|)``; beyond ``|z| = 1e100`` the leading power term is exact in double."""
    z = np.asarray(z, dtype=float)
    a = 0.5 * nu
    far = np.abs(z) > _T_FAR
    xb, yb = _t_beta_args(np.where(far, 0.0, z), nu)
    out = 0.5 * _betainc(xb, yb, a, 0.5)
    if np.any(far):
        with np.errstate(divide="ignore"):
            log_x = math.log(nu) - 2.0 * np.log(np.abs(z[far]))
        lbeta = math.lgamma(a) + math.lgamma(0.5) - math.lgamma(a + 0.5)
        out = np.array(out, dtype=float)
        out[far] = 0.5 * np.exp(a * log_x - math.log(a) - lbeta)
    return out


def _t_cdf_std(z, nu):
    """Student-t CDF of the standardized variable, two-branch incomplete beta form."""
    z = np.asarray(z, dtype=float)
    half_tail = _t_half_tail(z, nu)
    return np.where(z >= 0, 1.0 - half_tail, half_tail)


def cdf(spec: DistributionSpec, x):
    """Cumulative distribution function of ``spec`` at ``x``."""
    _check(spec)
    z = (np.asarray(x, dtype=float) - spec.location) / spec.scale
    if spec.family is Family.GAUSSIAN:
        out = 0.5 * erfc(-z / _SQRT2)
    else:
        out = _t_cdf_std(z, spec.shape)
    return _result(out, x)


def _t_density_std(z, nu):
    log_norm = math.lgamma(0.5 * (nu + 1)) - math.lgamma(0.5 * nu) - 0.5 * math.log(math.pi * nu)
    with np.errstate(over="ignore"):
        return np.exp(log_norm - 0.5 * (nu + 1) * np.log1p(z * z / nu))


def _t_ppf_lower(p, nu):
    """Standardized t quantile for ``0 < p <= 0.5`` (result <= 0), vectorized."""
    shape = np.shape(p)
    p = np.atleast_1d(np.asarray(p, dtype=float)).ravel()
    if nu == 1.0:
        return np.tan(np.pi * (p - 0.5)).reshape(shape)
    if nu == 2.0:
        return ((2 * p - 1) / np.sqrt(2 * p * (1 - p))).reshape(shape)
    z = np.tan(np.pi * (p - 0.5)) if nu < 2.0 else np.asarray(norm_ppf(p), dtype=float)
    z = np.where(p == 0.5, 0.0, z)
    # bracket [lo, hi] with F(lo) <= p <= F(hi); hi = 0 always works
    hi = np.zeros_like(p)
    lo = np.minimum(z, -1.0)
    while True:
        high = _t_half_tail(lo, nu) > p
        if not high.any():
            break
        hi = np.where(high, lo, hi)
        with np.errstate(over="ignore"):
            lo = np.where(high, 2.0 * lo, lo)
    z = np.where(((lo < z) & (z < hi)) | (p == 0.5), z, 0.5 * (lo + hi))
    active = (p < 0.5) & np.isfinite(lo)
    for _ in range(100):
        if not active.any():
            break
        za = z[active]
        g = _t_half_tail(za, nu) - p[active]
        hi[active] = np.where(g > 0, za, hi[active])
        lo[active] = np.where(g < 0, za, lo[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            z_new = za - g / _t_density_std(za, nu)
        inside = (lo[active] < z_new) & (z_new < hi[active])
        z_new = np.where(inside, z_new, 0.5 * (lo[active] + hi[active]))
        z_new = np.where(g == 0.0, za, z_new)
        done = (g == 0.0) | (np.abs(z_new - za) <= 4e-16 * np.maximum(1.0, np.abs(za)))
        z[active] = z_new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return np.where(np.isfinite(lo), z, -np.inf).reshape(shape)


def quantile(spec: DistributionSpec, q):
    """Inverse CDF of ``spec`` at levels ``q`` in (0, 1)."""
    _check(spec)
    qa = np.asarray(q, dtype=float)
    if np.any(~((qa > 0) & (qa < 1))):
        raise DomainError("quantile level must lie in the open interval (0, 1)")
    if spec.family is Family.GAUSSIAN:
        z = np.asarray(norm_ppf(qa))
    else:
        nu = spec.shape
        zl = _t_ppf_lower(np.minimum(qa, 1.0 - qa), nu)
        z = np.where(qa <= 0.5, zl, -zl)
    return _result(spec.location + spec.scale * z, q)
