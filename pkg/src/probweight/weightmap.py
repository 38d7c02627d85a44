"""Parametric weighting functions and CDF/PDF maps between two models.

A weighting function takes the observer's cumulative probability ``fp`` to
the decision maker's cumulative weight ``fw``. Four families are provided
(Tversky-Kahneman, Lattimore, Gaussian location/scale, Student-t
location/shape); :func:`numeric_cdf_map` builds the same kind of curve
directly from a pair of distributions.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from . import dist
from .dist import DistributionSpec, Family
from .errors import DomainError

__all__ = [
    "ModelKind",
    "WeightingModel",
    "CdfMapCurve",
    "tk_weight",
    "lattimore_weight",
    "gaussian_map",
    "t_map",
    "gaussian_pdf_map",
    "default_grid",
    "numeric_cdf_map",
    "model_cdf_map",
]

CSV_FORMAT = "%.12g"


def _fp_array(fp):
    fp = np.asarray(fp, dtype=float)
    if np.any(~((fp >= 0) & (fp <= 1))):
        raise DomainError("fp must lie in [0, 1]")
    return fp


def _as_output(out, like):
    return float(out) if np.ndim(like) == 0 else out


def tk_weight(fp, gamma):
    """Tversky-Kahneman weighting ``fp^g / (fp^g + (1 - fp)^g)^(1/g)``."""
    if not gamma > 0:
        raise DomainError(f"gamma must be > 0, got {gamma!r}")
    p = _fp_array(fp)
    with np.errstate(divide="ignore"):
        u = p ** gamma
        v = (1.0 - p) ** gamma
        out = u / (u + v) ** (1.0 / gamma)
    return _as_output(out, fp)


def lattimore_weight(fp, delta, gamma):
    """Lattimore weighting ``d fp^g / (d fp^g + (1 - fp)^g)``."""
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta!r}")
    if not gamma > 0:
        raise DomainError(f"gamma must be > 0, got {gamma!r}")
    p = _fp_array(fp)
    u = delta * p ** gamma
    out = u / (u + (1.0 - p) ** gamma)
    return _as_output(out, fp)


def _open_interval_map(fp, inner):
    """Apply ``inner`` on (0, 1); 0 and 1 map to themselves without evaluation."""
    p = _fp_array(fp)
    out = np.array(p, dtype=float, copy=True)
    interior = (p > 0) & (p < 1)
    if np.any(interior):
        out[interior] = inner(p[interior])
    return _as_output(out, fp)


def gaussian_map(fp, mu, sigma):
    """Gaussian location/scale map ``Phi((Phi^-1(fp) - mu) / sigma)``."""
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    return _open_interval_map(fp, lambda p: dist.norm_cdf((dist.norm_ppf(p) - mu) / sigma))


def t_map(fp, nu, mu):
    """Student-t map: the CDF of t(mu, 1, nu) evaluated at ``Phi^-1(fp)``.

    The observer is taken to be standard normal and the scale of the
    decision maker's t-distribution is fixed at 1.
    """
    if not nu > 0:
        raise DomainError(f"nu must be > 0, got {nu!r}")
    if not math.isfinite(mu):
        raise DomainError(f"mu must be finite, got {mu!r}")
    spec = DistributionSpec.student_t(mu, 1.0, nu)
    return _open_interval_map(fp, lambda p: dist.cdf(spec, dist.norm_ppf(p)))


def gaussian_pdf_map(p, alpha, sigma):
    """Decision-weight density as a function of probability density.

    For an observer N(mu, sigma^2) and a decision maker N(mu, (alpha sigma)^2),
    eliminating x between the two densities gives the power law
    ``w = p^(1/alpha^2) (2 pi sigma^2)^((1 - alpha^2) / (2 alpha^2)) / alpha``.

    Parameters
    ----------
    p : float or array_like
        Observer density values, in ``(0, 1/sqrt(2 pi sigma^2)]``.
    alpha : float
        Ratio of the decision maker's scale to the observer's.
    sigma : float
        Observer scale.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha!r}")
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    pa = np.asarray(p, dtype=float)
    peak = 1.0 / math.sqrt(2 * math.pi * sigma * sigma)
    if np.any(~((pa > 0) & (pa <= peak * (1 + 1e-12)))):
        raise DomainError(f"density must lie in (0, {peak:.6g}] for sigma={sigma:g}")
    a2 = alpha * alpha
    log_w = np.log(pa) / a2 + (1 - a2) / (2 * a2) * math.log(2 * math.pi * sigma * sigma) \
        - math.log(alpha)
    return _as_output(np.exp(log_w), p)


class ModelKind(str, enum.Enum):
    TVERSKY_KAHNEMAN = "tk"
    LATTIMORE = "lattimore"
    GAUSSIAN_MAP = "gauss"
    T_MAP = "tmap"

    @property
    def param_names(self):
        return _PARAM_NAMES[self]

    @property
    def positive(self):
        """Names of parameters constrained to be positive."""
        return _POSITIVE[self]


_PARAM_NAMES = {
    ModelKind.TVERSKY_KAHNEMAN: ("gamma",),
    ModelKind.LATTIMORE: ("delta", "gamma"),
    ModelKind.GAUSSIAN_MAP: ("mu", "sigma"),
    ModelKind.T_MAP: ("nu", "mu"),
}
_POSITIVE = {
    ModelKind.TVERSKY_KAHNEMAN: ("gamma",),
    ModelKind.LATTIMORE: ("delta", "gamma"),
    ModelKind.GAUSSIAN_MAP: ("sigma",),
    ModelKind.T_MAP: ("nu",),
}
_KIND_ALIASES = {
    "tk": ModelKind.TVERSKY_KAHNEMAN, "tversky-kahneman": ModelKind.TVERSKY_KAHNEMAN,
    "lattimore": ModelKind.LATTIMORE, "lat": ModelKind.LATTIMORE,
    "gauss": ModelKind.GAUSSIAN_MAP, "gaussian": ModelKind.GAUSSIAN_MAP,
    "tmap": ModelKind.T_MAP, "t": ModelKind.T_MAP,
}

_MONOTONE_GRID = np.linspace(0.0, 1.0, 10_001)


@dataclass(frozen=True)
class WeightingModel:
    """One of the four parametric ``fp -> fw`` maps with its parameters.

    Construction validates parameter domains and rejects parameter sets for
    which the map is not strictly increasing on [0, 1] (Tversky-Kahneman
    with small ``gamma`` folds back on itself).
    """

    kind: ModelKind
    params: Dict[str, float]

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        names = kind.param_names
        if set(self.params) != set(names):
            raise DomainError(f"{kind.value} expects parameters {names}, got {tuple(self.params)}")
        params = {k: float(self.params[k]) for k in names}
        object.__setattr__(self, "params", params)
        for name, value in params.items():
            if not math.isfinite(value):
                raise DomainError(f"{kind.value}: {name} must be finite")
            if name in kind.positive and not value > 0:
                raise DomainError(f"{kind.value}: {name} must be > 0, got {value!r}")
        if kind is ModelKind.TVERSKY_KAHNEMAN:
            fw = self(_MONOTONE_GRID)
            if np.any(np.diff(fw) <= 0):
                raise DomainError(f"tk: gamma={params['gamma']:g} gives a non-monotone map")

    @classmethod
    def create(cls, kind, *values) -> "WeightingModel":
        kind = cls.parse_kind(kind)
        names = kind.param_names
        if len(values) != len(names):
            raise DomainError(f"{kind.value} expects {len(names)} parameters {names}")
        return cls(kind, dict(zip(names, values)))

    @staticmethod
    def parse_kind(name) -> ModelKind:
        if isinstance(name, ModelKind):
            return name
        try:
            return _KIND_ALIASES[str(name).strip().lower()]
        except KeyError:
            raise DomainError(f"unknown model kind {name!r}") from None

    @classmethod
    def parse(cls, text: str) -> "WeightingModel":
        """Parse ``tk:0.65``, ``lattimore:0.67,0.58``, ``gauss:0.38,1.6`` or ``tmap:1.27,0.4``."""
        name, _, rest = text.partition(":")
        try:
            values = [float(v) for v in rest.split(",")] if rest else []
        except ValueError as exc:
            raise DomainError(f"cannot parse model {text!r}: {exc}") from None
        return cls.create(name, *values)

    @property
    def values(self):
        return tuple(self.params[k] for k in self.kind.param_names)

    @property
    def label(self) -> str:
        return f"{self.kind.value}:" + ",".join(f"{v:g}" for v in self.values)

    def __call__(self, fp):
        return evaluate(self.kind, self.values, fp)


def evaluate(kind: ModelKind, values: Sequence[float], fp):
    """Evaluate a model given as ``(kind, parameter tuple)`` without building it."""
    if kind is ModelKind.TVERSKY_KAHNEMAN:
        return tk_weight(fp, *values)
    if kind is ModelKind.LATTIMORE:
        return lattimore_weight(fp, *values)
    if kind is ModelKind.GAUSSIAN_MAP:
        return gaussian_map(fp, *values)
    if kind is ModelKind.T_MAP:
        return t_map(fp, *values)
    raise DomainError(f"unknown model kind {kind!r}")


@dataclass
class CdfMapCurve:
    """Sampled ``(fp, fw)`` curve with strictly increasing ``fp``."""

    fp: np.ndarray
    fw: np.ndarray
    do_label: str = ""
    dm_label: str = ""

    def __post_init__(self):
        self.fp = np.asarray(self.fp, dtype=float)
        self.fw = np.asarray(self.fw, dtype=float)
        if self.fp.shape != self.fw.shape or self.fp.ndim != 1:
            raise DomainError("fp and fw must be 1-d arrays of equal length")
        if self.fp.size and np.any(np.diff(self.fp) <= 0):
            raise DomainError("fp must be strictly increasing")
        tol = 1e-12
        if np.any((self.fw < -tol) | (self.fw > 1 + tol)) or np.any(np.isnan(self.fw)):
            raise DomainError("fw must lie in [0, 1]")

    def __len__(self):
        return self.fp.size

    @property
    def points(self):
        return list(zip(self.fp.tolist(), self.fw.tolist()))

    def interpolate(self, fp):
        """Linear interpolation of ``fw`` at ``fp``."""
        return np.interp(fp, self.fp, self.fw)

    def max_deviation(self) -> float:
        """Largest ``|fw - fp|`` over the sampled points."""
        return float(np.max(np.abs(self.fw - self.fp)))

    def is_inverse_s(self, low: float = 0.1, high: float = 0.9) -> bool:
        """True when the curve is above the diagonal at ``low`` and below at ``high``."""
        return bool(self.interpolate(low) > low and self.interpolate(high) < high)

    def to_csv(self, path=None) -> str:
        """Write ``fp,fw`` rows; rows whose printed fp repeats the previous one are dropped."""
        lines, last = ["fp,fw"], None
        for a, b in zip(self.fp, self.fw):
            key = CSV_FORMAT % a
            if key != last:
                lines.append(f"{key},{CSV_FORMAT % b}")
                last = key
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "CdfMapCurve":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])


def default_grid(*specs: DistributionSpec, points: int = 2001, half_width: float = 10.0):
    """Evenly spaced x grid covering every spec to ``half_width`` of the largest scale."""
    if not specs:
        raise DomainError("default_grid needs at least one distribution")
    s = max(sp.scale for sp in specs)
    lo = min(sp.location for sp in specs) - half_width * s
    hi = max(sp.location for sp in specs) + half_width * s
    return np.linspace(lo, hi, points)


def _strictly_increasing(fp, fw):
    # tails saturate in double precision; keep the first of each run of equal fp
    keep = np.concatenate([[True], np.diff(fp) > 0])
    return fp[keep], fw[keep]


def numeric_cdf_map(do_spec: DistributionSpec, dm_spec: DistributionSpec,
                    grid: Optional[Sequence[float]] = None) -> CdfMapCurve:
    """Map the observer's CDF to the decision maker's CDF on a common x grid.

    Evaluates both CDFs at every grid point and pairs them. Grid points where
    the observer's CDF has saturated (repeats its previous value in floating
    point) are dropped so that ``fp`` stays strictly increasing.

    Parameters
    ----------
    do_spec, dm_spec : DistributionSpec
        Observer and decision-maker models.
    grid : array_like, optional
        Strictly increasing x values spanning at least eight of the larger
        scale beyond both locations. Defaults to :func:`default_grid`.
    """
    if not isinstance(do_spec, DistributionSpec) or not isinstance(dm_spec, DistributionSpec):
        raise DomainError("numeric_cdf_map needs two DistributionSpec values")
    if grid is None:
        grid = default_grid(do_spec, dm_spec)
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise DomainError("grid must be a strictly increasing 1-d sequence")
    s = max(do_spec.scale, dm_spec.scale)
    need_lo = min(do_spec.location, dm_spec.location) - 8 * s
    need_hi = max(do_spec.location, dm_spec.location) + 8 * s
    if x[0] > need_lo or x[-1] < need_hi:
        raise DomainError(f"grid [{x[0]:g}, {x[-1]:g}] must span [{need_lo:g}, {need_hi:g}]")
    fp, fw = _strictly_increasing(np.asarray(dist.cdf(do_spec, x)), np.asarray(dist.cdf(dm_spec, x)))
    return CdfMapCurve(fp, fw, do_spec.label, dm_spec.label)


def model_cdf_map(model: WeightingModel, fp_grid: Sequence[float]) -> CdfMapCurve:
    """Evaluate ``model`` on a strictly increasing grid of ``fp`` values."""
    if not isinstance(model, WeightingModel):
        raise DomainError("model_cdf_map needs a WeightingModel")
    fp = np.asarray(fp_grid, dtype=float)
    if fp.ndim != 1 or np.any(np.diff(fp) <= 0):
        raise DomainError("fp grid must be strictly increasing")
    return CdfMapCurve(fp, np.asarray(model(fp), dtype=float), "identity", model.label)
