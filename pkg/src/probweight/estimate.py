"""Density estimation from counts and the cautious decision weights built on it.

A decision maker who counts ``n`` events in a bin of width ``dx`` over ``T``
observations estimates the density as ``n / (T dx)`` with Poisson standard
error ``sqrt(n) / (T dx)``. Adding that error to every estimate and
renormalizing inflates rare outcomes more than common ones, because the
relative error ``1 / sqrt(p T dx)`` grows as the density falls.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from . import dist
from .dist import DistributionSpec, Family
from .errors import DegenerateInputError, DomainError
from .weightmap import CSV_FORMAT, CdfMapCurve

__all__ = [
    "BinnedDensity",
    "DensityEstimate",
    "density_estimate",
    "expected_count",
    "binomial_band_mass",
    "decision_weights",
    "analytic_decision_weight_density",
    "analytic_cdf_map",
    "truncated_mass",
    "analytic_grid",
    "relative_error_decomposition",
    "estimate_to_csv",
]

_WIDTH_RTOL = 1e-12
GAUSSIAN_TRUNCATION_LIMIT = 1e-3


@dataclass
class BinnedDensity:
    """Histogram counts ``n(x)`` from a series of ``total_observations`` values.

    Observations outside the binned range count toward the total but fall
    in no bin, so ``counts.sum()`` may be smaller than the total.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    total_observations: int

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts)
        if self.bin_edges.ndim != 1 or self.bin_edges.size < 2:
            raise DomainError("need at least two bin edges")
        widths = np.diff(self.bin_edges)
        if np.any(widths <= 0):
            raise DomainError("bin edges must be strictly increasing")
        if np.max(np.abs(widths - widths.mean())) > _WIDTH_RTOL * widths.mean():
            raise DomainError("bins must have uniform width")
        if self.counts.shape != (self.bin_edges.size - 1,):
            raise DomainError("counts must have one entry per bin")
        if np.any(self.counts < 0) or not np.all(np.equal(np.mod(self.counts, 1), 0)):
            raise DomainError("counts must be non-negative integers")
        self.counts = self.counts.astype(np.int64)
        if int(self.total_observations) != self.total_observations or self.total_observations < 1:
            raise DomainError("total_observations must be a positive integer")
        self.total_observations = int(self.total_observations)
        if self.counts.sum() > self.total_observations:
            raise DomainError("binned counts exceed total_observations")

    @property
    def bin_width(self) -> float:
        return float((self.bin_edges[-1] - self.bin_edges[0]) / (self.bin_edges.size - 1))

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @classmethod
    def from_samples(cls, samples, bin_edges) -> "BinnedDensity":
        samples = np.asarray(samples, dtype=float)
        counts, _ = np.histogram(samples, bins=np.asarray(bin_edges, dtype=float))
        return cls(bin_edges, counts, samples.size)


@dataclass
class DensityEstimate:
    """Per-bin density estimate ``p_hat`` and its standard error ``epsilon``."""

    bin_centers: np.ndarray
    p_hat: np.ndarray
    epsilon: np.ndarray
    bin_width: float

    def __post_init__(self):
        self.bin_centers = np.asarray(self.bin_centers, dtype=float)
        self.p_hat = np.asarray(self.p_hat, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=float)
        n = self.bin_centers.size
        if self.p_hat.shape != (n,) or self.epsilon.shape != (n,):
            raise DomainError("bin_centers, p_hat and epsilon must have equal length")
        if np.any(self.p_hat < 0) or np.any(self.epsilon < 0):
            raise DomainError("p_hat and epsilon must be non-negative")
        if not self.bin_width > 0:
            raise DomainError("bin_width must be > 0")

    @property
    def bin_edges(self) -> np.ndarray:
        return np.append(self.bin_centers - 0.5 * self.bin_width,
                         self.bin_centers[-1] + 0.5 * self.bin_width)

    def with_epsilon(self, epsilon) -> "DensityEstimate":
        return DensityEstimate(self.bin_centers, self.p_hat, epsilon, self.bin_width)


def density_estimate(binned: BinnedDensity) -> DensityEstimate:
    """``p_hat = n / (T dx)`` and ``epsilon = sqrt(n) / (T dx)`` per bin."""
    tdx = binned.total_observations * binned.bin_width
    n = binned.counts.astype(float)
    return DensityEstimate(binned.bin_centers, n / tdx, np.sqrt(n) / tdx, binned.bin_width)


def expected_count(p: float, dx: float, T: int) -> Tuple[float, float]:
    """Expected count ``p dx T`` in a bin and its Poisson spread ``sqrt(p dx T)``."""
    if not (p > 0):
        raise DomainError(f"density must be > 0, got {p!r}")
    if not (dx > 0):
        raise DomainError(f"bin width must be > 0, got {dx!r}")
    if p * dx > 1 + 1e-12:
        raise DomainError(f"p * dx = {p * dx:g} exceeds 1")
    if int(T) != T or T < 1:
        raise DomainError(f"T must be a positive integer, got {T!r}")
    n = p * dx * T
    return n, math.sqrt(n)


def binomial_band_mass(p: float, T: int, lo: int, hi: int) -> float:
    """Exact probability that a Binomial(T, p) count lies in ``[lo, hi]``.

    Log probabilities are built from successive pmf ratios accumulated
    outward from the mode and normalized over a window holding all but a
    negligible fraction of the mass. This avoids the cancellation of
    ``log T!`` against ``log k! + log (T-k)!`` at large ``T``.
    """
    if not (0 < p < 1):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if int(T) != T or T < 1:
        raise DomainError(f"T must be a positive integer, got {T!r}")
    if not (0 <= lo <= hi <= T) or int(lo) != lo or int(hi) != hi:
        raise DomainError(f"need integers 0 <= lo <= hi <= T, got lo={lo!r}, hi={hi!r}")
    T, lo, hi = int(T), int(lo), int(hi)
    mode = min(T, int(math.floor((T + 1) * p)))
    reach = int(40 * math.sqrt(T * p * (1 - p))) + 50
    a = max(0, min(lo, mode - reach))
    b = min(T, max(hi, mode + reach))
    k = np.arange(a, b, dtype=float)
    # log pmf(k+1) - log pmf(k)
    step = np.log(T - k) - np.log(k + 1) + math.log(p) - math.log1p(-p)
    logw = np.empty(b - a + 1)
    m = mode - a
    logw[m] = 0.0
    logw[m + 1:] = np.cumsum(step[m:])
    logw[:m] = -np.cumsum(step[:m][::-1])[::-1]
    band = logsumexp(logw[lo - a:hi - a + 1])
    return float(min(1.0, math.exp(band - logsumexp(logw))))


def decision_weights(estimate: DensityEstimate, multiplier: float = 1.0) -> np.ndarray:
    """Normalized cautious weights ``(p_hat + k eps) / sum((p_hat + k eps) dx)``.

    ``multiplier`` is the number of standard errors ``k`` added to each
    estimate; the default of one is the reasonable-worst-case rule.
    """
    if not multiplier >= 0:
        raise DomainError(f"multiplier must be >= 0, got {multiplier!r}")
    raw = estimate.p_hat + multiplier * estimate.epsilon
    total = raw.sum() * estimate.bin_width
    if not total > 0:
        raise DegenerateInputError("all bins have zero estimate and zero error")
    return raw / total


def truncated_mass(spec: DistributionSpec, grid) -> float:
    """Probability mass of ``spec`` lying outside ``[grid[0], grid[-1]]``."""
    x = np.asarray(grid, dtype=float)
    return float(dist.cdf(spec, x[0]) + (1.0 - dist.cdf(spec, x[-1])))


def analytic_grid(spec: DistributionSpec, points: int = 20_001) -> np.ndarray:
    """Default evaluation grid: 10 scales either side for a Gaussian, 50 for Student-t."""
    half = 10.0 if spec.family is Family.GAUSSIAN else 50.0
    return np.linspace(spec.location - half * spec.scale, spec.location + half * spec.scale, points)


def _check_grid(grid):
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 3 or np.any(np.diff(x) <= 0):
        raise DomainError("grid must be a strictly increasing 1-d sequence of >= 3 points")
    return x


def analytic_decision_weight_density(spec: DistributionSpec, t_delta_x: float, grid=None,
                                     multiplier: float = 1.0) -> np.ndarray:
    """Cautious decision-weight density when the estimate equals the true density.

    Evaluates ``p(x) + k sqrt(p(x) / (T dx))`` on ``grid`` and normalizes it by
    trapezoidal integration over the grid. For Student-t with ``shape <= 1``
    the square-root term is not integrable on the real line, so the
    normalization is always taken over the finite grid.

    Raises
    ------
    DomainError
        For a Gaussian whose mass outside the grid exceeds 1e-3.
    """
    if not t_delta_x > 0:
        raise DomainError(f"t_delta_x must be > 0, got {t_delta_x!r}")
    x = _check_grid(analytic_grid(spec) if grid is None else grid)
    if spec.family is Family.GAUSSIAN:
        lost = truncated_mass(spec, x)
        if lost > GAUSSIAN_TRUNCATION_LIMIT:
            raise DomainError(f"grid truncates {lost:.3g} of the Gaussian mass "
                              f"(limit {GAUSSIAN_TRUNCATION_LIMIT:g})")
    p = np.asarray(dist.pdf(spec, x))
    raw = p + multiplier * np.sqrt(p / t_delta_x)
    return raw / np.trapezoid(raw, x)


def _cumtrapz(y, x):
    return np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])


def analytic_cdf_map(spec: DistributionSpec, t_delta_x: float, grid=None,
                     multiplier: float = 1.0) -> CdfMapCurve:
    """CDF map of the analytic cautious weights against ``spec`` itself.

    Both cumulative curves are taken over the grid: ``fp`` is the mass of
    ``spec`` inside ``[grid[0], x]`` renormalized to the grid, and ``fw`` the
    trapezoidal integral of the normalized weight density.
    """
    x = _check_grid(analytic_grid(spec) if grid is None else grid)
    w = analytic_decision_weight_density(spec, t_delta_x, x, multiplier)
    F = np.asarray(dist.cdf(spec, x))
    fp = (F - F[0]) / (F[-1] - F[0])
    fw = np.clip(_cumtrapz(w, x), 0.0, 1.0)
    keep = np.concatenate([[True], np.diff(fp) > 0])
    return CdfMapCurve(fp[keep], fw[keep], spec.label, f"cautious(Tdx={t_delta_x:g})")


def relative_error_decomposition(p, epsilon, bin_width: float = 1.0):
    """Relative errors ``eps / p`` and their expectation under ``p``.

    Returns
    -------
    rel_errors : ndarray
        ``eps_i / p_i``; NaN in bins with ``p_i = 0``, which are excluded.
    weighted_mean : float
        ``sum(p_i (eps_i / p_i) dx) / sum(p_i dx)`` over the included bins.
        Cautious weights exceed the normalized ``p`` exactly where the
        relative error exceeds this value.
    """
    p = np.asarray(p, dtype=float)
    eps = np.asarray(epsilon, dtype=float)
    if p.shape != eps.shape:
        raise DomainError("p and epsilon must have the same shape")
    if np.any(p < 0) or np.any(eps < 0):
        raise DomainError("p and epsilon must be non-negative")
    valid = p > 0
    if not np.any(valid):
        raise DegenerateInputError("no bin has positive density")
    rel = np.full(p.shape, np.nan)
    rel[valid] = eps[valid] / p[valid]
    weighted = float(np.sum(p[valid] * rel[valid] * bin_width) / np.sum(p[valid] * bin_width))
    return rel, weighted


def estimate_to_csv(estimate: DensityEstimate, weights: Optional[Sequence[float]] = None,
                    path=None) -> str:
    """Serialize an estimate as ``x,p_hat,epsilon,w`` rows."""
    w = decision_weights(estimate) if weights is None else np.asarray(weights, dtype=float)
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack([estimate.bin_centers, estimate.p_hat, estimate.epsilon, w]),
               fmt=CSV_FORMAT, delimiter=",", header="x,p_hat,epsilon,w", comments="",
               newline="\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text
