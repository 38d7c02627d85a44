"""Seeded simulations: a decision maker counting events, and geometric Brownian motion.

Every ensemble member draws from its own stream, derived from
``(seed, member_index)`` with :class:`numpy.random.SeedSequence`, so results
do not depend on how many members run or in what order.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from . import dist
from .dist import DistributionSpec, Family
from .errors import DegenerateInputError, DomainError, ResourceError
from .estimate import BinnedDensity, DensityEstimate, decision_weights, density_estimate
from .weightmap import CSV_FORMAT, CdfMapCurve

__all__ = [
    "SimConfig",
    "GbmConfig",
    "DmSimulation",
    "GbmResult",
    "member_rng",
    "sample",
    "simulate_dm",
    "gbm_simulate",
    "default_range",
]

GBM_BUDGET = 10 ** 8
_GBM_CHUNK = 2 ** 20


def default_range(spec: DistributionSpec) -> Tuple[float, float]:
    """Binning range used when none is configured: [-6, 6] Gaussian, [-10, 10] Student-t."""
    half = 6.0 if spec.family is Family.GAUSSIAN else 10.0
    return (spec.location - half, spec.location + half)


def _check_seed(seed):
    if int(seed) != seed or not (0 <= seed < 2 ** 64):
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


@dataclass
class SimConfig:
    """Settings for :func:`simulate_dm`.

    ``range`` defaults to :func:`default_range` of ``spec``; its width must be
    a whole number of bins.
    """

    spec: DistributionSpec
    series_length: int = 100
    bin_width: float = 0.4
    range: Optional[Tuple[float, float]] = None
    ensemble_size: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.spec, DistributionSpec):
            raise DomainError("spec must be a DistributionSpec")
        if int(self.series_length) != self.series_length or self.series_length < 1:
            raise DomainError(f"series_length must be a positive integer, got {self.series_length!r}")
        self.series_length = int(self.series_length)
        if not self.bin_width > 0:
            raise DomainError(f"bin_width must be > 0, got {self.bin_width!r}")
        if self.range is None:
            self.range = default_range(self.spec)
        lo, hi = (float(v) for v in self.range)
        if not lo < hi:
            raise DomainError(f"range must satisfy lo < hi, got {self.range!r}")
        self.range = (lo, hi)
        nb = (hi - lo) / self.bin_width
        if round(nb) < 1 or abs(nb - round(nb)) > 1e-9 * max(1.0, nb):
            raise DomainError(f"range width {hi - lo:g} is not a whole number of bins of {self.bin_width:g}")
        if int(self.ensemble_size) != self.ensemble_size or self.ensemble_size < 2:
            raise DomainError(f"ensemble_size must be an integer >= 2, got {self.ensemble_size!r}")
        self.ensemble_size = int(self.ensemble_size)
        self.seed = _check_seed(self.seed)

    @property
    def n_bins(self) -> int:
        return int(round((self.range[1] - self.range[0]) / self.bin_width))

    @property
    def bin_edges(self) -> np.ndarray:
        return self.range[0] + self.bin_width * np.arange(self.n_bins + 1)

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(), "series_length": self.series_length,
                "bin_width": self.bin_width, "range": list(self.range),
                "ensemble_size": self.ensemble_size, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        spec = d.pop("spec")
        spec = DistributionSpec.parse(spec) if isinstance(spec, str) else DistributionSpec.from_dict(spec)
        unknown = set(d) - {"series_length", "bin_width", "range", "ensemble_size", "seed"}
        if unknown:
            raise DomainError(f"unknown SimConfig fields: {sorted(unknown)}")
        if d.get("range") is not None:
            d["range"] = tuple(d["range"])
        return cls(spec=spec, **d)


@dataclass
class GbmConfig:
    """Geometric Brownian motion ``dx = x (drift dt + volatility dW)``."""

    drift: float = 0.05
    volatility: float = 0.2
    horizon: float = 100.0
    steps: int = 100
    trajectories: int = 10_000
    initial_value: float = 1.0
    seed: int = 0
    budget: int = GBM_BUDGET

    def __post_init__(self):
        if not math.isfinite(self.drift):
            raise DomainError("drift must be finite")
        if not (self.volatility >= 0 and math.isfinite(self.volatility)):
            raise DomainError(f"volatility must be >= 0, got {self.volatility!r}")
        if not self.horizon > 0:
            raise DomainError(f"horizon must be > 0, got {self.horizon!r}")
        for name in ("steps", "trajectories"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
            setattr(self, name, int(v))
        if not self.initial_value > 0:
            raise DomainError(f"initial_value must be > 0, got {self.initial_value!r}")
        self.seed = _check_seed(self.seed)

    def to_dict(self) -> dict:
        return {"drift": self.drift, "volatility": self.volatility, "horizon": self.horizon,
                "steps": self.steps, "trajectories": self.trajectories,
                "initial_value": self.initial_value, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "GbmConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown GbmConfig fields: {sorted(unknown)}")
        return cls(**d)


def member_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for ensemble member ``index`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


def sample(spec: DistributionSpec, n: int, seed=0) -> np.ndarray:
    """``n`` independent draws from ``spec``.

    Student-t variates are built as a standard normal divided by
    ``sqrt(chi2_nu / nu)``. ``seed`` may be an integer, a ``SeedSequence`` or a
    ``Generator``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    rng = _as_rng(seed)
    z = rng.standard_normal(int(n))
    if spec.family is Family.STUDENT_T:
        z = z / np.sqrt(rng.chisquare(spec.shape, int(n)) / spec.shape)
    return spec.location + spec.scale * z


@dataclass
class DmSimulation:
    """Outcome of :func:`simulate_dm`.

    ``single_run`` is the estimate from member 0 (with its own Poisson
    errors); ``ensemble_epsilon`` is the across-member standard deviation of
    ``p_hat`` per bin, which is the uncertainty the decision maker adds.
    """

    single_run: DensityEstimate
    ensemble_epsilon: np.ndarray
    config: SimConfig = field(repr=False)

    def __iter__(self):
        return iter((self.single_run, self.ensemble_epsilon))

    @property
    def cautious_estimate(self) -> DensityEstimate:
        return self.single_run.with_epsilon(self.ensemble_epsilon)

    def weights(self, multiplier: float = 1.0) -> np.ndarray:
        return decision_weights(self.cautious_estimate, multiplier)

    def cdf_map(self, do_spec: Optional[DistributionSpec] = None) -> CdfMapCurve:
        """Observer CDF (``do_spec``, default the generating spec) against the cautious weights.

        Both CDFs run over the binned range: the observer's mass per bin is
        renormalized to the range, as the weights are.
        """
        do_spec = self.config.spec if do_spec is None else do_spec
        edges = self.config.bin_edges
        F = np.asarray(dist.cdf(do_spec, edges))
        fp = (F - F[0]) / (F[-1] - F[0])
        fw = np.concatenate([[0.0], np.cumsum(self.weights() * self.config.bin_width)])
        fw = np.clip(fw, 0.0, 1.0)
        keep = np.concatenate([[True], np.diff(fp) > 0])
        return CdfMapCurve(fp[keep], fw[keep], do_spec.label, "dm-count")

    def to_csv(self, path=None) -> str:
        est = self.cautious_estimate
        buf = io.StringIO()
        np.savetxt(buf, np.column_stack([est.bin_centers, est.p_hat, est.epsilon, self.weights()]),
                   fmt=CSV_FORMAT, delimiter=",", header="x,p_hat,epsilon,w", comments="",
                   newline="\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text


def _bin_counts(draws, lo, width, n_bins):
    idx = np.floor((draws - lo) / width).astype(np.int64)
    inside = (idx >= 0) & (idx < n_bins)
    return np.bincount(idx[inside], minlength=n_bins)


def simulate_dm(config: SimConfig) -> DmSimulation:
    """Run ``ensemble_size`` independent series of ``series_length`` draws and bin them.

    Draws outside the binned range count toward ``T`` but land in no bin.

    Raises
    ------
    DegenerateInputError
        If the single observed series has no draws inside the range.
    """
    T = config.series_length
    lo = config.range[0]
    nb = config.n_bins
    counts = np.empty((config.ensemble_size, nb), dtype=np.int64)
    for i in range(config.ensemble_size):
        draws = sample(config.spec, T, member_rng(config.seed, i))
        counts[i] = _bin_counts(draws, lo, config.bin_width, nb)
    if counts[0].sum() == 0:
        raise DegenerateInputError("the observed series has no draws inside the binned range")
    tdx = T * config.bin_width
    ensemble_eps = (counts / tdx).std(axis=0, ddof=1)
    single = density_estimate(BinnedDensity(config.bin_edges, counts[0], T))
    return DmSimulation(single, ensemble_eps, config)


@dataclass
class GbmResult:
    ensemble_mean_growth: float
    median_time_growth: float
    log_growth: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter((self.ensemble_mean_growth, self.median_time_growth))

    def summary(self, config: GbmConfig) -> dict:
        return {
            "ensemble_mean_growth": self.ensemble_mean_growth,
            "median_time_growth": self.median_time_growth,
            "theory_ensemble": config.drift,
            "theory_time": config.drift - 0.5 * config.volatility ** 2,
        }

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        np.savetxt(buf, np.column_stack([np.arange(self.log_growth.size), self.log_growth]),
                   fmt=["%d", CSV_FORMAT], delimiter=",", header="trajectory,log_growth",
                   comments="", newline="\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text


def gbm_simulate(config: GbmConfig) -> GbmResult:
    """Simulate GBM with exact log-space increments and compare growth rates.

    Returns the growth rate of the ensemble mean, ``log(mean(x_t / x_0)) / t``,
    and the median over trajectories of the time-average growth rate
    ``log(x_t / x_0) / t``. ``log_growth`` holds ``log(x_t / x_0)`` per trajectory.
    """
    work = config.steps * config.trajectories
    if work > config.budget:
        raise ResourceError(f"steps * trajectories = {work} exceeds budget {config.budget}")
    rng = _as_rng(config.seed)
    dt = config.horizon / config.steps
    drift = (config.drift - 0.5 * config.volatility ** 2) * dt
    vol = config.volatility * math.sqrt(dt)
    log_x = np.zeros(config.trajectories)
    chunk = max(1, _GBM_CHUNK // config.trajectories)
    done = 0
    while done < config.steps:
        k = min(chunk, config.steps - done)
        inc = drift + vol * rng.standard_normal((k, config.trajectories))
        log_x += inc.sum(axis=0)
        done += k
    growth = log_x / config.horizon
    ensemble = (logsumexp(log_x) - math.log(config.trajectories)) / config.horizon
    return GbmResult(float(ensemble), float(np.median(growth)), log_x)
