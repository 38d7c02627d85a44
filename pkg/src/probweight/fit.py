"""Levenberg-Marquardt fitting of weighting models to ``(fp, fw)`` data.

Positive parameters are fitted on a log scale so the solver runs
unconstrained. Standard errors come from ``s^2 (J^T J)^-1`` evaluated in the
natural parameters at the optimum, with ``s^2 = rss / (n - k)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, InputError, ProbWeightError
from .weightmap import CdfMapCurve, ModelKind, WeightingModel, evaluate, model_cdf_map

__all__ = [
    "LMOptions",
    "LMResult",
    "lm_minimize",
    "Dataset",
    "FitResult",
    "FitFailure",
    "DEFAULT_INIT",
    "fit_model",
    "compare_fits",
    "forward_jacobian",
    "central_jacobian",
]

DEFAULT_INIT = {
    ModelKind.TVERSKY_KAHNEMAN: {"gamma": 1.0},
    ModelKind.LATTIMORE: {"delta": 1.0, "gamma": 1.0},
    ModelKind.GAUSSIAN_MAP: {"mu": 0.0, "sigma": 1.0},
    ModelKind.T_MAP: {"nu": 5.0, "mu": 0.0},
}
MODEL_ORDER = (ModelKind.TVERSKY_KAHNEMAN, ModelKind.LATTIMORE,
               ModelKind.GAUSSIAN_MAP, ModelKind.T_MAP)
PREDICTION_POINTS = 201


@dataclass(frozen=True)
class LMOptions:
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    lambda_max: float = 1e16
    max_iter: int = 200
    gtol: float = 1e-10
    xtol: float = 1e-12
    ftol: float = 1e-15
    rel_step: float = 1e-6


@dataclass
class LMResult:
    params: np.ndarray
    residuals: np.ndarray
    jacobian: np.ndarray
    rss: float
    iterations: int
    converged: bool
    message: str
    rss_history: List[float] = field(default_factory=list)

    @property
    def grad_norm(self) -> float:
        return float(np.max(np.abs(self.jacobian.T @ self.residuals))) if self.residuals.size else 0.0


def forward_jacobian(fn, theta, f0, rel_step=1e-6):
    """Forward-difference Jacobian with step ``max(rel_step, rel_step * |theta_j|)``."""
    theta = np.asarray(theta, dtype=float)
    J = np.empty((f0.size, theta.size))
    for j in range(theta.size):
        h = max(rel_step, rel_step * abs(theta[j]))
        t = theta.copy()
        t[j] += h
        J[:, j] = (np.asarray(fn(t), dtype=float) - f0) / h
    return J


def central_jacobian(fn, theta, rel_step=1e-6):
    """Central-difference Jacobian, same step rule as :func:`forward_jacobian`."""
    theta = np.asarray(theta, dtype=float)
    cols = []
    for j in range(theta.size):
        h = max(rel_step, rel_step * abs(theta[j]))
        up, down = theta.copy(), theta.copy()
        up[j] += h
        down[j] -= h
        cols.append((np.asarray(fn(up), dtype=float) - np.asarray(fn(down), dtype=float)) / (2 * h))
    return np.column_stack(cols)


def _safe_eval(fn, theta):
    try:
        r = np.asarray(fn(theta), dtype=float)
    except (ProbWeightError, ValueError, FloatingPointError, ZeroDivisionError, OverflowError):
        return None
    return r if np.all(np.isfinite(r)) else None


def lm_minimize(residual_fn: Callable[[np.ndarray], np.ndarray], init: Sequence[float],
                options: Optional[LMOptions] = None, jacobian: Optional[Callable] = None) -> LMResult:
    """Minimize ``sum(residual_fn(theta)**2)`` by Levenberg-Marquardt.

    Each iteration solves ``(J^T J + lam diag(J^T J)) step = -J^T r``. A step
    that lowers the residual sum of squares is accepted and ``lam`` divided
    by ``lambda_down``; otherwise ``lam`` is multiplied by ``lambda_up`` and
    the step retried. A step where ``residual_fn`` raises or returns
    non-finite values counts as a rejection.

    Stops with ``converged=True`` when ``max|J^T r| < gtol``, when an accepted
    step changes the parameters by less than ``xtol`` relative, or when it
    lowers the rss by less than ``ftol`` relative. Running out of iterations
    or pushing ``lam`` past ``lambda_max`` ends with ``converged=False``.
    """
    opts = options or LMOptions()
    theta = np.array(init, dtype=float)
    r = _safe_eval(residual_fn, theta)
    if r is None:
        raise DomainError("residual function is not finite at the initial parameters")

    def jac(t, f):
        return np.asarray(jacobian(t), dtype=float) if jacobian else \
            forward_jacobian(residual_fn, t, f, opts.rel_step)

    rss = float(r @ r)
    history = [rss]
    J = jac(theta, r)
    lam = opts.lambda0
    converged, message = False, "maximum iterations reached"
    it = 0
    while it < opts.max_iter:
        g = J.T @ r
        if np.max(np.abs(g), initial=0.0) < opts.gtol:
            converged, message = True, "gradient below tolerance"
            break
        A = J.T @ J
        d = np.diag(A).copy()
        d = np.maximum(d, 1e-12 * max(d.max(initial=0.0), 1e-300))
        accepted = False
        step = np.zeros_like(theta)
        while lam <= opts.lambda_max:
            try:
                step = np.linalg.solve(A + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= opts.lambda_up
                continue
            trial = theta + step
            r_new = _safe_eval(residual_fn, trial)
            if r_new is not None:
                rss_new = float(r_new @ r_new)
                if rss_new < rss:
                    accepted = True
                    break
            lam *= opts.lambda_up
        if not accepted:
            message = "no decreasing step up to lambda_max"
            if rss == 0.0 or np.linalg.norm(step) <= opts.xtol * (np.linalg.norm(theta) + opts.xtol):
                converged, message = True, "no further decrease possible at tolerance"
            break
        it += 1
        small_step = np.linalg.norm(step) <= opts.xtol * (np.linalg.norm(theta) + opts.xtol)
        small_gain = (rss - rss_new) <= opts.ftol * rss
        theta, r, rss = trial, r_new, rss_new
        history.append(rss)
        lam = max(lam / opts.lambda_down, 1e-300)
        J = jac(theta, r)
        if small_step or small_gain:
            converged = True
            message = "step below xtol" if small_step else "rss reduction below ftol"
            break
    return LMResult(theta, r, J, rss, it, converged, message, history)


# --- datasets and model fitting ---------------------------------------------

@dataclass
class Dataset:
    """Empirical ``(fp, fw)`` points, e.g. digitized from a published figure."""

    fp: np.ndarray
    fw: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.fp = np.asarray(self.fp, dtype=float)
        self.fw = np.asarray(self.fw, dtype=float)
        if self.fp.ndim != 1 or self.fp.shape != self.fw.shape:
            raise InputError("fp and fw must be 1-d arrays of equal length")
        if self.fp.size < 2:
            raise InputError("a dataset needs at least two points")
        for name, arr in (("fp", self.fp), ("fw", self.fw)):
            if np.any(~((arr >= 0) & (arr <= 1))):
                raise InputError(f"{name} values must lie in [0, 1]")
        if np.unique(self.fp).size != self.fp.size:
            raise InputError("fp values must be distinct")

    def __len__(self):
        return self.fp.size

    @classmethod
    def from_csv(cls, path, label: Optional[str] = None) -> "Dataset":
        """Read a CSV with header ``fp,fw``; errors name the offending line."""
        fp, fw = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError(f"{path}: empty file") from None
            cols = [h.strip().lower() for h in header]
            if "fp" not in cols or "fw" not in cols:
                raise InputError(f"{path}, line 1: header must contain 'fp' and 'fw', got {header}")
            i_fp, i_fw = cols.index("fp"), cols.index("fw")
            for row in reader:
                lineno = reader.line_num
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    a, b = float(row[i_fp]), float(row[i_fw])
                except (ValueError, IndexError):
                    raise InputError(f"{path}, line {lineno}: cannot parse {row}") from None
                if not (0 <= a <= 1 and 0 <= b <= 1):
                    raise InputError(f"{path}, line {lineno}: values must lie in [0, 1]")
                fp.append(a)
                fw.append(b)
        return cls(np.array(fp), np.array(fw), str(path) if label is None else label)

    def to_csv(self, path=None) -> str:
        return CdfMapCurve(*self._sorted()).to_csv(path)

    def _sorted(self):
        order = np.argsort(self.fp)
        return self.fp[order], self.fw[order]


@dataclass
class FitResult:
    model: WeightingModel
    std_errors: Optional[Dict[str, float]]
    rss: float
    iterations: int
    converged: bool
    predicted: CdfMapCurve
    residuals: np.ndarray = field(repr=False)
    message: str = ""

    @property
    def kind(self) -> ModelKind:
        return self.model.kind

    @property
    def params(self) -> Dict[str, float]:
        return dict(self.model.params)

    def to_dict(self) -> dict:
        return {
            "model": self.model.kind.value,
            "params": self.params,
            "std_errors": self.std_errors,
            "rss": self.rss,
            "converged": self.converged,
            "iterations": self.iterations,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text


@dataclass
class FitFailure:
    """Placeholder in :func:`compare_fits` output for a model that could not be fitted."""

    kind: ModelKind
    error: str
    converged: bool = False

    def to_dict(self) -> dict:
        return {"model": self.kind.value, "error": self.error, "converged": False}


def _transform(kind, reparametrize):
    """Maps between natural parameters and solver coordinates."""
    names = kind.param_names
    logged = [reparametrize and n in kind.positive for n in names]

    def to_solver(values):
        return np.array([math.log(v) if lg else v for v, lg in zip(values, logged)])

    def to_natural(u):
        return tuple(math.exp(x) if lg else float(x) for x, lg in zip(u, logged))

    return to_solver, to_natural


def fit_model(kind, dataset: Dataset, init: Optional[Union[Dict[str, float], Sequence[float]]] = None,
              options: Optional[LMOptions] = None, reparametrize: bool = True) -> FitResult:
    """Least-squares fit of one weighting model to ``dataset``.

    Parameters
    ----------
    kind : ModelKind or str
        ``tk``, ``lattimore``, ``gauss`` or ``tmap``.
    dataset : Dataset
    init : dict or sequence, optional
        Starting values; defaults to :data:`DEFAULT_INIT`.
    reparametrize : bool
        Fit positive parameters on a log scale (default). With ``False`` they
        are fitted directly and steps leaving the domain are rejected.

    Raises
    ------
    InputError
        If the dataset has fewer than ``n_params + 1`` points.
    """
    kind = WeightingModel.parse_kind(kind)
    names = kind.param_names
    k = len(names)
    n = len(dataset)
    if n < k + 1:
        raise InputError(f"{kind.value} has {k} parameter(s) and needs at least {k + 1} points, got {n}")
    if init is None:
        init = DEFAULT_INIT[kind]
    if isinstance(init, dict):
        init = [init[nm] for nm in names]
    WeightingModel.create(kind, *init)

    to_solver, to_natural = _transform(kind, reparametrize)
    fp, fw = dataset.fp, dataset.fw

    def residuals(u):
        return np.asarray(evaluate(kind, to_natural(u), fp)) - fw

    # central differences keep the optimum independent of the log/linear choice
    step = (options or LMOptions()).rel_step
    lm = lm_minimize(residuals, to_solver(init), options,
                     jacobian=lambda u: central_jacobian(residuals, u, step))
    values = to_natural(lm.params)
    model = WeightingModel.create(kind, *values)
    resid = np.asarray(model(fp)) - fw
    rss = float(resid @ resid)

    message = lm.message
    std_errors = None
    J = central_jacobian(lambda t: np.asarray(evaluate(kind, tuple(t), fp)), np.array(values), step)
    if np.linalg.matrix_rank(J) < k:
        message += "; Jacobian is rank deficient, standard errors unavailable"
    elif n > k:
        s2 = rss / (n - k)
        try:
            cov = s2 * np.linalg.inv(J.T @ J)
            se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
            std_errors = {nm: float(v) for nm, v in zip(names, se)}
        except np.linalg.LinAlgError:
            message += "; normal matrix is singular, standard errors unavailable"

    predicted = model_cdf_map(model, np.linspace(0.0, 1.0, PREDICTION_POINTS))
    predicted.do_label = dataset.label
    return FitResult(model, std_errors, rss, lm.iterations, lm.converged, predicted, resid, message)


def compare_fits(dataset: Dataset, options: Optional[LMOptions] = None) -> List[Union[FitResult, FitFailure]]:
    """Fit all four models with default starting values, in a fixed order.

    A model that cannot be fitted yields a :class:`FitFailure` entry instead
    of aborting the batch.
    """
    out = []
    for kind in MODEL_ORDER:
        try:
            out.append(fit_model(kind, dataset, options=options))
        except ProbWeightError as exc:
            out.append(FitFailure(kind, str(exc)))
    return out
