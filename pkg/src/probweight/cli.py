"""Command-line front end: ``probweight {map,simulate,fit,ergodicity}``.

Each command writes plain CSV/JSON data files plus a ``manifest.json`` into
the output directory (``--out``, else ``$PROBWEIGHT_OUT``, else the current
directory). Outputs are byte-identical for identical resolved configs.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical or
degenerate-input error.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, dist
from .dist import DistributionSpec
from .errors import DegenerateInputError, DomainError, InputError, ProbWeightError, ResourceError
from .estimate import analytic_cdf_map, analytic_decision_weight_density, analytic_grid
from .fit import Dataset, FitFailure, LMOptions, compare_fits, fit_model
from .montecarlo import GbmConfig, SimConfig, gbm_simulate, simulate_dm
from .weightmap import CSV_FORMAT, WeightingModel, default_grid, model_cdf_map, numeric_cdf_map

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
OUT_ENV = "PROBWEIGHT_OUT"


class ConfigError(ProbWeightError):
    pass


def _spec(field, text):
    try:
        return DistributionSpec.parse(text)
    except DomainError as exc:
        raise ConfigError(f"{field}: {exc}") from None


def _model(field, text):
    try:
        return WeightingModel.parse(text)
    except DomainError as exc:
        raise ConfigError(f"{field}: {exc}") from None


def _pair(field, text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        try:
            vals = [float(v) for v in str(text).split(",")]
        except ValueError:
            raise ConfigError(f"{field}: expected 'lo,hi', got {text!r}") from None
    if len(vals) != 2:
        raise ConfigError(f"{field}: expected 'lo,hi', got {text!r}")
    return (float(vals[0]), float(vals[1]))


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"--config: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("--config: top level must be a JSON object")
    return data


def _out_dir(args):
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_text(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_columns(path, header, columns):
    import io
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(columns), fmt=CSV_FORMAT, delimiter=",",
               header=header, comments="", newline="\n")
    _write_text(path, buf.getvalue())


def config_hash(resolved: dict) -> str:
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _manifest(out, command, resolved, seed, files):
    manifest = {
        "command": command,
        "config": resolved,
        "config_hash": config_hash(resolved),
        "seed": seed,
        "tool_version": __version__,
        "output_files": sorted(files),
    }
    _write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# --- commands ----------------------------------------------------------------

def cmd_map(args) -> int:
    cfg = _load_config(args.config)
    do_text = cfg.get("do", args.do)
    dm_text = cfg.get("dm", args.dm)
    model_text = cfg.get("model", args.model)
    points = int(cfg.get("points", args.points))
    rng = _pair("--range", cfg.get("range", args.range))
    if model_text is not None and (do_text or dm_text):
        raise ConfigError("--model cannot be combined with --do/--dm")
    out = _out_dir(args)
    files = ["cdf_map.csv"]
    if model_text is not None:
        model = _model("--model", model_text)
        fp = np.linspace(0.0, 1.0, points)
        model_cdf_map(model, fp).to_csv(out / "cdf_map.csv")
        resolved = {"model": model.label, "points": points}
    else:
        if not (do_text and dm_text):
            raise ConfigError("map needs either --model or both --do and --dm")
        do_spec = _spec("--do", do_text)
        dm_spec = _spec("--dm", dm_text)
        grid = default_grid(do_spec, dm_spec, points=points) if rng is None \
            else np.linspace(rng[0], rng[1], points)
        try:
            curve = numeric_cdf_map(do_spec, dm_spec, grid)
        except DomainError as exc:
            raise ConfigError(f"--range: {exc}") from None
        curve.to_csv(out / "cdf_map.csv")
        if args.pdf:
            _write_columns(out / "pdf_map.csv", "x,p,w",
                           [grid, dist.pdf(do_spec, grid), dist.pdf(dm_spec, grid)])
            files.append("pdf_map.csv")
        resolved = {"do": do_spec.label, "dm": dm_spec.label, "points": points,
                    "range": [float(grid[0]), float(grid[-1])], "pdf": bool(args.pdf)}
    _manifest(out, "map", resolved, None, files)
    print(f"wrote {', '.join(files)} to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    spec_text = cfg.get("spec", args.spec)
    if spec_text is None:
        raise ConfigError("--spec is required")
    spec = _spec("--spec", spec_text) if isinstance(spec_text, str) else DistributionSpec.from_dict(spec_text)
    out = _out_dir(args)
    if cfg.get("analytic", args.analytic):
        tdx = float(cfg.get("t_delta_x", args.tdx))
        points = int(cfg.get("points", args.points or 20_001))
        rng = _pair("--range", cfg.get("range", args.range))
        grid = analytic_grid(spec, points) if rng is None else np.linspace(rng[0], rng[1], points)
        try:
            w = analytic_decision_weight_density(spec, tdx, grid)
            curve = analytic_cdf_map(spec, tdx, grid)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        _write_columns(out / "weights.csv", "x,p,w", [grid, dist.pdf(spec, grid), w])
        curve.to_csv(out / "cdf_map.csv")
        files = ["weights.csv", "cdf_map.csv"]
        resolved = {"spec": spec.label, "analytic": True, "t_delta_x": tdx, "points": points,
                    "range": [float(grid[0]), float(grid[-1])]}
        _manifest(out, "simulate", resolved, None, files)
    else:
        try:
            config = SimConfig(
                spec=spec,
                series_length=cfg.get("series_length", args.T),
                bin_width=float(cfg.get("bin_width", args.dx)),
                range=_pair("--range", cfg.get("range", args.range)),
                ensemble_size=cfg.get("ensemble_size", args.ensemble),
                seed=cfg.get("seed", args.seed),
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        sim = simulate_dm(config)
        sim.to_csv(out / "estimate.csv")
        sim.cdf_map().to_csv(out / "cdf_map.csv")
        files = ["estimate.csv", "cdf_map.csv"]
        _manifest(out, "simulate", config.to_dict(), config.seed, files)
    print(f"wrote {', '.join(files)} to {out}")
    return EXIT_OK


def _lm_options(cfg, args):
    fields = dict(cfg)
    if args.max_iter is not None:
        fields.setdefault("max_iter", args.max_iter)
    unknown = set(fields) - set(LMOptions.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"--config: unknown fit option(s) {sorted(unknown)}")
    try:
        return LMOptions(**fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"--config: {exc}") from None


def cmd_fit(args) -> int:
    options = _lm_options(_load_config(args.config), args)
    try:
        data = Dataset.from_csv(args.data)
    except OSError as exc:
        raise ConfigError(f"--data: {exc}") from None
    out = _out_dir(args)
    if args.all:
        results = compare_fits(data, options)
    else:
        if args.model is None:
            raise ConfigError("fit needs --model KIND or --all")
        try:
            kind = WeightingModel.parse_kind(args.model)
        except DomainError as exc:
            raise ConfigError(f"--model: {exc}") from None
        results = [fit_model(kind, data, options=options)]
    files = []
    print(f"{'model':<10} {'param':<6} {'value':>12} {'std_err':>12} {'rss':>12} converged")
    for res in results:
        if isinstance(res, FitFailure):
            print(f"{res.kind.value:<10} failed: {res.error}")
            _write_text(out / f"fit_{res.kind.value}.json",
                        json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n")
            files.append(f"fit_{res.kind.value}.json")
            continue
        name = res.kind.value
        res.to_json(out / f"fit_{name}.json")
        res.predicted.to_csv(out / f"fit_{name}_curve.csv")
        files += [f"fit_{name}.json", f"fit_{name}_curve.csv"]
        for i, (pname, value) in enumerate(res.params.items()):
            se = res.std_errors[pname] if res.std_errors else float("nan")
            head = name if i == 0 else ""
            tail = f"{res.rss:12.4g} {res.converged}" if i == 0 else ""
            print(f"{head:<10} {pname:<6} {value:12.6g} {se:12.4g} {tail}")
    digest = hashlib.sha256(Path(args.data).read_bytes()).hexdigest()
    resolved = {"data": str(args.data), "data_sha256": digest, "models": "all" if args.all else args.model,
                "points": len(data), "options": dataclasses.asdict(options)}
    _manifest(out, "fit", resolved, None, files)
    failed = [r for r in results if not r.converged]
    if failed and args.strict:
        print(f"not converged: {', '.join(r.kind.value for r in failed)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_ergodicity(args) -> int:
    cfg = _load_config(args.config)
    try:
        config = GbmConfig(
            drift=float(cfg.get("drift", args.mu)),
            volatility=float(cfg.get("volatility", args.sigma)),
            horizon=float(cfg.get("horizon", args.t)),
            steps=cfg.get("steps", args.steps),
            trajectories=cfg.get("trajectories", args.n),
            initial_value=float(cfg.get("initial_value", args.x0)),
            seed=cfg.get("seed", args.seed),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    result = gbm_simulate(config)
    out = _out_dir(args)
    result.to_csv(out / "trajectories.csv")
    summary = result.summary(config)
    _write_text(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _manifest(out, "ergodicity", config.to_dict(), config.seed, ["trajectories.csv", "summary.json"])
    for k, v in summary.items():
        print(f"{k:<22} {v:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probweight", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="CDF map between two distributions or for a weighting model")
    p.add_argument("--do", help="observer distribution, e.g. gaussian:0,1 or t:0.2,1,3")
    p.add_argument("--dm", help="decision-maker distribution")
    p.add_argument("--model", help="weighting model, e.g. tk:0.65, lattimore:0.67,0.58, gauss:0.23,1.64, tmap:1.27,0.4")
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"),
                   help="x grid limits (default: 10 scales beyond the locations)")
    p.add_argument("--pdf", action="store_true", help="also write x,p,w densities")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("simulate", help="decision maker counting events (or the analytic limit)")
    p.add_argument("--spec", help="generating distribution, e.g. gaussian:0,2")
    p.add_argument("--T", type=int, default=100, help="series length")
    p.add_argument("--dx", type=float, default=0.4, help="bin width")
    p.add_argument("--ensemble", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"), help="binning range")
    p.add_argument("--analytic", action="store_true", help="apply the correction to the exact density")
    p.add_argument("--tdx", type=float, default=10.0, help="T*dx for --analytic")
    p.add_argument("--points", type=int, default=None, help="grid points for --analytic")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit weighting models to an fp,fw CSV")
    p.add_argument("--data", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--model", help="tk, lattimore, gauss or tmap")
    g.add_argument("--all", action="store_true")
    p.add_argument("--strict", action="store_true", help="exit 3 if any fit fails to converge")
    p.add_argument("--max-iter", type=int, default=None, help="Levenberg-Marquardt iteration cap")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("ergodicity", help="ensemble vs time-average growth of GBM")
    p.add_argument("--mu", type=float, default=0.05)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--t", type=float, default=100.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--n", type=int, default=10_000, help="number of trajectories")
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ergodicity)

    for sp in sub.choices.values():
        sp.add_argument("--config", help="JSON file; its fields override flags")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateInputError, ResourceError, ProbWeightError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
