"""``ttvou`` command-line front end.

Subcommands: fit, measures, value, routes, tradeoff, verify.  Every run
prints a JSON envelope to stdout and, with ``--out``, writes the report,
an optional flat CSV and the figure series into that directory.

Exit status: 0 success, 1 verification ran but a check failed, 2 invalid
input or configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .datasets import DATASETS, synthetic_samples, route_models, dataset_lognormals, dataset_row
from .errors import ConfigError, NumericalError, ProbabilityOutOfRange, TTVouError, ValidationError
from .ingest import ingest_route_columns, ingest_samples
from .quantile_models import (BurrXII, Degenerate, Lognormal, UniformTest, empirical_from_samples,
                              fit_burr, fit_lognormal_mle, lognormal_from_moments, summary_stats)
from .reports import csv_text, digest, dumps, emit_plot_data, envelope, flatten, normalize, write_text
from .risk_measures import (SchedulingPreferences, departure_mean, departure_mett, optimal_departure,
                            risk_measures)
from .scenarios import Scenario, compare_routes, tradeoff_table
from .valuation import valuate
from .verifier import (curvature_condition, check_derivative_signs, condition_sweep,
                       monte_carlo_audit)

COMMANDS = ("fit", "measures", "value", "routes", "tradeoff", "verify")
DISTS = ("logn", "burr", "empirical", "auto")
FORMATS = ("json", "csv", "both")
AUTO_KS_MARGIN = 0.02
DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_TAU = 2.0, 1.0, 0.8
TRADEOFF_GRID = "0.60:0.90:0.05"
SWEEP_GRID = "0.50:0.95:0.05,0.99"
SYNTHETIC_N = 2000

EXIT_OK, EXIT_CHECK_FAILED, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    command: str
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float | None = None
    tau: float | None = None
    dist: str = "logn"
    tol: float = 1e-9
    seed: int = 0
    tau_grid: tuple[float, ...] | None = None
    output_dir: str | None = None
    format: str = "json"
    models: tuple[str, ...] = ()
    inputs: tuple[str, ...] = ()
    draws: int = 100_000
    warnings: list = field(default_factory=list)

    def prefs(self) -> SchedulingPreferences:
        if self.gamma is not None:
            return SchedulingPreferences.from_gamma(self.alpha, self.beta, self.gamma)
        return SchedulingPreferences.from_tau(self.alpha, self.beta, self.tau)

    def echo(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "tau": self.tau,
                "dist": self.dist, "tol": self.tol, "seed": self.seed,
                "tau_grid": None if self.tau_grid is None else list(self.tau_grid),
                "output_dir": self.output_dir, "format": self.format, "models": list(self.models),
                "inputs": list(self.inputs), "draws": self.draws}


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (stop included) and/or comma-separated values."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            try:
                start, stop, step = (float(x) for x in part.split(":"))
            except ValueError:
                raise ConfigError(f"bad grid segment {part!r}; expected start:stop:step") from None
            if not step > 0:
                raise ConfigError("grid step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9))
            out.extend(round(start + i * step, 12) for i in range(n + 1))
        else:
            try:
                out.append(float(part))
            except ValueError:
                raise ConfigError(f"bad grid value {part!r}") from None
    grid = tuple(out)
    if not grid:
        raise ConfigError("empty tau grid")
    if any(not 0 < t < 1 for t in grid):
        raise ProbabilityOutOfRange("tau grid must lie in (0, 1)")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ConfigError("tau grid must be strictly increasing")
    return grid


_KEYS = {"alpha": float, "beta": float, "gamma": float, "tau": float, "dist": str, "tol": float,
         "seed": int, "grid": str, "out": str, "format": str, "model": str, "draws": int}


def read_config_file(path) -> dict:
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    for i, ln in enumerate(lines, start=1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ConfigError(f"{path}:{i}: expected key=value")
        key, value = (s.strip() for s in ln.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{path}:{i}: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{i}: bad value for {key}: {value!r}") from None
    return out


def build_config(ns: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over defaults and validate."""
    file_vals = read_config_file(ns.config) if ns.config else {}

    def pick(name, key=None):
        v = getattr(ns, name)
        if v is not None:
            return v
        return file_vals.get(key or name)

    cfg = RunConfig(command=ns.command)
    for name in ("alpha", "beta"):
        v = pick(name)
        if v is None:
            cfg.warnings.append(f"{name} not given; using default {getattr(cfg, name):g}")
        else:
            setattr(cfg, name, float(v))
    gamma, tau = pick("gamma"), pick("tau")
    if gamma is not None and tau is not None:
        raise ConfigError("give either --gamma or --tau, not both")
    if gamma is None and tau is None and ns.command not in ("fit", "tradeoff"):
        cfg.warnings.append(f"neither gamma nor tau given; using default tau {DEFAULT_TAU:g}")
        tau = DEFAULT_TAU
    cfg.gamma = None if gamma is None else float(gamma)
    cfg.tau = None if tau is None else float(tau)
    for name in ("alpha", "beta") + (("gamma",) if cfg.gamma is not None else ()):
        v = getattr(cfg, name)
        if not (math.isfinite(v) and v > 0):
            raise ValidationError(f"{name} must be positive and finite")
    if cfg.tau is not None and not 0 < cfg.tau < 1:
        raise ProbabilityOutOfRange(f"tau must lie in (0, 1), got {cfg.tau}")
    cfg.dist = pick("dist") or cfg.dist
    if cfg.dist not in DISTS:
        raise ConfigError(f"dist must be one of {', '.join(DISTS)}")
    tol = pick("tol")
    if tol is not None:
        cfg.tol = float(tol)
    if not 1e-12 <= cfg.tol <= 1e-3:
        raise ConfigError("tol must lie in [1e-12, 1e-3]")
    seed = pick("seed")
    if seed is not None:
        cfg.seed = int(seed)
    grid = pick("grid")
    if grid is not None:
        cfg.tau_grid = parse_grid(grid)
    cfg.output_dir = pick("out", "out")
    cfg.format = pick("format") or cfg.format
    if cfg.format not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
    models = list(ns.model or [])
    if not models and file_vals.get("model"):
        models = [m.strip() for m in file_vals["model"].split(",") if m.strip()]
    cfg.models = tuple(models)
    cfg.inputs = tuple(ns.inputs)
    draws = pick("draws")
    if draws is not None:
        cfg.draws = int(draws)
    return cfg


# ---------------------------------------------------------------------------
# model resolution


def _floats(parts, n, spec):
    if len(parts) != n:
        raise ConfigError(f"builtin spec {spec!r} needs {n} numeric field(s)")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"non-numeric field in builtin spec {spec!r}") from None


def builtin_models(spec: str, cfg: RunConfig) -> list[tuple[str, object]]:
    """Resolve ``builtin:...`` model specs.

    uniform[:mean:std], logn:xi:psi, lognm:mean:std, burr:c:k:scale,
    degenerate:value, routes (six routes), datasets (13 moment-matched
    lognormals), synthetic:<dataset row> (seeded sample, fitted per --dist).
    """
    if not spec.startswith("builtin:"):
        raise ConfigError(f"model spec must start with 'builtin:', got {spec!r}")
    kind, *rest = spec[len("builtin:"):].split(":")
    if kind == "uniform":
        mean, std = _floats(rest, 2, spec) if rest else (10.0, 1.0)
        return [(spec, UniformTest.from_moments(mean, std))]
    if kind == "logn":
        return [(spec, Lognormal(*_floats(rest, 2, spec)))]
    if kind == "lognm":
        return [(spec, lognormal_from_moments(*_floats(rest, 2, spec)))]
    if kind == "burr":
        return [(spec, BurrXII(*_floats(rest, 3, spec)))]
    if kind == "degenerate":
        return [(spec, Degenerate(*_floats(rest, 1, spec)))]
    if kind == "routes":
        return list(route_models(cfg.alpha).items())
    if kind == "datasets":
        return list(dataset_lognormals().items())
    if kind == "synthetic":
        name = ":".join(rest)
        try:
            row = dataset_row(name)
        except KeyError:
            raise ConfigError(f"unknown dataset row {name!r}; choose from "
                              f"{', '.join(r.name for r in DATASETS)}") from None
        x = synthetic_samples(row.mean, row.std, row.skewness, SYNTHETIC_N, cfg.seed)
        model, _ = fit_samples(x, cfg)
        return [(row.name, model)]
    raise ConfigError(f"unknown builtin model {kind!r}")


def _ks(x, model):
    return float(stats.kstest(x, model.cdf).statistic)


def fit_samples(x: np.ndarray, cfg: RunConfig) -> tuple[object, dict]:
    """Fit per ``cfg.dist``; returns the model and fit diagnostics."""
    info = {"dist": cfg.dist}
    if cfg.dist == "logn":
        return fit_lognormal_mle(x), info
    if cfg.dist == "burr":
        return fit_burr(x), info
    if cfg.dist == "empirical":
        return empirical_from_samples(x), info
    logn = fit_lognormal_mle(x)
    info["ks_logn"] = _ks(x, logn)
    try:
        burr = fit_burr(x)
    except NumericalError as exc:
        cfg.warnings.append(f"Burr fit failed ({exc}); keeping lognormal")
        info["selected"] = "logn"
        return logn, info
    info["ks_burr"] = _ks(x, burr)
    pick_burr = info["ks_logn"] - info["ks_burr"] > AUTO_KS_MARGIN
    info["selected"] = "burr" if pick_burr else "logn"
    return (burr if pick_burr else logn), info


def resolve_models(cfg: RunConfig, *, multi_route: bool = False):
    """``[(name, model, samples or None, fit info)]`` from builtins and files."""
    out = []
    for spec in cfg.models:
        out.extend((name, m, None, {}) for name, m in builtin_models(spec, cfg))
    for p in cfg.inputs:
        path = Path(p)
        if not path.exists():
            raise FileNotFoundError(f"input not found: {p}")
        if multi_route and _looks_multi_route(path):
            for name, x in ingest_route_columns(path, cfg.warnings).items():
                model, info = fit_samples(x, cfg)
                out.append((name, model, x, info))
            continue
        x = ingest_samples(path, cfg.warnings)
        model, info = fit_samples(x, cfg)
        out.append((path.stem, model, x, info))
    if not out:
        raise ConfigError("no model: pass an input file or --model builtin:...")
    return out


def _looks_multi_route(path):
    with open(path, encoding="utf-8") as fh:
        for ln in fh:
            if ln.strip():
                cols = [c.strip() for c in ln.split(",")]
                return len(cols) > 1 and "travel_time" not in cols and not _numeric(cols[0])
    return False


def _numeric(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def _single(models, command):
    if len(models) != 1:
        raise ConfigError(f"{command} takes exactly one model, got {len(models)}")
    return models[0]


# ---------------------------------------------------------------------------
# commands


def cmd_fit(cfg):
    results = []
    for name, model, x, info in resolve_models(cfg):
        entry = {"name": name, "model": model.describe(), "fit": info}
        if x is not None:
            entry["summary"] = summary_stats(x).as_dict()
        results.append(entry)
    return {"models": results}, {}


def cmd_measures(cfg):
    name, model, _, info = _single(resolve_models(cfg), "measures")
    prefs = cfg.prefs()
    deps = [departure_mean(model, prefs), optimal_departure(model, prefs), departure_mett(model, prefs)]
    return {"name": name, "model": model.describe(), "fit": info, "preferences": prefs.as_dict(),
            "measures": risk_measures(model, prefs).as_dict(),
            "departures": [d.as_dict() for d in deps]}, {}


def cmd_value(cfg):
    name, model, _, info = _single(resolve_models(cfg), "value")
    prefs = cfg.prefs()
    report = valuate(model, prefs, rtol=cfg.tol)
    return {"name": name, "model": model.describe(), "fit": info, "preferences": prefs.as_dict(),
            "measures": risk_measures(model, prefs).as_dict(), "valuation": report.as_dict()}, {}


def cmd_routes(cfg):
    models = resolve_models(cfg, multi_route=True)
    prefs = cfg.prefs()
    comp = compare_routes([(n, m) for n, m, _, _ in models], prefs)
    fig6 = []
    for r in comp.routes:
        if r.error is None:
            fig6.append((r.name, *r.costs[Scenario.METT].percents))
    return {"preferences": prefs.as_dict(), **comp.as_dict()}, {"fig6_decomposition": fig6}


def cmd_tradeoff(cfg):
    name, model, _, info = _single(resolve_models(cfg), "tradeoff")
    grid = cfg.tau_grid or parse_grid(TRADEOFF_GRID)
    rows = tradeoff_table(model, cfg.alpha, cfg.beta, grid)
    table = [dict(r.as_dict(), formatted=list(r.formatted())) for r in rows]
    return ({"name": name, "model": model.describe(), "fit": info, "alpha": cfg.alpha,
             "beta": cfg.beta, "rows": table},
            {"fig8_tradeoff": [(r.tau, r.ett, r.ttvr) for r in rows]})


def cmd_verify(cfg):
    models = resolve_models(cfg)
    prefs = cfg.prefs()
    grid = cfg.tau_grid or parse_grid(SWEEP_GRID)
    per_model, passed = [], True
    for name, model, _, _ in models:
        entry = {"name": name, "model": model.describe()}
        deriv = check_derivative_signs(model, prefs)
        entry["derivatives"] = deriv.as_dict()
        passed &= deriv.all_passed
        if model.continuous:
            b = curvature_condition(model, prefs.tau)
            entry["curvature_condition"] = {"all_hold": b.all_hold, "failing_points": int((~b.holds).sum()),
                                   "first_failure": float(b.grid[~b.holds][0]) if not b.all_hold else None,
                                   "valid_condition": b.valid_condition, "margin": b.margin,
                                   "implication_ok": b.implication_ok}
            passed &= b.implication_ok
        else:
            entry["curvature_condition"] = None
        audit = monte_carlo_audit(model, prefs, cfg.draws, cfg.seed)
        entry["monte_carlo"] = audit.as_dict()
        passed &= audit.passed
        per_model.append(entry)
    sweeps = condition_sweep([(n, m) for n, m, _, _ in models], grid)
    passed &= all(s.all_valid for s in sweeps)
    fig7 = [(s.name, t, r) for s in sweeps if s.error is None for t, r in zip(s.tau_grid, s.ratio_series)]
    return ({"preferences": prefs.as_dict(), "models": per_model,
             "condition_sweep": [s.as_dict() for s in sweeps], "passed": passed},
            {"fig7_condition": fig7})


HANDLERS = {"fit": cmd_fit, "measures": cmd_measures, "value": cmd_value, "routes": cmd_routes,
            "tradeoff": cmd_tradeoff, "verify": cmd_verify}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("inputs", nargs="*", help="sample files (text or CSV)")
    common.add_argument("--alpha", type=float, help="value of travel time (default 2)")
    common.add_argument("--beta", type=float, help="early-arrival penalty rate (default 1)")
    common.add_argument("--gamma", type=float, help="late-arrival penalty rate")
    common.add_argument("--tau", type=float, help="punctuality requirement (default 0.8)")
    common.add_argument("--dist", choices=DISTS, help="distribution family for sample files")
    common.add_argument("--tol", type=float, help="cross-check tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--grid", help="tau grid, start:stop:step and/or comma list")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=FORMATS, help="report files to write (default json)")
    common.add_argument("--model", action="append", help="builtin model spec; repeatable")
    common.add_argument("--draws", type=int, help="Monte Carlo draws for verify (default 100000)")
    common.add_argument("--config", help="key=value file; flags take precedence")
    parser = argparse.ArgumentParser(prog="ttvou", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _write_outputs(cfg, text, results, series):
    out = Path(cfg.output_dir)
    if cfg.format in ("json", "both"):
        write_text(out / f"{cfg.command}.json", text)
    if cfg.format in ("csv", "both"):
        rows = flatten(normalize(results))
        write_text(out / f"{cfg.command}.csv", csv_text(("key", "value"), rows))
    if any(series.values()):
        emit_plot_data(series, out)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        cfg = build_config(ns)
        results, series = HANDLERS[cfg.command](cfg)
        specs = list(cfg.models)
        env = envelope(__version__, cfg.command, cfg.echo(), digest(cfg.inputs, specs),
                       results, cfg.warnings)
        text = dumps(env)
        if cfg.output_dir:
            _write_outputs(cfg, text, results, series)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"ttvou {ns.command}: error: {exc}", file=stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"ttvou {ns.command}: numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except TTVouError as exc:
        print(f"ttvou {ns.command}: error: {exc}", file=stderr)
        return EXIT_VALIDATION
    stdout.write(text)
    if cfg.command == "verify" and not results["passed"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))
