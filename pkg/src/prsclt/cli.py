"""Command-line front end: analytic reports, simulation batches, verification and sweeps.

Exit codes: 0 success, 1 verification failure, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .asymptotics import (
    GaussianLimit,
    PopulationParams,
    confidence_interval,
    marginal_accuracy,
    marginal_individual,
    quadratic_form,
    reference_accuracy,
    reference_individual,
    ridge_accuracy,
    ridge_individual,
)
from .errors import ConvergenceError, ReplicationError, ValidationError
from .simulate import SimConfig, conditioning_draws, run_batch
from .spectral import CovarianceModel, CovSpec
from .stats import coverage, ks_to_standard_normal, variance_ratio
from .stieltjes import solve_fixed_point

__all__ = ["main", "RunManifest", "ConfigError", "EXIT_OK", "EXIT_VERIFY", "EXIT_CONFIG", "EXIT_RUNTIME"]

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
SEED_ENV = "PRSCLT_SEED"
WORKERS_ENV = "PRSCLT_WORKERS"
SWEEP_COLUMNS = ("parameter", "value", "estimator", "level", "center", "sd", "eta", "tilting", "degenerate")
_ESTIMATORS = ("marginal", "reference_ridge", "ridge")
_LEVELS = ("individual", "accuracy", "quadratic_form")
_SWEEPABLE = ("n", "n_z", "n_w", "p", "m", "h2", "h2_z", "lam", "sigma_beta2")


class ConfigError(ValueError):
    """Invalid or incomplete configuration (exit code 2)."""


@dataclass(frozen=True, slots=True)
class RunManifest:
    config_digest: str
    tool_version: str
    command: str
    started_utc: str
    finished_utc: str
    outputs: tuple[str, ...]

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def config_digest(doc: dict[str, Any]) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- config handling


def _load(path: str) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def _apply_overrides(doc: dict[str, Any], seed: int | None) -> dict[str, Any]:
    env_seed = os.environ.get(SEED_ENV)
    if seed is None and env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from exc
    if seed is not None:
        doc = dict(doc)
        doc["simulation"] = dict(doc.get("simulation", {}), master_seed=seed)
    return doc


def _workers(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _section(doc: dict[str, Any], name: str) -> dict[str, Any]:
    sec = doc.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} is missing or not an object")
    return sec


def _population(doc: dict[str, Any]) -> PopulationParams:
    try:
        return PopulationParams.from_dict(_section(doc, "population"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"population: {exc}") from exc


def _covariance(doc: dict[str, Any], params: PopulationParams) -> CovarianceModel:
    try:
        spec = CovSpec.from_dict(_section(doc, "covariance"))
        cov = spec.build()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"covariance: {exc}") from exc
    if cov.dim != params.p or cov.m != params.m:
        raise ConfigError(
            f"covariance has p={cov.dim}, m={cov.m} but population says p={params.p}, m={params.m}"
        )
    return cov


def _sim_config(doc: dict[str, Any]) -> SimConfig:
    try:
        return SimConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"simulation: {exc}") from exc


def _laws(doc: dict[str, Any], section: str) -> list[dict[str, Any]]:
    sec = doc.get(section, {})
    laws = sec.get("laws") if isinstance(sec, dict) else None
    if laws is None:
        laws = [{"estimator": "marginal", "level": "accuracy"}]
    if not isinstance(laws, list) or not laws:
        raise ConfigError(f"{section}.laws must be a non-empty list")
    for i, law in enumerate(laws):
        if not isinstance(law, dict):
            raise ConfigError(f"{section}.laws[{i}] must be an object")
        if law.get("estimator", "marginal") not in _ESTIMATORS:
            raise ConfigError(f"{section}.laws[{i}].estimator must be one of {_ESTIMATORS}")
        if law.get("level", "accuracy") not in _LEVELS:
            raise ConfigError(f"{section}.laws[{i}].level must be one of {_LEVELS}")
    return laws


# ---------------------------------------------------------------- law evaluation


def _evaluate(
    law: dict[str, Any], cov: CovarianceModel, params: PopulationParams, doc: dict[str, Any]
) -> tuple[GaussianLimit, float | None]:
    kind = law.get("estimator", "marginal")
    level = law.get("level", "accuracy")
    optimal = bool(law.get("use_optimal_lambda", False))
    if kind != "marginal" and params.lam is None and not (kind == "ridge" and optimal):
        raise ConfigError(f"law {kind}/{level} needs population.lam")
    if kind == "reference_ridge" and params.n_w is None:
        raise ConfigError("reference_ridge laws need population.n_w")
    tilting = None
    if kind == "reference_ridge":
        tilting = solve_fixed_point(cov.eigenvalues, params.phi_w, params.lam).tilting  # type: ignore[arg-type]
    elif kind == "ridge" and params.h2 > 0.0:
        lam = params.optimal_lambda if optimal else params.lam
        tilting = solve_fixed_point(cov.eigenvalues, params.phi_n, lam).tilting  # type: ignore[arg-type]

    if level == "quadratic_form":
        return quadratic_form(cov, params), tilting
    if level == "accuracy":
        if kind == "marginal":
            return marginal_accuracy(cov, params, bool(law.get("homogeneous_ld", False))), tilting
        if kind == "reference_ridge":
            return reference_accuracy(cov, params), tilting
        if params.h2 == 0.0:
            return ridge_accuracy(cov, params.replace(lam=params.lam or 1.0)), tilting
        return ridge_accuracy(cov, params, use_optimal_lambda=optimal), tilting

    sim = dict(doc.get("simulation", {}))
    sim.setdefault("replications", 1)
    sim.setdefault("master_seed", 0)
    try:
        cfg = SimConfig.from_dict({**doc, "simulation": sim})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"simulation: {exc}") from exc
    beta, z = conditioning_draws(cfg, cov)
    if kind == "marginal":
        return marginal_individual(cov, z, beta, params), tilting
    if kind == "reference_ridge":
        return reference_individual(cov, z, beta, params), tilting
    return ridge_individual(cov, z, beta, params, use_optimal_lambda=optimal), tilting


def _entry(law: dict[str, Any], limit: GaussianLimit, params: PopulationParams) -> dict[str, Any]:
    return {
        "estimator": law.get("estimator", "marginal"),
        "level": law.get("level", "accuracy"),
        "center": limit.center,
        "sd": limit.sd,
        "eta": limit.eta,
        "rate_tag": limit.be_rate,
        "degenerate": limit.degenerate,
        "note": limit.note,
        "inputs": {"law": law, "population": params.to_dict()},
    }


def _finite(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_finite(v) for v in x]
    return x


def _dump_json(obj: Any) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True) + "\n"


def _rows_csv(rows: list[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _emit(text: str, out: str | None) -> list[str]:
    if out is None:
        sys.stdout.write(text)
        return []
    Path(out).write_text(text, encoding="utf-8", newline="\n")
    return [out]


# ---------------------------------------------------------------- commands


def cmd_analytic(args: argparse.Namespace, doc: dict[str, Any]) -> tuple[int, list[str]]:
    params = _population(doc)
    cov = _covariance(doc, params)
    entries = []
    for law in _laws(doc, "analytic"):
        limit, _ = _evaluate(law, cov, params, doc)
        entries.append(_entry(law, limit, params))
    if args.format == "csv":
        cols = ("estimator", "level", "center", "sd", "eta", "rate_tag", "degenerate")
        return EXIT_OK, _emit(_rows_csv(entries, cols), args.out)
    return EXIT_OK, _emit(_dump_json({"laws": entries}), args.out)


def cmd_simulate(args: argparse.Namespace, doc: dict[str, Any]) -> tuple[int, list[str]]:
    cfg = _sim_config(doc)
    if args.out is None:
        raise ConfigError("simulate needs --out PATH for the CSV")
    cov = _covariance(doc, cfg.params)
    batch = run_batch(cfg, workers=_workers(args.workers), cov=cov)
    batch.to_csv(args.out)
    return EXIT_OK, [args.out]


def _range(th: dict[str, Any], key: str) -> tuple[float, float]:
    val = th[key]
    if not (isinstance(val, list) and len(val) == 2):
        raise ConfigError(f"verify.thresholds.{key} must be a [low, high] pair")
    return float(val[0]), float(val[1])


def cmd_verify(args: argparse.Namespace, doc: dict[str, Any]) -> tuple[int, list[str]]:
    verify = doc.get("verify")
    thresholds = verify.get("thresholds") if isinstance(verify, dict) else None
    if not isinstance(thresholds, dict) or not thresholds:
        raise ConfigError("verify.thresholds is missing or empty")
    known = {"ks", "mean_sd_multiple", "variance_ratio", "coverage"}
    unknown = set(thresholds) - known
    if unknown:
        raise ConfigError(f"unknown verify.thresholds entries: {sorted(unknown)}")
    level = float(verify.get("level", 0.95))
    cfg = _sim_config(doc)
    cov = _covariance(doc, cfg.params)
    batch = run_batch(cfg, workers=_workers(args.workers), cov=cov)
    limit = batch.limit
    if limit is None or limit.degenerate:
        raise ConfigError("configuration has no nondegenerate analytic limit to verify against")
    checks: list[dict[str, Any]] = []
    r = len(batch)
    if "ks" in thresholds:
        ks = ks_to_standard_normal(batch.standardized, 0.0).statistic  # type: ignore[arg-type]
        checks.append({"name": "ks", "value": ks, "threshold": thresholds["ks"], "pass": ks <= thresholds["ks"]})
    if "mean_sd_multiple" in thresholds:
        dev = abs(float(np.mean(batch.raw)) - limit.center)
        bound = float(thresholds["mean_sd_multiple"]) * limit.sd / math.sqrt(r)
        checks.append({"name": "mean", "value": dev, "threshold": bound, "pass": dev <= bound})
    if "variance_ratio" in thresholds:
        lo, hi = _range(thresholds, "variance_ratio")
        vr = variance_ratio(batch.raw, limit.sd)
        checks.append({"name": "variance_ratio", "value": vr, "threshold": [lo, hi], "pass": lo <= vr <= hi})
    if "coverage" in thresholds:
        lo, hi = _range(thresholds, "coverage")
        cv = coverage(batch.raw, confidence_interval(limit, level))
        checks.append({"name": "coverage", "value": cv, "threshold": [lo, hi], "pass": lo <= cv <= hi})
    ok = all(c["pass"] for c in checks)
    report = {"passed": ok, "replications": r, "center": limit.center, "sd": limit.sd, "checks": checks}
    outputs = _emit(_dump_json(report), args.out)
    return (EXIT_OK if ok else EXIT_VERIFY), outputs


def _sweep_point(
    doc: dict[str, Any], parameter: str, value: Any
) -> tuple[dict[str, Any], PopulationParams, CovarianceModel]:
    pop = dict(_section(doc, "population"))
    cov_doc = dict(_section(doc, "covariance"))
    pop[parameter] = value
    if parameter in ("p", "m"):
        cov_doc[parameter] = value
    point_doc = {**doc, "population": pop, "covariance": cov_doc}
    params = _population(point_doc)
    return point_doc, params, _covariance(point_doc, params)


def cmd_sweep(args: argparse.Namespace, doc: dict[str, Any]) -> tuple[int, list[str]]:
    sweep = doc.get("sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("config section 'sweep' is missing or not an object")
    parameter = sweep.get("parameter")
    values = sweep.get("values")
    if parameter not in _SWEEPABLE:
        raise ConfigError(f"sweep.parameter must be one of {_SWEEPABLE}")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values must be a non-empty list")
    laws = _laws(doc, "sweep")
    rows = []
    for value in values:
        point_doc, params, cov = _sweep_point(doc, parameter, value)
        for law in laws:
            limit, tilting = _evaluate(law, cov, params, point_doc)
            rows.append(
                {
                    "parameter": parameter,
                    "value": float(value),
                    "estimator": law.get("estimator", "marginal"),
                    "level": law.get("level", "accuracy"),
                    "center": limit.center,
                    "sd": limit.sd,
                    "eta": limit.eta,
                    "tilting": tilting,
                    "degenerate": limit.degenerate,
                }
            )
    if args.format == "json":
        return EXIT_OK, _emit(_dump_json({"rows": rows}), args.out)
    return EXIT_OK, _emit(_rows_csv(rows, SWEEP_COLUMNS), args.out)


_COMMANDS: dict[str, Callable[[argparse.Namespace, dict[str, Any]], tuple[int, list[str]]]] = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prsclt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = {"analytic": "json", "simulate": "csv", "verify": "json", "sweep": "csv"}
    for name, fmt in defaults.items():
        p = sub.add_parser(name, help=_COMMANDS[name].__name__.replace("cmd_", "") + " command")
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", help="output path (stdout when omitted, except simulate)")
        p.add_argument("--seed", type=int, help=f"master seed override (env {SEED_ENV})")
        p.add_argument("--workers", type=int, help=f"worker processes (env {WORKERS_ENV})")
        p.add_argument("--format", choices=("json", "csv"), default=fmt)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    started = _now()
    try:
        doc = _apply_overrides(_load(args.config), args.seed)
        code, outputs = _COMMANDS[args.command](args, doc)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReplicationError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConvergenceError, RuntimeError, ArithmeticError, OSError, ValueError) as exc:
        print(f"runtime error: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME
    if outputs:
        manifest = RunManifest(config_digest(doc), __version__, args.command, started, _now(), tuple(outputs))
        manifest.write(Path(outputs[0] + ".manifest.json"))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
