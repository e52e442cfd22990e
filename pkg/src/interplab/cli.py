"""Command-line interface.

Subcommands: generate (draw a dataset to file), solve (fit one method on a
dataset file), risk (exact excess risk of a theta file), sparsify (reduce a
theta file's support), sweep (run an experiment config), concentration (run
the lemma-validator bundle).  Failures print a one-line JSON object with a
machine-readable error category to stderr and exit nonzero (2 config/input,
3 solver/numeric, 4 budget, 1 other).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import harness, io, risk
from .concentration import BudgetExceeded
from .interpolators import (
    MIN_L1,
    MIN_L2,
    IterationLimit,
    LpOptions,
    NotInterpolable,
    NumericalBreakdown,
    min_l1,
    min_l2,
    sparsify,
)
from .numerics import NoConvergence, RankDeficient, SeedSpec
from .scenario import generate

_CONFIG_ERRORS = (io.ConfigError, ValueError, FileNotFoundError, KeyError)
_SOLVER_ERRORS = (NotInterpolable, IterationLimit, NumericalBreakdown, RankDeficient, NoConvergence)


def _fail(exc: Exception, code: int) -> int:
    payload = {"category": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    return code


def _emit(doc, out: str | None, fmt: str) -> None:
    if fmt == "json":
        text = json.dumps(doc, indent=2, default=_jsonable)
    else:
        flat = _flatten(doc)
        text = ",".join(flat.keys()) + "\n" + ",".join(io.fmt_float(v) for v in flat.values())
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    if dataclasses.is_dataclass(value):
        return dataclasses.asdict(value)
    return str(value)


def _flatten(doc, prefix=""):
    flat = {}
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple, np.ndarray)):
            # comma-free so one value stays one CSV cell
            flat[name] = "|".join(str(v) for v in np.asarray(value).tolist())
        else:
            flat[name] = value
    return flat


def _interpolant_doc(interp) -> dict:
    return {
        "method": interp.method,
        "support_size": interp.support_size,
        "l1_norm": interp.l1_norm,
        "l2_norm": interp.l2_norm,
        "residual": interp.residual,
        "iterations": interp.iterations,
        "objective": interp.objective,
        "support": interp.support,
    }


def cmd_generate(args) -> int:
    if args.out is None:
        raise io.ConfigError("generate requires --out")
    params = io.scenario_params_from_mapping(io.load_yaml_mapping(args.config), args.config)
    dataset = generate(params, SeedSpec(args.seed or 0, "cli/dataset", 0))
    io.save_dataset(args.out, dataset)
    print(f"wrote dataset n={params.n} p={params.p} to {args.out}")
    return 0


def cmd_solve(args) -> int:
    dataset = io.load_dataset(args.data)
    if args.method == MIN_L2:
        interp = min_l2(dataset.X, dataset.y, zero_tol=args.zero_tol)
    else:
        interp = min_l1(dataset.X, dataset.y, LpOptions(zero_tol=args.zero_tol))
    doc = _interpolant_doc(interp)
    doc["excess_risk"] = risk.excess_risk(dataset.params, interp.theta_hat, interp.method).total
    if args.theta_out:
        io.save_theta(args.theta_out, interp.theta_hat, interp.method)
    _emit(doc, args.out, args.format)
    return 0


def cmd_risk(args) -> int:
    dataset = io.load_dataset(args.data)
    theta = io.load_theta(args.theta)
    report = risk.excess_risk(dataset.params, theta)
    doc = dataclasses.asdict(report)
    doc["residual_identity_gap"] = risk.residual_identity_gap(
        dataset.X, dataset.y, theta, dataset.params.k
    )
    _emit(doc, args.out, args.format)
    return 0


def cmd_sparsify(args) -> int:
    dataset = io.load_dataset(args.data)
    theta = io.load_theta(args.theta)
    interp = sparsify(dataset.X, theta, LpOptions(zero_tol=args.zero_tol))
    io.save_theta(args.out, interp.theta_hat, interp.method)
    _emit(_interpolant_doc(interp), None, args.format)
    return 0


def cmd_sweep(args) -> int:
    config = harness.load_experiment_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    if args.out is not None:
        config = dataclasses.replace(config, output_path=args.out)
    rows = harness.run_sweep(config, threads=args.threads)
    out = Path(config.output_path)
    harness.write_result_rows(out, rows, include_timing=args.timing)
    aggs = harness.aggregate(rows)
    agg_path = out.with_name(out.stem + "_agg" + (out.suffix or ".csv"))
    harness.write_aggregate_rows(agg_path, aggs)
    total_seconds = float(sum(r.solve_seconds for r in rows))
    io.write_sidecar(
        str(out) + ".meta.json",
        config,
        extra={"rows": len(rows), "total_solve_seconds": total_seconds, "threads": args.threads},
    )
    if args.plot:
        harness.plot_aggregates(aggs, args.plot)
    if args.format == "json":
        Path(str(out) + ".rows.json").write_text(
            json.dumps(harness.rows_to_dicts(rows), default=_jsonable), encoding="utf-8"
        )
    print(f"wrote {len(rows)} rows to {out} (aggregates: {agg_path})")
    return 0


def cmd_concentration(args) -> int:
    if args.config:
        config = harness.load_concentration_config(args.config)
    else:
        config = harness.ConcentrationConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    report = harness.concentration_suite(config)
    doc = {}
    for outcome in report.outcomes:
        if outcome.error is not None:
            doc[outcome.name] = {"error": outcome.error}
        else:
            entry = dataclasses.asdict(outcome.report)
            entry["passed"] = outcome.passed
            doc[outcome.name] = entry
    doc["all_passed"] = report.all_passed
    _emit(doc, args.out, args.format)
    return 0 if report.all_passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interplab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="YAML config path")
        p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("generate", help="draw a dataset and write it to a JSON file")
    common(p, config_required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("solve", help="fit one method on a dataset file")
    common(p)
    p.add_argument("--data", required=True, help="dataset JSON path")
    p.add_argument("--method", choices=(MIN_L2, MIN_L1), default=MIN_L1)
    p.add_argument("--zero-tol", type=float, default=1e-9)
    p.add_argument("--theta-out", default=None, help="also save theta_hat to this path")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("risk", help="exact excess risk of a theta file")
    common(p)
    p.add_argument("--data", required=True, help="dataset JSON path (defines the scenario)")
    p.add_argument("--theta", required=True, help="theta JSON path")
    p.set_defaults(fn=cmd_risk)

    p = sub.add_parser("sparsify", help="reduce a theta file's support to at most n")
    common(p)
    p.add_argument("--data", required=True, help="dataset JSON path (defines X)")
    p.add_argument("--theta", required=True, help="theta JSON path")
    p.add_argument("--zero-tol", type=float, default=1e-9)
    p.set_defaults(fn=cmd_sparsify)

    p = sub.add_parser("sweep", help="run an experiment sweep from a YAML config")
    common(p, config_required=True)
    p.add_argument("--plot", default=None, help="also write a log-log SVG/PDF plot here")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock solve_seconds in the CSV (breaks byte-identical reruns)")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("concentration", help="run the concentration-lemma validator bundle")
    common(p)
    p.set_defaults(fn=cmd_concentration)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        return _fail(exc, 4)
    except _SOLVER_ERRORS as exc:
        return _fail(exc, 3)
    except _CONFIG_ERRORS as exc:
        return _fail(exc, 2)
    except Exception as exc:  # last-resort: still machine readable
        return _fail(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
