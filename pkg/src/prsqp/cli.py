"""Batch front end: JSON experiment configs, data generation, solves, sweeps.

Subcommands
-----------
solve --config c.json
    Build the configured problem from its seed, run the splitting solver from
    ``w0 = 0`` (and the gradient baseline when requested), write
    ``trace.csv`` + ``summary.json`` (+ ``baseline_trace.csv``) into the
    config's output directory.
sweep --config s.json
    One solve per (r, s, alpha) grid point, rows computed concurrently with
    per-row seeds ``base_seed XOR row_index``; writes ``sweep.csv`` in grid
    order regardless of completion order.
check-params --config c.json
    Print the diagnostics report (step floor, decrease margins, regime,
    curvature bounds) for the configured problem/parameters as JSON.
gen-data --problem quadratic|classification|huber_lasso --seed N --out f.json
    Persist a sampled instance to the JSON problem container understood by
    ``solve`` configs with ``{"type": "quadratic", "file": ...}``.

Exit codes: 0 success, 1 config error, 2 solver failure. All numeric output
uses '.' as the decimal separator regardless of locale (plain ``repr``/JSON).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .alf import Iterate
from .baseline import GdParams, gradient_descent
from .core import make_rng
from .diagnostics import classify_regime, diagnostics_report, kkt_residual
from .problems import (
    composite_objective,
    make_classification,
    make_huber_lasso,
    problem_from_json,
    problem_to_json,
    random_quadratic,
)
from .solver import SolveStatus, SolverParams, StepRecord, run

CONFIG_SCHEMA_VERSION = 1

TRACE_HEADER = (
    "k,t_x,t_y,norm_dx,norm_dy,L_beta,L_hat,feas_inf,kkt_inf,ofv,"
    "backtracks_x,backtracks_y,elapsed_ms"
)


class ConfigError(ValueError):
    """The configuration document is malformed or violates the schema."""


# ----- config parsing --------------------------------------------------------


@dataclass
class ExperimentConfig:
    problem: dict
    seed: int
    params: SolverParams
    output_dir: str
    baseline: bool = False


_PROBLEM_KEYS = {
    "classification": {"type", "n", "T", "mu"},
    "huber_lasso": {"type", "m", "n", "density", "tau", "mu"},
    "quadratic": {"type", "file"},
}

_PROBLEM_REQUIRED = {
    "classification": {"n", "T"},
    "huber_lasso": {"m", "n"},
    "quadratic": {"file"},
}


def _check_keys(obj, allowed, context):
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {context}: {sorted(extra)}")


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None


def _parse_problem(obj):
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError("problem must be an object with a 'type' key")
    kind = obj["type"]
    if kind not in _PROBLEM_KEYS:
        raise ConfigError(
            f"unknown problem type {kind!r} (expected one of {sorted(_PROBLEM_KEYS)})"
        )
    _check_keys(obj, _PROBLEM_KEYS[kind], f"problem ({kind})")
    missing = _PROBLEM_REQUIRED[kind] - set(obj)
    if missing:
        raise ConfigError(f"problem ({kind}) is missing keys: {sorted(missing)}")
    return dict(obj)


_PARAM_FIELD_NAMES = {f.name for f in fields(SolverParams)} - {"relaxed_alpha"}


def _parse_params(obj, relaxed_alpha):
    if obj is None:
        obj = {}
    if not isinstance(obj, dict):
        raise ConfigError("params must be an object")
    _check_keys(obj, _PARAM_FIELD_NAMES, "params")
    try:
        return SolverParams(**obj, relaxed_alpha=bool(relaxed_alpha))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid params: {exc}") from None


def parse_experiment(obj, context="config"):
    """Validate and materialize an ExperimentConfig from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{context} must be a JSON object")
    allowed = {"schema_version", "problem", "seed", "params", "relaxed_alpha", "output_dir", "baseline"}
    _check_keys(obj, allowed, context)
    if obj.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"{context}: schema_version must be {CONFIG_SCHEMA_VERSION}, got {obj.get('schema_version')!r}"
        )
    for key in ("problem", "seed", "output_dir"):
        if key not in obj:
            raise ConfigError(f"{context} is missing required key {key!r}")
    if not isinstance(obj["seed"], int):
        raise ConfigError(f"{context}: seed must be an integer")
    return ExperimentConfig(
        problem=_parse_problem(obj["problem"]),
        seed=obj["seed"],
        params=_parse_params(obj.get("params"), obj.get("relaxed_alpha", False)),
        output_dir=str(obj["output_dir"]),
        baseline=bool(obj.get("baseline", False)),
    )


def build_problem(problem_cfg, seed):
    """Materialize the configured problem; sampled kinds consume a fresh seeded stream."""
    kind = problem_cfg["type"]
    if kind == "quadratic":
        return problem_from_json(_load_json(problem_cfg["file"]))
    rng = make_rng(seed)
    if kind == "classification":
        return make_classification(
            int(problem_cfg["n"]), int(problem_cfg["T"]), float(problem_cfg.get("mu", 0.001)), rng
        )
    return make_huber_lasso(
        int(problem_cfg["m"]),
        int(problem_cfg["n"]),
        float(problem_cfg.get("density", 0.5)),
        float(problem_cfg.get("tau", 1e-3)),
        float(problem_cfg.get("mu", 0.1)),
        rng,
    )


# ----- trace CSV --------------------------------------------------------------


def _fmt(v):
    # repr round-trips floats exactly; integers stay integers
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_trace(trace, path):
    """Write the per-iteration trace as CSV under the pinned header.

    Floats are written with ``repr`` (shortest exact round-trip decimal), so
    parsing the file back reproduces every numeric field bit-for-bit; the
    elapsed column is converted to milliseconds.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        for rec in trace:
            row = [
                rec.k,
                float(rec.t_x),
                float(rec.t_y),
                float(rec.norm_dx),
                float(rec.norm_dy),
                float(rec.L_beta),
                float(rec.L_hat),
                float(rec.feas_inf),
                float(rec.kkt_inf),
                float(rec.ofv),
                rec.backtracks_x,
                rec.backtracks_y,
                float(rec.elapsed * 1000.0),
            ]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_trace(path):
    """Parse a :func:`write_trace` file back into StepRecord objects."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != TRACE_HEADER:
            raise ConfigError(f"unexpected trace header in {path}")
        out = []
        for row in reader:
            out.append(
                StepRecord(
                    k=int(row[0]),
                    t_x=float(row[1]),
                    t_y=float(row[2]),
                    norm_dx=float(row[3]),
                    norm_dy=float(row[4]),
                    L_beta=float(row[5]),
                    L_hat=float(row[6]),
                    feas_inf=float(row[7]),
                    kkt_inf=float(row[8]),
                    ofv=float(row[9]),
                    backtracks_x=int(row[10]),
                    backtracks_y=int(row[11]),
                    elapsed=float(row[12]) / 1000.0,
                )
            )
        return out


# ----- solve ------------------------------------------------------------------


def _summarize(P, result, tcpu_s, params):
    final = result.final
    res = kkt_residual(P, final)
    return {
        "iter": result.iterations,
        "tcpu_s": tcpu_s,
        "ofv": composite_objective(P, final.x),
        "ofv_split": float(P.eval_f(final.x)) + float(P.eval_g(final.y)),
        "fea": res.feas,
        "kkt": res.total,
        "status": result.status.value,
        "regime": classify_regime(params.r, params.s),
    }


def run_experiment(cfg):
    """Execute one configured solve; returns (summary dict, SolveResult)."""
    P = build_problem(cfg.problem, cfg.seed)
    w0 = Iterate(np.zeros(P.n1), np.zeros(P.n2), np.zeros(P.n2))
    t0 = time.perf_counter()
    result = run(P, w0, cfg.params)
    summary = _summarize(P, result, time.perf_counter() - t0, cfg.params)

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace(result.trace, out_dir / "trace.csv")

    if cfg.baseline:
        iters = max(result.iterations, 1)
        gd = GdParams(step_rule="armijo", max_iter=iters, tol=0.0)
        t0 = time.perf_counter()
        base = gradient_descent(P, np.zeros(P.n1), gd)
        summary["baseline"] = {
            "iter": base.iterations,
            "tcpu_s": time.perf_counter() - t0,
            "ofv": composite_objective(P, base.final_x),
            "status": base.status.value,
        }
        with open(out_dir / "baseline_trace.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("k,objective,grad_inf,t,elapsed_ms\n")
            for rec in base.trace:
                fh.write(
                    ",".join(
                        _fmt(v)
                        for v in [
                            rec.k,
                            float(rec.objective),
                            float(rec.grad_inf),
                            float(rec.t),
                            float(rec.elapsed * 1000.0),
                        ]
                    )
                    + "\n"
                )

    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary, result


# ----- sweep ------------------------------------------------------------------


SWEEP_HEADER = "r,s,alpha,regime,iter,tcpu_s,ofv,fea,kkt,status"


@dataclass
class SweepConfig:
    base: ExperimentConfig
    rs_grid: list
    alpha_grid: list
    max_workers: int = 1


def parse_sweep(obj):
    if not isinstance(obj, dict):
        raise ConfigError("sweep config must be a JSON object")
    allowed = {"schema_version", "base", "rs_grid", "alpha_grid", "max_workers"}
    _check_keys(obj, allowed, "sweep config")
    if obj.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"sweep config: schema_version must be {CONFIG_SCHEMA_VERSION}, got {obj.get('schema_version')!r}"
        )
    if "base" not in obj or "rs_grid" not in obj:
        raise ConfigError("sweep config needs 'base' and 'rs_grid'")
    base = parse_experiment(obj["base"], context="sweep base")
    rs_grid = obj["rs_grid"]
    if not isinstance(rs_grid, list) or not rs_grid:
        raise ConfigError("rs_grid must be a nonempty list of [r, s] pairs")
    pairs = []
    for entry in rs_grid:
        if not (isinstance(entry, list) and len(entry) == 2):
            raise ConfigError(f"rs_grid entries must be [r, s] pairs, got {entry!r}")
        pairs.append((float(entry[0]), float(entry[1])))
    alpha_grid = obj.get("alpha_grid", [base.params.alpha])
    if not isinstance(alpha_grid, list) or not alpha_grid:
        raise ConfigError("alpha_grid must be a nonempty list")
    workers = obj.get("max_workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("max_workers must be a positive integer")
    return SweepConfig(base=base, rs_grid=pairs, alpha_grid=[float(a) for a in alpha_grid], max_workers=workers)


def _sweep_row(payload):
    # top-level function so process pools can pickle it; rebuilds everything locally
    r, s, alpha = payload["r"], payload["s"], payload["alpha"]
    row = {
        "r": r,
        "s": s,
        "alpha": alpha,
        "regime": classify_regime(r, s),
        "iter": 0,
        "tcpu_s": 0.0,
        "ofv": math.nan,
        "fea": math.nan,
        "kkt": math.nan,
        "status": "InvalidParams",
    }
    try:
        params = SolverParams(
            **{**payload["params"], "r": r, "s": s, "alpha": alpha},
            relaxed_alpha=payload["relaxed_alpha"],
        )
    except ValueError:
        return row
    P = build_problem(payload["problem"], payload["seed"])
    w0 = Iterate(np.zeros(P.n1), np.zeros(P.n2), np.zeros(P.n2))
    t0 = time.perf_counter()
    result = run(P, w0, params)
    summary = _summarize(P, result, time.perf_counter() - t0, params)
    row.update(
        iter=summary["iter"],
        tcpu_s=summary["tcpu_s"],
        ofv=summary["ofv"],
        fea=summary["fea"],
        kkt=summary["kkt"],
        status=summary["status"],
    )
    return row


def run_sweep(cfg):
    """One solve per (alpha, (r, s)) grid point; returns rows in grid order.

    Row index runs fastest over rs_grid; each row's problem seed is
    ``base.seed XOR row_index`` so results are independent of worker count and
    completion order. Rows whose parameters fail validation are recorded with
    status InvalidParams and the sweep continues.
    """
    base_params = {
        f.name: getattr(cfg.base.params, f.name)
        for f in fields(SolverParams)
        if f.name not in ("r", "s", "alpha", "relaxed_alpha")
    }
    payloads = []
    idx = 0
    for alpha in cfg.alpha_grid:
        for r, s in cfg.rs_grid:
            payloads.append(
                {
                    "r": r,
                    "s": s,
                    "alpha": alpha,
                    "params": base_params,
                    "relaxed_alpha": cfg.base.params.relaxed_alpha,
                    "problem": cfg.base.problem,
                    "seed": cfg.base.seed ^ idx,
                }
            )
            idx += 1
    if cfg.max_workers == 1:
        rows = [_sweep_row(p) for p in payloads]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.max_workers) as pool:
            rows = list(pool.map(_sweep_row, payloads))
    return rows


def write_sweep(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    _fmt(v)
                    for v in [
                        float(row["r"]),
                        float(row["s"]),
                        float(row["alpha"]),
                        row["regime"],
                        row["iter"],
                        float(row["tcpu_s"]),
                        float(row["ofv"]),
                        float(row["fea"]),
                        float(row["kkt"]),
                        row["status"],
                    ]
                )
                + "\n"
            )


# ----- subcommand handlers ------------------------------------------------------


def _cmd_solve(args):
    cfg = parse_experiment(_load_json(args.config))
    summary, result = run_experiment(cfg)
    print(json.dumps(summary, indent=2))
    if result.status in (SolveStatus.LINE_SEARCH_FAILED, SolveStatus.NUMERICAL_ERROR):
        return 2
    return 0


def _cmd_sweep(args):
    cfg = parse_sweep(_load_json(args.config))
    rows = run_sweep(cfg)
    out_dir = Path(cfg.base.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "sweep.csv"
    write_sweep(rows, out_path)
    print(str(out_path))
    return 0


def _cmd_check_params(args):
    cfg = parse_experiment(_load_json(args.config))
    P = build_problem(cfg.problem, cfg.seed)
    try:
        report = diagnostics_report(P, cfg.params)
    except ValueError as exc:
        raise ConfigError(f"diagnostics unavailable for this configuration: {exc}") from None
    print(json.dumps(asdict(report), indent=2))
    return 0


def _cmd_gen_data(args):
    rng = make_rng(args.seed)
    if args.problem == "quadratic":
        P = random_quadratic(args.n1, args.n2, rng)
    elif args.problem == "classification":
        P = make_classification(args.n, args.T, args.mu, rng)
    elif args.problem == "huber_lasso":
        P = make_huber_lasso(args.m, args.n, args.density, args.tau, args.mu_huber, rng)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown problem {args.problem!r}")
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(problem_to_json(P), fh)
        fh.write("\n")
    print(args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="prsqp",
        description="Composite-optimization experiments: splitting solver, sweeps, diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configured experiment")
    p_solve.add_argument("--config", required=True)
    p_solve.set_defaults(handler=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run an (r, s, alpha) grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_check = sub.add_parser("check-params", help="print the diagnostics report as JSON")
    p_check.add_argument("--config", required=True)
    p_check.set_defaults(handler=_cmd_check_params)

    p_gen = sub.add_parser("gen-data", help="sample a problem instance and write its JSON container")
    p_gen.add_argument("--problem", required=True, choices=["quadratic", "classification", "huber_lasso"])
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--n1", type=int, default=5, help="quadratic: x dimension")
    p_gen.add_argument("--n2", type=int, default=3, help="quadratic: y dimension")
    p_gen.add_argument("--n", type=int, default=100, help="classification/huber_lasso dimension")
    p_gen.add_argument("--T", type=int, default=100, help="classification: sample count")
    p_gen.add_argument("--mu", type=float, default=0.001, help="classification: regularizer weight")
    p_gen.add_argument("--m", type=int, default=128, help="huber_lasso: row count")
    p_gen.add_argument("--density", type=float, default=0.5, help="huber_lasso: signal density")
    p_gen.add_argument("--tau", type=float, default=1e-3, help="huber_lasso: weight")
    p_gen.add_argument("--mu-huber", dest="mu_huber", type=float, default=0.1, help="huber_lasso: knee width")
    p_gen.set_defaults(handler=_cmd_gen_data)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
