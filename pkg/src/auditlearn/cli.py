"""Command-line harness.

Subcommands::

    gen                  materialize a pool CSV from a generator
    audit pool           run the pool auditor (thresholds or rectangles) on a CSV
    audit thresholds     one agnostic threshold audit against a noisy generator
    audit rectangles     one agnostic rectangle audit, with a JSONL round trace
    greedy plan          plan queries for a hypothesis-table CSV and check the bound
    experiment run       batched trials -> report.json / summary.csv / meta.json
    experiment compare   merge several report.json files into one CSV table

Exit codes: 0 success, 2 configuration error, 3 guarantee violation detected
with ``--assert-guarantees``.
"""
from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict

import numpy as np

from .core import AuditOracle, Pool, load_pool_csv, save_pool_csv
from .experiments import (
    ConfigError,
    ExperimentConfig,
    comparison_csv,
    ExperimentReport,
    build_distribution,
    run_experiment,
)
from .generators import CirclePairs, circle_pool
from .greedy import (
    CostSpec,
    greedy_identify,
    load_cost_csv,
    load_table_csv,
    opt_cost_bruteforce,
)
from .rectangles import audit_disjunction_agnostic, audit_disjunction_realizable
from .thresholds import audit_threshold_agnostic, audit_threshold_pool

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATION = 3


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_gen(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kind == "noisy-threshold":
        dist = build_distribution(
            {"kind": "noisy-threshold", "a_star": args.a_star[0], "eta": args.eta}
        )
        xs, ys = dist.sample(args.m, rng)
    elif args.kind == "noisy-disjunction":
        dist = build_distribution(
            {"kind": "noisy-disjunction", "a_star": args.a_star, "eta": args.eta}
        )
        xs, ys = dist.sample(args.m, rng)
    elif args.kind == "circle-pool":
        pool = circle_pool(args.m)
        xs, ys = pool.points, pool.labelings[0]
    elif args.kind == "circle-pairs":
        dist = CirclePairs(args.d, args.eps)
        xs, ys = dist.sample(args.m, rng)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown kind {args.kind}")
    save_pool_csv(Pool(xs, ys), args.out)
    print(f"wrote {args.m if args.kind != 'circle-pool' else len(ys)} examples to {args.out}")
    return EXIT_OK


def _cmd_audit_pool(args: argparse.Namespace) -> int:
    pool = load_pool_csv(args.pool)
    oracle = AuditOracle(pool)
    if args.hclass == "threshold":
        hyp = audit_threshold_pool(oracle, args.k)
        described = {"class": "threshold", "cut": hyp.cut}
        bound = args.k + 1
    else:
        hyp = audit_disjunction_realizable(oracle)
        described = {"class": "disjunction", "thresholds": list(hyp.thresholds)}
        bound = pool.dim
    preds = hyp.predict_many(pool.xs)
    pool_error = int(np.count_nonzero(preds != pool.ys)) / len(pool)
    result = {
        "hypothesis": described,
        "pool_error": pool_error,
        "negative_bound": bound,
        "ledger": oracle.ledger.to_json_dict(),
    }
    _write_text(args.out, json.dumps(result, indent=2) + "\n")
    if args.assert_guarantees and oracle.ledger.negative_queries > bound:
        print("negative-query bound violated", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_audit_thresholds(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        algorithm="threshold-agnostic",
        dist={"kind": "noisy-threshold", "a_star": args.a_star, "eta": args.eta},
        trials=1,
        seed=args.seed,
        params={"eta_max": args.eta_max, "alpha": args.alpha, "delta": args.delta},
        preset=args.preset,
    )
    config.validate()
    dist = build_distribution(config.dist)
    rng = np.random.default_rng(args.seed)
    result = audit_threshold_agnostic(
        dist, args.eta_max, args.alpha, args.delta, config.size_config(), rng
    )
    out = {
        "hypothesis": {"class": "threshold", "cut": result.hypothesis.cut},
        "ledger": result.ledger.to_json_dict(),
        "checkpoints": result.checkpoints,
    }
    _write_text(args.out, json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def _cmd_audit_rectangles(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        algorithm="rectangle-agnostic",
        dist={"kind": "noisy-disjunction", "a_star": args.a_star, "eta": args.eta},
        trials=1,
        seed=args.seed,
        params={"eta_min": args.eta_min, "alpha": args.alpha, "delta": args.delta},
        preset=args.preset,
    )
    config.validate()
    dist = build_distribution(config.dist)
    rng = np.random.default_rng(args.seed)
    result = audit_disjunction_agnostic(
        dist, args.eta_min, args.alpha, args.delta, dist.dim,
        config.size_config(), rng,
    )
    out = {
        "hypothesis": {
            "class": "disjunction",
            "thresholds": list(result.hypothesis.thresholds),
        },
        "ledger": result.ledger.to_json_dict(),
    }
    _write_text(args.out, json.dumps(out, indent=2) + "\n")
    if args.trace:
        lines = [json.dumps(asdict(r)) for r in result.rounds]
        _write_text(args.trace, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_greedy_plan(args: argparse.Namespace) -> int:
    table = load_table_csv(args.table)
    if args.cost_csv:
        cost = load_cost_csv(args.cost_csv)
    else:
        cost = CostSpec.audit() if args.cost == "audit" else CostSpec.unit()
    result = greedy_identify(table, cost, true_row=args.true_row)
    print(f"identified: {result.hypothesis_id}")
    for point, label, incurred in result.transcript.entries:
        print(f"  query {table.point_ids[point]} -> {label:+d}  cost {incurred:g}")
    print(f"total cost: {result.transcript.total_cost:g}")
    violated = False
    if table.n_hypotheses <= 16 and table.n_points <= 12:
        opt = opt_cost_bruteforce(table, cost)
        bound = (
            (math.log(table.n_hypotheses - 1) + 1) * opt
            if table.n_hypotheses > 1
            else 0.0
        )
        print(f"opt cost: {opt:g}; greedy bound (ln(|H|-1)+1)*opt = {bound:g}")
        violated = result.transcript.total_cost > bound + 1e-9
        if violated:
            print("bound violated", file=sys.stderr)
    else:
        print("table too large for the exact-opt bound check; skipped")
    if args.assert_guarantees and violated:
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_experiment_run(args: argparse.Namespace) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if args.seed is not None:
            data["seed"] = args.seed
        config = ExperimentConfig.from_dict(data)
    else:
        if args.seed is None:
            raise ConfigError("--seed is required")
        dist: dict = {"kind": args.dist_kind, "eta": args.eta}
        if args.dist_kind == "noisy-threshold":
            dist["a_star"] = args.a_star[0]
        else:
            dist["a_star"] = args.a_star
        params = {
            k: v
            for k, v in {
                "m": args.m,
                "k": args.k,
                "n": args.n,
                "eta_max": args.eta_max,
                "eta_min": args.eta_min,
                "alpha": args.alpha,
                "delta": args.delta,
            }.items()
            if v is not None
        }
        config = ExperimentConfig(
            algorithm=args.algorithm,
            dist=dist,
            trials=args.trials,
            seed=args.seed,
            params=params,
            preset=args.preset,
            eval_samples=args.eval_samples,
        )
    config.validate()
    started = time.perf_counter()
    report = run_experiment(config, workers=args.workers)
    elapsed = time.perf_counter() - started
    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, "report.json"), report.to_json())
    _write_text(os.path.join(args.out, "summary.csv"), report.summary_csv())
    meta = {
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "runtime_seconds": elapsed,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "workers": args.workers,
    }
    _write_text(os.path.join(args.out, "meta.json"), json.dumps(meta, indent=2) + "\n")
    print(f"wrote report to {args.out} ({config.trials} trials, {elapsed:.1f}s)")
    return EXIT_OK


def _cmd_experiment_compare(args: argparse.Namespace) -> int:
    reports = []
    for path in args.reports:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        reports.append(
            ExperimentReport(
                config=ExperimentConfig.from_dict(data["config"]),
                trials=data["trials"],
            )
        )
    _write_text(args.out, comparison_csv(reports))
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auditlearn",
        description="Auditing algorithms: active learning that only pays for negative labels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="materialize a pool CSV")
    gen.add_argument("--kind", required=True, choices=[
        "noisy-threshold", "noisy-disjunction", "circle-pool", "circle-pairs"])
    gen.add_argument("--m", type=int, default=100, help="pool / sample size")
    gen.add_argument("--a-star", type=_float_list, default=[0.5],
                     help="reference thresholds, comma separated")
    gen.add_argument("--eta", type=float, default=0.0)
    gen.add_argument("--d", type=int, default=2)
    gen.add_argument("--eps", type=float, default=0.125)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    audit = sub.add_parser("audit", help="run a single audit")
    audit_sub = audit.add_subparsers(dest="target", required=True)

    ap = audit_sub.add_parser("pool", help="pool auditor on a CSV pool")
    ap.add_argument("--pool", required=True)
    ap.add_argument("--hclass", choices=["threshold", "disjunction"], default="threshold")
    ap.add_argument("--k", type=int, default=0, help="tolerated in-class errors")
    ap.add_argument("--out", default="-")
    ap.add_argument("--assert-guarantees", action="store_true")
    ap.set_defaults(func=_cmd_audit_pool)

    at = audit_sub.add_parser("thresholds", help="agnostic threshold audit")
    at.add_argument("--a-star", type=float, default=0.5)
    at.add_argument("--eta", type=float, required=True)
    at.add_argument("--eta-max", type=float, required=True)
    at.add_argument("--alpha", type=float, required=True)
    at.add_argument("--delta", type=float, required=True)
    at.add_argument("--preset", choices=["desk", "theory"], default="desk")
    at.add_argument("--seed", type=int, required=True)
    at.add_argument("--out", default="-")
    at.set_defaults(func=_cmd_audit_thresholds)

    ar = audit_sub.add_parser("rectangles", help="agnostic rectangle audit")
    ar.add_argument("--a-star", type=_float_list, required=True)
    ar.add_argument("--eta", type=float, required=True)
    ar.add_argument("--eta-min", type=float, required=True)
    ar.add_argument("--alpha", type=float, required=True)
    ar.add_argument("--delta", type=float, required=True)
    ar.add_argument("--preset", choices=["desk", "theory"], default="desk")
    ar.add_argument("--seed", type=int, required=True)
    ar.add_argument("--out", default="-")
    ar.add_argument("--trace", help="JSONL per-round trace path")
    ar.set_defaults(func=_cmd_audit_rectangles)

    greedy = sub.add_parser("greedy", help="finite-class query planning")
    greedy_sub = greedy.add_subparsers(dest="action", required=True)
    gp = greedy_sub.add_parser("plan", help="plan and check the competitive bound")
    gp.add_argument("--table", required=True, help="hypothesis table CSV")
    gp.add_argument("--cost", choices=["audit", "unit"], default="audit")
    gp.add_argument("--cost-csv", help="outcome cost matrix CSV (overrides --cost)")
    gp.add_argument("--true-row", type=int, required=True)
    gp.add_argument("--assert-guarantees", action="store_true")
    gp.set_defaults(func=_cmd_greedy_plan)

    exp = sub.add_parser("experiment", help="batched seeded experiments")
    exp_sub = exp.add_subparsers(dest="action", required=True)

    er = exp_sub.add_parser("run")
    er.add_argument("--config", help="JSON config file (overrides other flags)")
    er.add_argument("--algorithm", choices=[
        "threshold-realizable", "threshold-pool", "threshold-agnostic",
        "rectangle-realizable", "rectangle-agnostic", "binary-search", "passive-erm"])
    er.add_argument("--dist-kind", choices=["noisy-threshold", "noisy-disjunction"],
                    default="noisy-threshold")
    er.add_argument("--a-star", type=_float_list, default=[0.5])
    er.add_argument("--eta", type=float, default=0.0)
    er.add_argument("--m", type=int)
    er.add_argument("--k", type=int)
    er.add_argument("--n", type=int)
    er.add_argument("--eta-max", type=float)
    er.add_argument("--eta-min", type=float)
    er.add_argument("--alpha", type=float)
    er.add_argument("--delta", type=float)
    er.add_argument("--trials", type=int, default=10)
    er.add_argument("--seed", type=int)
    er.add_argument("--preset", choices=["desk", "theory"], default="desk")
    er.add_argument("--eval-samples", type=int, default=50_000)
    er.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    er.add_argument("--out", required=True, help="output directory")
    er.set_defaults(func=_cmd_experiment_run)

    ec = exp_sub.add_parser("compare")
    ec.add_argument("--reports", nargs="+", required=True, help="report.json paths")
    ec.add_argument("--out", default="-")
    ec.set_defaults(func=_cmd_experiment_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
