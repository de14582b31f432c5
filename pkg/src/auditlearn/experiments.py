"""Batched, seeded experiment runs with deterministic machine-readable reports.

A run executes one algorithm for a number of trials, each with its own derived
generator, and reports per-trial ledgers and held-out errors plus aggregate
statistics.  ``report.json`` and ``summary.csv`` are byte-reproducible for a
fixed config and seed; wall-clock metadata goes to a separate ``meta.json``
that is excluded from the determinism contract.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any

import numpy as np

from .baselines import binary_search_active, passive_erm
from .core import AuditOracle, CostLedger, Pool, SampleSizeConfig
from .generators import CirclePairs, NoisyDisjunction, NoisyThreshold
from .rectangles import audit_disjunction_agnostic, audit_disjunction_realizable
from .thresholds import (
    audit_threshold_agnostic,
    audit_threshold_pool,
    audit_threshold_realizable,
)

SCHEMA_VERSION = 1

ALGORITHMS = (
    "threshold-realizable",
    "threshold-pool",
    "threshold-agnostic",
    "rectangle-realizable",
    "rectangle-agnostic",
    "binary-search",
    "passive-erm",
)

_POOL_ALGORITHMS = {
    "threshold-realizable",
    "threshold-pool",
    "rectangle-realizable",
    "binary-search",
}

_PARAM_ORDER = ("m", "k", "n", "eta_max", "eta_min", "alpha", "delta", "restarts")


class ConfigError(ValueError):
    """An experiment configuration failed validation."""


@dataclass
class ExperimentConfig:
    algorithm: str
    dist: dict[str, Any]
    trials: int
    seed: int
    params: dict[str, Any] = field(default_factory=dict)
    preset: str = "desk"
    eval_samples: int = 50_000

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.eval_samples < 1:
            raise ConfigError("eval_samples must be >= 1")
        if self.preset not in ("desk", "theory"):
            raise ConfigError("preset must be 'desk' or 'theory'")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        try:
            build_distribution(self.dist)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad distribution spec: {exc}") from exc
        p = self.params
        if self.algorithm in _POOL_ALGORITHMS and int(p.get("m", 0)) < 1:
            raise ConfigError(f"{self.algorithm} needs params.m >= 1")
        if self.algorithm == "threshold-pool" and int(p.get("k", -1)) < 0:
            raise ConfigError("threshold-pool needs params.k >= 0")
        if self.algorithm == "passive-erm" and int(p.get("n", 0)) < 1:
            raise ConfigError("passive-erm needs params.n >= 1")
        if self.algorithm == "threshold-agnostic":
            for name in ("eta_max", "alpha", "delta"):
                value = float(p.get(name, -1.0))
                if not (0 < value < 1):
                    raise ConfigError(f"threshold-agnostic needs params.{name} in (0,1)")
        if self.algorithm == "rectangle-agnostic":
            for name in ("eta_min", "alpha", "delta"):
                value = float(p.get(name, -1.0))
                if not (0 < value <= 1):
                    raise ConfigError(f"rectangle-agnostic needs params.{name} in (0,1]")

    def size_config(self) -> SampleSizeConfig:
        return SampleSizeConfig.desk() if self.preset == "desk" else SampleSizeConfig.theory()

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "algorithm": self.algorithm,
            "dist": self.dist,
            "trials": self.trials,
            "seed": self.seed,
            "params": self.params,
            "preset": self.preset,
            "eval_samples": self.eval_samples,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        try:
            return cls(
                algorithm=data["algorithm"],
                dist=dict(data["dist"]),
                trials=int(data["trials"]),
                seed=int(data["seed"]),
                params=dict(data.get("params", {})),
                preset=data.get("preset", "desk"),
                eval_samples=int(data.get("eval_samples", 50_000)),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc}") from exc


def build_distribution(spec: dict[str, Any]):
    kind = spec["kind"]
    if kind == "noisy-threshold":
        return NoisyThreshold(float(spec["a_star"]), float(spec.get("eta", 0.0)))
    if kind == "noisy-disjunction":
        a_star = spec["a_star"]
        if np.isscalar(a_star):
            a_star = [a_star]
        return NoisyDisjunction(tuple(float(v) for v in a_star), float(spec.get("eta", 0.0)))
    if kind == "circle-pairs":
        positives = tuple((int(g), int(j)) for g, j in spec.get("positives", ()))
        return CirclePairs(int(spec["d"]), float(spec["eps"]), positives)
    raise ValueError(f"unknown distribution kind {kind!r}")


def _trial_rngs(seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Trial i is seeded with seed+i; algorithm and evaluation use split streams."""
    algo = np.random.default_rng(np.random.SeedSequence(seed + index, spawn_key=(0,)))
    ev = np.random.default_rng(np.random.SeedSequence(seed + index, spawn_key=(1,)))
    return algo, ev


def run_trial(config: ExperimentConfig, index: int) -> dict[str, Any]:
    rng, eval_rng = _trial_rngs(config.seed, index)
    dist = build_distribution(config.dist)
    cfg = config.size_config()
    p = config.params
    record: dict[str, Any] = {"trial": index}

    if config.algorithm in _POOL_ALGORITHMS:
        xs, ys = dist.sample(int(p["m"]), rng)
        pool = Pool(xs, ys)
        oracle = AuditOracle(pool)
        if config.algorithm == "threshold-realizable":
            hyp = audit_threshold_realizable(oracle)
        elif config.algorithm == "threshold-pool":
            hyp = audit_threshold_pool(oracle, int(p["k"]))
        elif config.algorithm == "rectangle-realizable":
            hyp = audit_disjunction_realizable(oracle)
        else:
            hyp = binary_search_active(oracle)
        ledger = oracle.ledger
        preds = hyp.predict_many(pool.xs)
        record["pool_error"] = int(np.count_nonzero(preds != pool.ys)) / len(pool)
    elif config.algorithm == "threshold-agnostic":
        result = audit_threshold_agnostic(
            dist, float(p["eta_max"]), float(p["alpha"]), float(p["delta"]), cfg, rng
        )
        hyp, ledger = result.hypothesis, result.ledger
        record["checkpoints"] = result.checkpoints
    elif config.algorithm == "rectangle-agnostic":
        result = audit_disjunction_agnostic(
            dist,
            float(p["eta_min"]),
            float(p["alpha"]),
            float(p["delta"]),
            dist.dim,
            cfg,
            rng,
            restarts=p.get("restarts"),
        )
        hyp, ledger = result.hypothesis, result.ledger
        record["rounds"] = [
            {
                "t": r.t,
                "eta_t": r.eta_t,
                "sample_size": r.sample_size,
                "lower": list(r.lower),
                "best_err": r.best_err,
                "eta_hat": r.eta_hat,
                "direction_negatives": r.direction_negatives,
                "ledger_negative": r.ledger_negative,
                "ledger_total": r.ledger_total,
                "exited_early": r.exited_early,
            }
            for r in result.rounds
        ]
    elif config.algorithm == "passive-erm":
        hclass = "threshold" if config.dist["kind"] == "noisy-threshold" else "disjunction"
        result = passive_erm(dist, int(p["n"]), hclass, rng)
        hyp, ledger = result.hypothesis, result.ledger
    else:  # pragma: no cover - validate() guards this
        raise ConfigError(f"unknown algorithm {config.algorithm!r}")

    xs, ys = dist.sample(config.eval_samples, eval_rng)
    preds = hyp.predict_many(xs)
    record["holdout_error"] = int(np.count_nonzero(preds != ys)) / config.eval_samples
    record["negative_queries"] = ledger.negative_queries
    record["total_queries"] = ledger.total_queries
    record["hypothesis"] = _describe_hypothesis(hyp)
    return record


def _describe_hypothesis(hyp) -> dict[str, Any]:
    if hasattr(hyp, "cut"):
        return {"class": "threshold", "cut": float(hyp.cut)}
    return {
        "class": "disjunction",
        "thresholds": [float(v) for v in hyp.thresholds],
        "polarity": int(hyp.polarity),
    }


def _stats(values: list[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(np.mean(arr)),
        "median": float(np.median(arr)),
        "p25": float(np.quantile(arr, 0.25)),
        "p75": float(np.quantile(arr, 0.75)),
        "min": float(np.min(arr)),
        "max": float(np.max(arr)),
    }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    trials: list[dict[str, Any]]

    def aggregates(self) -> dict[str, Any]:
        agg: dict[str, Any] = {
            "negative_queries": _stats([t["negative_queries"] for t in self.trials]),
            "total_queries": _stats([t["total_queries"] for t in self.trials]),
            "holdout_error": _stats([t["holdout_error"] for t in self.trials]),
        }
        if all("pool_error" in t for t in self.trials):
            agg["pool_error"] = _stats([t["pool_error"] for t in self.trials])
        alpha = self.config.params.get("alpha")
        dist = build_distribution(self.config.dist)
        eta = getattr(dist, "best_error", None)
        if alpha is not None and eta is not None:
            target = (1.0 + float(alpha)) * float(eta)
            hits = sum(1 for t in self.trials if t["holdout_error"] <= target)
            agg["success_fraction"] = hits / len(self.trials)
            agg["success_target"] = target
        return agg

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "trials": self.trials,
            "aggregates": self.aggregates(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    def summary_row(self) -> dict[str, Any]:
        agg = self.aggregates()
        row: dict[str, Any] = {
            "algorithm": self.config.algorithm,
            "dist_kind": self.config.dist["kind"],
            "dist_eta": self.config.dist.get("eta", ""),
            "trials": self.config.trials,
            "seed": self.config.seed,
            "preset": self.config.preset,
        }
        for name in _PARAM_ORDER:
            row[name] = self.config.params.get(name, "")
        for metric in ("negative_queries", "total_queries", "holdout_error"):
            row[f"{metric}_median"] = agg[metric]["median"]
            row[f"{metric}_mean"] = agg[metric]["mean"]
        row["pool_error_median"] = (
            agg["pool_error"]["median"] if "pool_error" in agg else ""
        )
        row["success_fraction"] = agg.get("success_fraction", "")
        return row

    def summary_csv(self) -> str:
        row = self.summary_row()
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=list(row.keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return out.getvalue()


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run all trials (trial i seeded with seed+i) and assemble the report.

    Trials are independent; ``workers > 1`` fans them out to a process pool.
    Reports are identical regardless of worker count.
    """
    config.validate()
    indices = range(config.trials)
    if workers <= 1 or config.trials == 1:
        trials = [run_trial(config, i) for i in indices]
    else:
        chunk = max(1, config.trials // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(partial(run_trial, config), indices, chunksize=chunk))
    trials.sort(key=lambda t: t["trial"])
    return ExperimentReport(config=config, trials=trials)


def compare_reports(reports: list[ExperimentReport]) -> tuple[list[str], list[dict[str, Any]]]:
    """Align several runs of one distribution family into a single table."""
    if len(reports) < 2:
        raise ConfigError("compare needs at least two reports")
    kinds = {r.config.dist["kind"] for r in reports}
    if len(kinds) != 1:
        raise ConfigError(f"incompatible configs: distribution kinds {sorted(kinds)}")
    rows = [r.summary_row() for r in reports]
    return list(rows[0].keys()), rows


def comparison_csv(reports: list[ExperimentReport]) -> str:
    header, rows = compare_reports(reports)
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return out.getvalue()
