"""Auditing algorithms for thresholds on [0, 1].

A threshold hypothesis predicts +1 exactly on ``x >= cut``.  The realizable
auditor scans the pool from the right and pays for a single negative label;
the pool auditor tolerates up to ``k`` pool errors for ``k + 1`` negatives;
the agnostic auditor learns from a distribution with a negative-query bill
that does not grow as the best-in-class error shrinks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    AuditOracle,
    CostLedger,
    Pool,
    SampleSizeConfig,
    ascending_order,
    descending_order,
    sample_size_absolute,
    sample_size_relative,
)


@dataclass(frozen=True)
class ThresholdHypothesis:
    """Predicts +1 exactly on points with coordinate >= cut."""

    cut: float

    def predict(self, x: Sequence[float] | float) -> int:
        value = x[0] if isinstance(x, (list, tuple, np.ndarray)) else x
        return 1 if value >= self.cut else -1

    def predict_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        values = xs[:, 0] if xs.ndim == 2 else xs
        return np.where(values >= self.cut, 1, -1).astype(np.int8)


def cut_candidates(values: np.ndarray) -> np.ndarray:
    """Candidate cuts: below-min sentinel 0.0, midpoints of consecutive distinct
    values, and a sentinel just above the maximum (the all-negative hypothesis)."""
    distinct = np.unique(np.asarray(values, dtype=np.float64))
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    # guard against midpoints rounding down onto the lower value
    mids = np.maximum(mids, np.nextafter(distinct[:-1], np.inf))
    top = np.nextafter(distinct[-1], np.inf)
    return np.concatenate(([0.0], mids, [top]))


def _erm_1d(
    values: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray | None = None,
) -> tuple[float, float, float]:
    """Exact threshold ERM sweep over a weighted multiset.

    Returns ``(cut, error_weight, total_weight)`` with the smallest optimal
    cut.  Error weights are exact sums of the (integer, in practice) weights.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty sample")
    labels = np.asarray(labels)
    if weights is None:
        weights = np.ones(values.size, dtype=np.float64)
    order = ascending_order(values)
    v, y, w = values[order], labels[order], weights[order]
    wpos = np.where(y == 1, w, 0.0)
    wneg = np.where(y == -1, w, 0.0)
    pos_cum = np.concatenate(([0.0], np.cumsum(wpos)))
    neg_cum = np.concatenate(([0.0], np.cumsum(wneg)))
    total_neg = neg_cum[-1]
    # boundary k = number of sorted points strictly below the cut
    boundaries = np.nonzero(v[:-1] != v[1:])[0] + 1
    ks = np.concatenate(([0], boundaries, [v.size]))
    errs = pos_cum[ks] + (total_neg - neg_cum[ks])
    best = int(np.argmin(errs))
    k = int(ks[best])
    if k == 0:
        cut = 0.0
    elif k == v.size:
        cut = float(np.nextafter(v[-1], np.inf))
    else:
        cut = float((v[k - 1] + v[k]) / 2.0)
        if cut <= v[k - 1]:
            cut = float(np.nextafter(v[k - 1], np.inf))
    return cut, float(errs[best]), float(np.sum(w))


def threshold_erm(sample: Pool) -> ThresholdHypothesis:
    """Exact empirical risk minimizer; ties resolved toward the smallest cut."""
    if sample.dim != 1:
        raise ValueError("threshold ERM expects 1-d points")
    cut, _, _ = _erm_1d(sample.xs[:, 0], sample.ys)
    return ThresholdHypothesis(cut)


def audit_threshold_pool(oracle: AuditOracle, k: int) -> ThresholdHypothesis:
    """Label a pool with at most ``k`` in-class errors using at most ``k + 1`` negatives.

    Queries from the highest coordinate downward, stops once ``k + 1``
    negatives were observed (or the pool is exhausted), and returns the exact
    ERM of the queried prefix.  When the pool really admits a hypothesis with
    at most ``k`` errors, the returned error equals the full-pool optimum.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if oracle.pool.dim != 1:
        raise ValueError("threshold auditing expects 1-d points")
    values = oracle.xs[:, 0]
    scan = oracle.scan(descending_order(values), stop_after_negatives=k + 1)
    cut, _, _ = _erm_1d(values[scan.visited], scan.labels)
    return ThresholdHypothesis(cut)


def audit_threshold_realizable(oracle: AuditOracle) -> ThresholdHypothesis:
    """Realizable-case auditor: right-to-left scan, at most one negative query."""
    return audit_threshold_pool(oracle, 0)


@dataclass
class SubsetSelection:
    """A representative sub-multiset drawn block-wise from a replicated, sorted pool.

    ``sq_indices`` index into the pool the selection was built from; labels
    stay hidden.  ``block_count`` is the number of replication blocks and
    ``draws_per_block`` the number of uniform draws from each.
    """

    block_count: int
    draws_per_block: int
    pool_size: int
    sq_indices: np.ndarray

    def __len__(self) -> int:
        return int(self.sq_indices.size)


def representative_subset(
    values: np.ndarray,
    eta_max: float,
    delta: float,
    rng: np.random.Generator,
) -> SubsetSelection:
    """Select a small sub-multiset that still represents the pool well.

    The pool is replicated ``T = max(floor(1/(3 eta_max)), 1)`` times, sorted,
    split into ``T`` consecutive blocks of the original size, and
    ``ceil(14 ln(8/delta))`` points are drawn uniformly with replacement from
    each block.
    """
    if not (0 < eta_max <= 1):
        raise ValueError("eta_max must be in (0,1]")
    if not (0 < delta < 1):
        raise ValueError("delta must be in (0,1)")
    values = np.asarray(values, dtype=np.float64)
    m = values.size
    if m < 1:
        raise ValueError("empty pool")
    block_count = max(math.floor(1.0 / (3.0 * eta_max)), 1)
    draws_per_block = math.ceil(14.0 * math.log(8.0 / delta))
    sorted_base = ascending_order(values)
    picks = []
    for t in range(block_count):
        offsets = rng.integers(0, m, size=draws_per_block)
        upos = t * m + offsets
        picks.append(sorted_base[upos // block_count])
    return SubsetSelection(
        block_count=block_count,
        draws_per_block=draws_per_block,
        pool_size=m,
        sq_indices=np.concatenate(picks),
    )


@dataclass
class ThresholdAuditResult:
    """Hypothesis plus the bill and per-step checkpoints of an agnostic audit run."""

    hypothesis: ThresholdHypothesis
    ledger: CostLedger
    checkpoints: dict


def audit_threshold_agnostic(
    dist,
    eta_max: float,
    alpha: float,
    delta: float,
    cfg: SampleSizeConfig,
    rng: np.random.Generator,
    *,
    with_replacement: bool = True,
    ledger: CostLedger | None = None,
) -> ThresholdAuditResult:
    """Agnostic threshold auditor for distributions with best error at most ``eta_max``.

    Stage one localizes the optimum from a representative subset, querying
    high-to-low with a stopping cap on observed negatives; stage two densely
    re-samples a window around the stage-one cut and returns its exact ERM.
    The negative-query bill is governed by ``alpha`` and ``delta`` alone --
    not by ``eta_max``.
    """
    for name, value in (("eta_max", eta_max), ("alpha", alpha), ("delta", delta)):
        if not (0 < value < 1):
            raise ValueError(f"{name} must be in (0,1), got {value}")
    nu = alpha / 5.0
    n0 = sample_size_relative(eta_max, delta / 2.0, 1, nu, cfg)
    xs0, ys0 = dist.sample(n0, rng)
    pool = Pool(xs0, ys0)
    if pool.dim != 1:
        raise ValueError("threshold auditing expects 1-d points")
    oracle = AuditOracle(pool, ledger)
    neg_start, total_start = oracle.ledger.snapshot()
    values = pool.xs[:, 0]

    n_s = sample_size_absolute(min((1 + nu) * eta_max, 1.0), delta / 2.0, 1, cfg)
    s_idx = _draw(rng, n0, n_s, with_replacement)
    subset = representative_subset(
        values[s_idx], min(2 * (1 + nu) * eta_max, 1.0), delta / 2.0, rng
    )
    sq_base = s_idx[subset.sq_indices]

    cap = math.ceil(12 * len(subset) * (1 + nu) * eta_max) + 1
    scan_order = sq_base[descending_order(values[sq_base])]
    scan = oracle.scan(scan_order, stop_after_negatives=cap)
    assert scan.negatives_seen <= cap
    cut1, _, _ = _erm_1d(values[scan.visited], scan.labels)
    after_scan = oracle.ledger.snapshot()

    n1_side = math.ceil(36 * (1 + nu) * eta_max * n0)
    s1 = _closest_window(values, cut1, n1_side)

    n2 = sample_size_absolute(nu / 72.0, delta / 2.0, 1, cfg)
    draws = _draw(rng, s1.size, n2, with_replacement)
    s2_base = s1[draws]
    oracle.reveal_all(s2_base)
    weights = np.bincount(draws, minlength=s1.size).astype(np.float64)
    live = weights > 0
    cut2, _, _ = _erm_1d(values[s1[live]], pool.ys[s1[live]], weights[live])
    final = oracle.ledger.snapshot()
    assert final[0] - neg_start <= cap + n2

    checkpoints = {
        "n_s0": n0,
        "n_s": n_s,
        "n_sq": len(subset),
        "scan_cap": cap,
        "scan_negatives": scan.negatives_seen,
        "stage_one_cut": cut1,
        "n_s1": int(s1.size),
        "n_s2": n2,
        "ledger_start": [neg_start, total_start],
        "ledger_after_scan": list(after_scan),
        "ledger_final": list(final),
    }
    return ThresholdAuditResult(ThresholdHypothesis(cut2), oracle.ledger, checkpoints)


def _draw(rng: np.random.Generator, population: int, size: int, with_replacement: bool) -> np.ndarray:
    if with_replacement:
        return rng.integers(0, population, size=size)
    return rng.permutation(population)[: min(size, population)]


def _closest_window(values: np.ndarray, center: float, per_side: int) -> np.ndarray:
    """Indices of the ``per_side`` closest points on each side of ``center``.

    Points at exactly ``center`` count as the right side (they are predicted
    positive).  Short sides contribute everything they have.
    """
    order = ascending_order(values)
    split = int(np.searchsorted(values[order], center, side="left"))
    left = order[max(0, split - per_side) : split]
    right = order[split : split + per_side]
    return np.concatenate((left, right))
