"""Reference learners the auditors are compared against."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AuditOracle, CostLedger, Pool, ascending_order
from .rectangles import DisjunctionHypothesis, disjunction_erm
from .thresholds import ThresholdHypothesis, threshold_erm


def binary_search_active(oracle: AuditOracle) -> ThresholdHypothesis:
    """Bisection on a realizable pool; at most ceil(log2 m) + 1 total queries.

    Optimal for the active (total-query) budget, but its bill includes
    negative answers, which is exactly what auditing avoids.
    """
    if oracle.pool.dim != 1:
        raise ValueError("binary search expects 1-d points")
    values = oracle.xs[:, 0]
    order = ascending_order(values)
    m = order.size
    lo, hi = -1, m  # first-positive position is in (lo, hi]
    queries = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if oracle.query(int(order[mid])) == 1:
            hi = mid
        else:
            lo = mid
        queries += 1
    assert queries <= math.ceil(math.log2(max(m, 2))) + 1
    if hi == m:
        cut = float(np.nextafter(values[order[-1]], np.inf))
    elif hi == 0:
        cut = 0.0
    else:
        low_v, high_v = values[order[hi - 1]], values[order[hi]]
        cut = float((low_v + high_v) / 2.0)
        if cut <= low_v:
            cut = float(np.nextafter(low_v, np.inf))
    return ThresholdHypothesis(cut)


@dataclass
class PassiveResult:
    hypothesis: ThresholdHypothesis | DisjunctionHypothesis
    ledger: CostLedger


def passive_erm(
    dist,
    n: int,
    hypothesis_class: str,
    rng: np.random.Generator,
    *,
    ledger: CostLedger | None = None,
) -> PassiveResult:
    """Draw ``n`` examples, pay for every label, return the class ERM."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xs, ys = dist.sample(n, rng)
    pool = Pool(xs, ys)
    oracle = AuditOracle(pool, ledger)
    oracle.reveal_all(np.arange(len(pool)))
    if hypothesis_class == "threshold":
        hyp: ThresholdHypothesis | DisjunctionHypothesis = threshold_erm(pool)
    elif hypothesis_class == "disjunction":
        hyp = disjunction_erm(pool, rng=rng)
    else:
        raise ValueError(f"unknown hypothesis class: {hypothesis_class}")
    return PassiveResult(hypothesis=hyp, ledger=oracle.ledger)
