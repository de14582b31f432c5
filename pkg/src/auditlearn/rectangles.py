"""Auditing for disjunctions of coordinate thresholds over the positive orthant.

A hypothesis is parameterized by a threshold vector ``a``: the base class
predicts +1 exactly when some coordinate reaches its threshold (positives
outside the box), and the flipped polarity negates that.  General axis-aligned
rectangles reduce to this class in twice the dimension via
:func:`map_to_orthant`.

The agnostic auditor proceeds in rounds with a halving error scale, querying
each direction top-down under a per-round negative cap, maintaining a lower
bound on where the best thresholds can sit, and stopping once the negative
error of the surviving version space can no longer be refined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .core import (
    AuditOracle,
    CostLedger,
    Pool,
    SampleSizeConfig,
    ascending_order,
    descending_order,
    sample_size_relative,
    version_space_slack,
)
from .thresholds import cut_candidates

EXACT_WORK_BUDGET = 2 * 10**8


@dataclass(frozen=True)
class DisjunctionHypothesis:
    """+1 iff some coordinate reaches its threshold; ``polarity=-1`` flips all labels."""

    thresholds: tuple[float, ...]
    polarity: Literal[1, -1] = 1

    def predict(self, x: Sequence[float]) -> int:
        fired = any(v >= t for v, t in zip(x, self.thresholds))
        return self.polarity * (1 if fired else -1)

    def predict_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        fired = (xs >= np.asarray(self.thresholds)[None, :]).any(axis=1)
        return (self.polarity * np.where(fired, 1, -1)).astype(np.int8)


def map_to_orthant(x: Sequence[float]) -> np.ndarray:
    """Fold a point of R^d into R_+^{2d}: positive parts first, negative parts after."""
    x = np.asarray(x, dtype=np.float64)
    return np.concatenate((np.maximum(x, 0.0), np.maximum(-x, 0.0)), axis=-1)


def audit_disjunction_realizable(oracle: AuditOracle) -> DisjunctionHypothesis:
    """Label a realizable pool with at most one negative query per coordinate.

    Scans each coordinate from its largest value downward (re-visits of
    already-revealed points are free) and places the threshold just above the
    first negative seen, or at 0 when the coordinate exhausts without one.
    """
    xs = oracle.xs
    d = xs.shape[1]
    thresholds = []
    for i in range(d):
        scan = oracle.scan(descending_order(xs[:, i]), stop_after_negatives=1)
        if scan.exhausted:
            thresholds.append(0.0)
        else:
            thresholds.append(float(np.nextafter(xs[scan.visited[-1], i], np.inf)))
    return DisjunctionHypothesis(tuple(thresholds))


def threshold_grid(xs: np.ndarray, lower: np.ndarray | None = None) -> list[np.ndarray]:
    """Per-coordinate candidate cuts, clipped to the lower-bound vector."""
    d = xs.shape[1]
    if lower is None:
        lower = np.zeros(d)
    grids = []
    for i in range(d):
        cands = np.unique(np.maximum(cut_candidates(xs[:, i]), lower[i]))
        grids.append(cands)
    return grids


HEURISTIC_GRID_CAP = 4096


def _capped_grids(grids: list[np.ndarray], cap: int = HEURISTIC_GRID_CAP) -> list[np.ndarray]:
    """Quantile-subsample oversized candidate grids (ends always kept)."""
    out = []
    for g in grids:
        if len(g) <= cap:
            out.append(g)
        else:
            idx = np.unique(np.linspace(0, len(g) - 1, cap).astype(np.int64))
            out.append(g[idx])
    return out


def _exact_work(grids: list[np.ndarray], n: int) -> int:
    work = n
    for g in grids:
        work *= len(g)
    return work


def _grid_search(
    xs: np.ndarray,
    ys: np.ndarray,
    grids: list[np.ndarray],
    *,
    maximize_negative: bool = False,
    err_bound_count: float | None = None,
) -> tuple[np.ndarray, int, int]:
    """Full enumeration over the candidate grid (d <= 3).

    Minimizes the error count, or -- with ``maximize_negative`` -- maximizes
    the negative-error count among candidates whose error count stays within
    ``err_bound_count``.  Ties resolve to the lexicographically smallest
    candidate index vector.  Returns (thresholds, err_count, err_neg_count).
    """
    d = xs.shape[1]
    if d > 3:
        raise ValueError("exact search supports d <= 3")
    pos = ys == 1
    neg = ~pos
    reach = [xs[:, i][None, :] >= grids[i][:, None] for i in range(d)]

    best_key: tuple | None = None
    best: tuple[np.ndarray, int, int] | None = None

    def consider(pred: np.ndarray, idx_prefix: tuple[int, ...]) -> None:
        nonlocal best_key, best
        errs = np.count_nonzero(pred != pos[None, :], axis=1)
        if maximize_negative:
            err_negs = np.count_nonzero(pred & neg[None, :], axis=1)
            feasible = errs <= err_bound_count
            if not feasible.any():
                return
            masked = np.where(feasible, err_negs, -1)
            j = int(np.argmax(masked))
            key = (-int(masked[j]),)
        else:
            j = int(np.argmin(errs))
            key = (int(errs[j]),)
        if best_key is None or key < best_key:
            best_key = key
            a = np.array([grids[i][k] for i, k in enumerate(idx_prefix + (j,))])
            best = (a, int(errs[j]), int(np.count_nonzero(pred[j] & neg)))

    if d == 1:
        consider(reach[0], ())
    elif d == 2:
        for i0 in range(len(grids[0])):
            consider(reach[0][i0][None, :] | reach[1], (i0,))
    else:
        for i0 in range(len(grids[0])):
            m0 = reach[0][i0]
            for i1 in range(len(grids[1])):
                consider((m0 | reach[1][i1])[None, :] | reach[2], (i0, i1))
    assert best is not None
    return best


class _CoordinateSearch:
    """Shared machinery for the coordinate-descent/ascent heuristics."""

    def __init__(self, xs: np.ndarray, ys: np.ndarray, grids: list[np.ndarray]) -> None:
        self.xs = xs
        self.ys = ys
        self.grids = grids
        self.d = xs.shape[1]
        self.n = xs.shape[0]
        self.order = [ascending_order(xs[:, i]) for i in range(self.d)]
        self.pos = ys == 1
        self.neg = ~self.pos

    def column_stats(self, a: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Error and negative-error counts for every grid value of coordinate ``i``
        with the other coordinates of ``a`` held fixed."""
        covered = np.zeros(self.n, dtype=bool)
        for j in range(self.d):
            if j != i:
                covered |= self.xs[:, j] >= a[j]
        fixed_err = np.count_nonzero(covered & self.neg)
        fixed_neg = fixed_err
        sub = self.order[i][~covered[self.order[i]]]
        v = self.xs[sub, i]
        spos = np.concatenate(([0], np.cumsum(self.pos[sub])))
        sneg = np.concatenate(([0], np.cumsum(self.neg[sub])))
        ks = np.searchsorted(v, self.grids[i], side="left")
        errs = fixed_err + spos[ks] + (sneg[-1] - sneg[ks])
        err_negs = fixed_neg + (sneg[-1] - sneg[ks])
        return errs, err_negs

    def evaluate(self, a: np.ndarray) -> tuple[int, int]:
        pred = (self.xs >= a[None, :]).any(axis=1)
        return (
            int(np.count_nonzero(pred != self.pos)),
            int(np.count_nonzero(pred & self.neg)),
        )

    def starts(self, rng: np.random.Generator | None, restarts: int) -> list[np.ndarray]:
        lows = np.array([g[0] for g in self.grids])
        highs = np.array([g[-1] for g in self.grids])
        out = [lows, highs]
        if rng is not None:
            for _ in range(max(restarts - 2, 0)):
                out.append(np.array([g[rng.integers(0, len(g))] for g in self.grids]))
        return out


def _auto_restarts(n: int, requested: int | None) -> int:
    if requested is not None:
        return requested
    if n <= 20_000:
        return 16
    if n <= 500_000:
        return 8
    return 3


def _descend(search: _CoordinateSearch, a0: np.ndarray, max_passes: int = 8) -> tuple[np.ndarray, int]:
    a = a0.copy()
    err, _ = search.evaluate(a)
    for _ in range(max_passes):
        improved = False
        for i in range(search.d):
            errs, _ = search.column_stats(a, i)
            j = int(np.argmin(errs))
            if errs[j] < err:
                err = int(errs[j])
                a[i] = search.grids[i][j]
                improved = True
        if not improved:
            break
    return a, err


def _heuristic_erm(
    search: _CoordinateSearch, rng: np.random.Generator | None, restarts: int | None
) -> tuple[np.ndarray, int]:
    n_starts = _auto_restarts(search.n, restarts)
    best: tuple[int, tuple[float, ...]] | None = None
    best_a: np.ndarray | None = None
    for a0 in search.starts(rng, n_starts):
        a, err = _descend(search, a0)
        key = (err, tuple(a))
        if best is None or key < best:
            best, best_a = key, a
    assert best_a is not None
    return best_a, best[0]


def _heuristic_max_neg(
    search: _CoordinateSearch,
    bound_count: float,
    seed_a: np.ndarray,
    rng: np.random.Generator | None,
    restarts: int | None,
) -> int:
    n_starts = _auto_restarts(search.n, restarts)
    best_neg = -1
    for a0 in [seed_a] + search.starts(rng, n_starts):
        err, err_neg = search.evaluate(a0)
        if err > bound_count:
            continue
        a = a0.copy().astype(np.float64)
        for _ in range(8):
            improved = False
            for i in range(search.d):
                errs, err_negs = search.column_stats(a, i)
                feasible = errs <= bound_count
                if not feasible.any():
                    continue
                masked = np.where(feasible, err_negs, -1)
                j = int(np.argmax(masked))
                if masked[j] > err_neg:
                    err_neg = int(masked[j])
                    a[i] = search.grids[i][j]
                    improved = True
            if not improved:
                break
        best_neg = max(best_neg, err_neg)
    return max(best_neg, 0)


def disjunction_erm(
    sample: Pool,
    lower: Sequence[float] | None = None,
    *,
    mode: Literal["auto", "exact", "heuristic"] = "auto",
    rng: np.random.Generator | None = None,
    restarts: int | None = None,
) -> DisjunctionHypothesis:
    """Minimize sample error over threshold vectors ``a >= lower``.

    Exact mode enumerates the full candidate grid (d <= 3, small samples);
    heuristic mode runs coordinate descent from several starts, optimizing one
    coordinate exactly per step.
    """
    a, _ = _disjunction_erm(
        sample.xs, sample.ys, None if lower is None else np.asarray(lower, dtype=np.float64),
        mode=mode, rng=rng, restarts=restarts,
    )
    return DisjunctionHypothesis(tuple(float(v) for v in a))


def _disjunction_erm(
    xs: np.ndarray,
    ys: np.ndarray,
    lower: np.ndarray | None,
    *,
    mode: str = "auto",
    rng: np.random.Generator | None = None,
    restarts: int | None = None,
) -> tuple[np.ndarray, int]:
    if xs.shape[0] < 1:
        raise ValueError("empty sample")
    grids = threshold_grid(xs, lower)
    exact_ok = xs.shape[1] <= 3 and _exact_work(grids, xs.shape[0]) <= EXACT_WORK_BUDGET
    if mode == "exact" and not exact_ok:
        raise ValueError("instance too large for exact search")
    if mode == "exact" or (mode == "auto" and exact_ok):
        a, err, _ = _grid_search(xs, ys, grids)
        return a, err
    search = _CoordinateSearch(xs, ys, _capped_grids(grids))
    return _heuristic_erm(search, rng, restarts)


def max_negative_error_over_version_space(
    sample: Pool,
    eta: float,
    nu: float,
    lower: Sequence[float] | None,
    best_err: float,
    *,
    mode: Literal["auto", "exact", "heuristic"] = "auto",
    rng: np.random.Generator | None = None,
    restarts: int | None = None,
) -> float:
    """Largest negative error among hypotheses whose sample error stays within
    the version-space slack around ``best_err`` (thresholds ``>= lower``).

    The heuristic is a lower bound on the true maximum; exact mode enumerates
    the candidate grid.
    """
    return _max_negative_error(
        sample.xs,
        sample.ys,
        eta,
        nu,
        None if lower is None else np.asarray(lower, dtype=np.float64),
        best_err,
        mode=mode,
        rng=rng,
        restarts=restarts,
    )


def _max_negative_error(
    xs: np.ndarray,
    ys: np.ndarray,
    eta: float,
    nu: float,
    lower: np.ndarray | None,
    best_err: float,
    *,
    mode: str = "auto",
    rng: np.random.Generator | None = None,
    restarts: int | None = None,
    seed_thresholds: np.ndarray | None = None,
) -> float:
    n = xs.shape[0]
    bound = best_err + version_space_slack(best_err, eta, nu)
    bound_count = bound * n
    grids = threshold_grid(xs, lower)
    exact_ok = xs.shape[1] <= 3 and _exact_work(grids, n) <= EXACT_WORK_BUDGET
    if mode == "exact" and not exact_ok:
        raise ValueError("instance too large for exact search")
    if mode == "exact" or (mode == "auto" and exact_ok):
        _, _, err_neg = _grid_search(
            xs, ys, grids, maximize_negative=True, err_bound_count=bound_count
        )
        return err_neg / n

    search = _CoordinateSearch(xs, ys, _capped_grids(grids))
    if seed_thresholds is None:
        seed_a, _ = _heuristic_erm(search, rng, restarts)
    else:
        seed_a = np.asarray(seed_thresholds, dtype=np.float64)
    return _heuristic_max_neg(search, bound_count, seed_a, rng, restarts) / n


def _refine_round(
    xs: np.ndarray,
    ys: np.ndarray,
    eta: float,
    nu: float,
    lower: np.ndarray,
    *,
    mode: str,
    rng: np.random.Generator | None,
    restarts: int | None,
) -> tuple[np.ndarray, int, int]:
    """One round's restricted ERM plus version-space negative-error maximum.

    Shares candidate grids and per-coordinate sort orders between the two
    searches.  Returns (thresholds, err_count, max_negative_err_count).
    """
    n = xs.shape[0]
    grids = threshold_grid(xs, lower)
    exact_ok = xs.shape[1] <= 3 and _exact_work(grids, n) <= EXACT_WORK_BUDGET
    if mode == "exact" and not exact_ok:
        raise ValueError("instance too large for exact search")
    if mode == "exact" or (mode == "auto" and exact_ok):
        a, err, _ = _grid_search(xs, ys, grids)
        bound_count = (err / n + version_space_slack(err / n, eta, nu)) * n
        _, _, err_neg = _grid_search(
            xs, ys, grids, maximize_negative=True, err_bound_count=bound_count
        )
        return a, err, err_neg
    search = _CoordinateSearch(xs, ys, _capped_grids(grids))
    a, err = _heuristic_erm(search, rng, restarts)
    bound_count = (err / n + version_space_slack(err / n, eta, nu)) * n
    err_neg = _heuristic_max_neg(search, bound_count, a, rng, restarts)
    return a, err, err_neg


@dataclass
class RoundTrace:
    """Per-round record of the agnostic rectangle auditor."""

    t: int
    eta_t: float
    sample_size: int
    lower: tuple[float, ...]
    best_err: float
    eta_hat: float
    direction_negatives: list[int]
    ledger_negative: int
    ledger_total: int
    exited_early: bool


@dataclass
class RectangleAuditResult:
    hypothesis: DisjunctionHypothesis
    ledger: CostLedger
    rounds: list[RoundTrace] = field(default_factory=list)


def audit_disjunction_agnostic(
    dist,
    eta_min: float,
    alpha: float,
    delta: float,
    d: int,
    cfg: SampleSizeConfig,
    rng: np.random.Generator,
    *,
    mode: Literal["auto", "exact", "heuristic"] = "auto",
    restarts: int | None = None,
    ledger: CostLedger | None = None,
) -> RectangleAuditResult:
    """Agnostic auditor for the outside-positive disjunction class.

    Runs rounds t = 0..floor(log2(1/eta_min)) with error scale halving each
    round.  Each round draws a fresh relative-guarantee sample, scans every
    direction top-down with a capped negative budget, treats everything
    unqueried as negative, and measures the worst negative error within the
    surviving version space; once that estimate exceeds a quarter of the
    round scale no further refinement is possible and the current restricted
    ERM is returned.
    """
    for name, value in (("eta_min", eta_min), ("alpha", alpha), ("delta", delta)):
        if not (0 < value <= 1):
            raise ValueError(f"{name} must be in (0,1], got {value}")
    if d < 1:
        raise ValueError("d must be >= 1")
    nu = alpha / 25.0
    ledger = ledger if ledger is not None else CostLedger()
    rounds_total = math.floor(math.log2(1.0 / eta_min))
    delta_div = max(1, math.ceil(math.log2(1.0 / eta_min)))
    trace: list[RoundTrace] = []
    hypothesis: DisjunctionHypothesis | None = None

    for t in range(rounds_total + 1):
        eta_t = 2.0**-t
        n_t = sample_size_relative(eta_t, delta / delta_div, 10 * d, nu, cfg)
        xs, ys = dist.sample(n_t, rng)
        pool = Pool(xs, ys)
        if pool.dim != d:
            raise ValueError(f"distribution dimension {pool.dim} != d={d}")
        oracle = AuditOracle(pool, ledger)

        cap = math.ceil((1 + nu) * eta_t * n_t) + 2
        lower = np.zeros(d)
        direction_negs = []
        for i in range(d):
            scan = oracle.scan(
                descending_order(pool.xs[:, i]),
                stop_after_negatives=cap,
                skip_revealed=True,
            )
            assert scan.negatives_seen <= cap
            direction_negs.append(scan.negatives_seen)
            if oracle.revealed.all():
                lower[i] = 0.0
            else:
                lower[i] = pool.xs[scan.visited[-1], i]

        ys_bt = np.where(oracle.revealed, pool.ys, -1).astype(np.int8)
        a_best, err_count, eta_hat_count = _refine_round(
            pool.xs, ys_bt, eta_t, nu, lower, mode=mode, rng=rng, restarts=restarts
        )
        best_err = err_count / n_t
        eta_hat = eta_hat_count / n_t
        hypothesis = DisjunctionHypothesis(tuple(float(v) for v in a_best))
        exited = eta_hat > eta_t / 4.0
        trace.append(
            RoundTrace(
                t=t,
                eta_t=eta_t,
                sample_size=n_t,
                lower=tuple(float(v) for v in lower),
                best_err=best_err,
                eta_hat=eta_hat,
                direction_negatives=direction_negs,
                ledger_negative=ledger.negative_queries,
                ledger_total=ledger.total_queries,
                exited_early=exited,
            )
        )
        if exited:
            break

    assert hypothesis is not None
    return RectangleAuditResult(hypothesis=hypothesis, ledger=ledger, rounds=trace)


def outside_negative_violations(
    xs: np.ndarray, revealed: Sequence[tuple[int, int]]
) -> list[tuple[int, int]]:
    """Consistency audit for the outside-negative polarity.

    Under every hypothesis of that class, any point coordinate-wise dominated
    by a positively-revealed point must itself be positive.  Returns (i, j)
    pairs where point i was revealed positive, j revealed negative, and j <= i
    coordinate-wise.
    """
    xs = np.asarray(xs)
    positives = [i for i, y in revealed if y == 1]
    negatives = [j for j, y in revealed if y == -1]
    bad = []
    for i in positives:
        for j in negatives:
            if np.all(xs[j] <= xs[i]):
                bad.append((i, j))
    return bad
