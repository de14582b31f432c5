"""Shared domain types, error metrics, sample-size formulas, and the metered label oracle.

Labels are always +1/-1.  A query only costs when the revealed label is
negative; the :class:`CostLedger` tracks both the negative-query count and the
total query count so algorithms can be compared on either axis.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol, Sequence

import numpy as np


class BudgetExhausted(RuntimeError):
    """Raised when revealing one more negative label would exceed the ledger budget."""


@dataclass(frozen=True)
class Point:
    """A point of the data domain; coordinates are non-negative reals."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coords) == 0:
            raise ValueError("point needs at least one coordinate")
        if any(c < 0 for c in self.coords):
            raise ValueError("coordinates must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class LabeledExample:
    point: Point
    label: int

    def __post_init__(self) -> None:
        if self.label not in (-1, 1):
            raise ValueError(f"label must be +1 or -1, got {self.label}")


class Pool:
    """An ordered multiset of labeled points; duplicates are permitted.

    Coordinates are stored as an (m, d) float array and labels as an (m,)
    array of +1/-1.  Labels are hidden from algorithms: access goes through an
    :class:`AuditOracle`.
    """

    __slots__ = ("xs", "ys")

    def __init__(self, xs: np.ndarray, ys: np.ndarray) -> None:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim == 1:
            xs = xs[:, None]
        ys = np.asarray(ys, dtype=np.int8)
        if xs.shape[0] != ys.shape[0]:
            raise ValueError("points and labels must have equal length")
        if xs.shape[0] < 1:
            raise ValueError("pool must contain at least one example")
        if not np.all(np.abs(ys) == 1):
            raise ValueError("labels must be +1 or -1")
        self.xs = xs
        self.ys = ys

    @classmethod
    def from_examples(cls, examples: Iterable[LabeledExample]) -> "Pool":
        examples = list(examples)
        xs = np.array([e.point.coords for e in examples], dtype=np.float64)
        ys = np.array([e.label for e in examples], dtype=np.int8)
        return cls(xs, ys)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[float] | float, int]]) -> "Pool":
        xs, ys = [], []
        for x, y in pairs:
            xs.append([x] if np.isscalar(x) else list(x))
            ys.append(y)
        return cls(np.array(xs, dtype=np.float64), np.array(ys, dtype=np.int8))

    def __len__(self) -> int:
        return self.xs.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    def examples(self) -> Iterator[LabeledExample]:
        for i in range(len(self)):
            yield LabeledExample(Point(tuple(self.xs[i])), int(self.ys[i]))

    def subset(self, indices: np.ndarray) -> "Pool":
        return Pool(self.xs[indices], self.ys[indices])


def save_pool_csv(pool: Pool, path: str) -> None:
    """Write a pool as CSV with header ``i,x0,...,x{d-1},y`` (UTF-8, LF endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i"] + [f"x{j}" for j in range(pool.dim)] + ["y"])
        for i in range(len(pool)):
            writer.writerow([i] + [repr(float(v)) for v in pool.xs[i]] + [int(pool.ys[i])])


def load_pool_csv(path: str) -> Pool:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "i" or header[-1] != "y":
            raise ValueError(f"unexpected pool header: {header}")
        d = len(header) - 2
        xs, ys = [], []
        for row in reader:
            if not row:
                continue
            xs.append([float(v) for v in row[1 : 1 + d]])
            y = int(row[-1])
            if y not in (-1, 1):
                raise ValueError(f"label must be +1 or -1, got {y}")
            ys.append(y)
    return Pool(np.array(xs), np.array(ys))


@dataclass
class CostLedger:
    """Monotone counters for queries, split by revealed label.

    ``negative_queries`` is the auditing cost; ``total_queries`` the active
    label cost.  When ``budget`` is set, a reveal that would push
    ``negative_queries`` past it raises :class:`BudgetExhausted` instead.
    """

    negative_queries: int = 0
    total_queries: int = 0
    budget: int | None = None

    def charge(self, fresh_total: int, fresh_negative: int) -> None:
        if fresh_total < 0 or fresh_negative < 0 or fresh_negative > fresh_total:
            raise ValueError("invalid charge")
        if self.budget is not None and self.negative_queries + fresh_negative > self.budget:
            raise BudgetExhausted(
                f"negative-query budget {self.budget} would be exceeded"
            )
        self.total_queries += fresh_total
        self.negative_queries += fresh_negative

    def snapshot(self) -> tuple[int, int]:
        return (self.negative_queries, self.total_queries)

    def to_json_dict(self) -> dict:
        return {
            "negative_queries": self.negative_queries,
            "total_queries": self.total_queries,
        }


@dataclass
class ScanResult:
    """Outcome of an ordered query scan (see :meth:`AuditOracle.scan`)."""

    visited: np.ndarray
    labels: np.ndarray
    negatives_seen: int
    exhausted: bool


class AuditOracle:
    """Reveals hidden labels on request and meters the cost of doing so.

    Re-querying an already-revealed index returns the memoized label and
    leaves the ledger untouched.  Several pools may share one ledger (pass it
    explicitly) so a multi-stage algorithm accumulates a single bill.
    """

    def __init__(self, pool: Pool, ledger: CostLedger | None = None) -> None:
        self.pool = pool
        self.ledger = ledger if ledger is not None else CostLedger()
        self.revealed = np.zeros(len(pool), dtype=bool)

    def __len__(self) -> int:
        return len(self.pool)

    @property
    def xs(self) -> np.ndarray:
        """Coordinates are public; only labels are hidden."""
        return self.pool.xs

    def is_revealed(self, index: int) -> bool:
        return bool(self.revealed[index])

    def query(self, index: int) -> int:
        if index < 0 or index >= len(self.pool):
            raise IndexError(f"index {index} out of range for pool of {len(self.pool)}")
        label = int(self.pool.ys[index])
        if not self.revealed[index]:
            self.ledger.charge(1, 1 if label == -1 else 0)
            self.revealed[index] = True
        return label

    def _reveal_bulk(self, indices: np.ndarray) -> None:
        """Reveal the fresh subset of ``indices`` (visit order), honoring the budget."""
        if indices.size == 0:
            return
        first = np.zeros(indices.size, dtype=bool)
        _, first_pos = np.unique(indices, return_index=True)
        first[first_pos] = True
        fresh = indices[first & ~self.revealed[indices]]
        if fresh.size == 0:
            return
        neg = self.pool.ys[fresh] == -1
        budget = self.ledger.budget
        if budget is not None:
            allowed = budget - self.ledger.negative_queries
            cum = np.cumsum(neg)
            if cum[-1] > allowed:
                cut = int(np.searchsorted(cum, allowed + 1))  # position of violating reveal
                keep = fresh[:cut]
                self.revealed[keep] = True
                self.ledger.charge(len(keep), int(np.count_nonzero(neg[:cut])))
                raise BudgetExhausted(
                    f"negative-query budget {budget} would be exceeded"
                )
        self.revealed[fresh] = True
        self.ledger.charge(len(fresh), int(np.count_nonzero(neg)))

    def scan(
        self,
        order: np.ndarray,
        stop_after_negatives: int | None = None,
        skip_revealed: bool = False,
    ) -> ScanResult:
        """Query points in ``order`` until ``stop_after_negatives`` negatives were seen.

        Equivalent to calling :meth:`query` element by element; negatives are
        counted per visited element (duplicates in ``order`` count again),
        while the ledger only pays for fresh reveals.  With ``skip_revealed``
        already-revealed points are not visited at all.
        """
        order = np.asarray(order, dtype=np.int64)
        if skip_revealed:
            order = order[~self.revealed[order]]
        labels = self.pool.ys[order]
        if stop_after_negatives is None:
            prefix_len = order.size
        else:
            if stop_after_negatives < 1:
                raise ValueError("stop_after_negatives must be >= 1")
            neg_cum = np.cumsum(labels == -1)
            hits = np.nonzero(neg_cum == stop_after_negatives)[0]
            prefix_len = int(hits[0]) + 1 if hits.size else order.size
        visited = order[:prefix_len]
        self._reveal_bulk(visited)
        negatives = int(np.count_nonzero(labels[:prefix_len] == -1))
        return ScanResult(
            visited=visited,
            labels=labels[:prefix_len].astype(np.int8),
            negatives_seen=negatives,
            exhausted=prefix_len == order.size
            and (stop_after_negatives is None or negatives < stop_after_negatives),
        )

    def reveal_all(self, indices: np.ndarray) -> np.ndarray:
        """Reveal every index in ``indices`` (bulk form of repeated queries)."""
        indices = np.asarray(indices, dtype=np.int64)
        self._reveal_bulk(indices)
        return self.pool.ys[indices].astype(np.int8)


class Hypothesis(Protocol):
    """A deterministic +1/-1 predictor over points."""

    def predict(self, x: Sequence[float]) -> int: ...

    def predict_many(self, xs: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ConstantHypothesis:
    label: int

    def predict(self, x: Sequence[float]) -> int:
        return self.label

    def predict_many(self, xs: np.ndarray) -> np.ndarray:
        return np.full(xs.shape[0], self.label, dtype=np.int8)


def error_rate(sample: Pool, hyp: Hypothesis) -> float:
    """Fraction of ``sample`` misclassified by ``hyp`` (exact count / size)."""
    if len(sample) < 1:
        raise ValueError("empty sample")
    preds = hyp.predict_many(sample.xs)
    return int(np.count_nonzero(preds != sample.ys)) / len(sample)


def negative_error_rate(sample: Pool, hyp: Hypothesis) -> float:
    """Fraction of ``sample`` predicted positive while truly negative."""
    if len(sample) < 1:
        raise ValueError("empty sample")
    preds = hyp.predict_many(sample.xs)
    hits = (preds == 1) & (sample.ys == -1)
    return int(np.count_nonzero(hits)) / len(sample)


@dataclass(frozen=True)
class SampleSizeConfig:
    """The two universal constants of the sample-size formulas.

    The guarantees hold for *some* constants; experiments must pin them.  The
    ``desk`` preset keeps sample sizes tractable on a workstation, ``theory``
    is deliberately generous for guarantee-faithful statistical tests.
    """

    C: float
    c: float
    preset: str = "custom"

    def __post_init__(self) -> None:
        if self.C <= 0 or self.c <= 0:
            raise ValueError("constants must be positive")

    @classmethod
    def desk(cls) -> "SampleSizeConfig":
        return cls(C=1.0, c=4.0, preset="desk")

    @classmethod
    def theory(cls) -> "SampleSizeConfig":
        return cls(C=8.0, c=8.0, preset="theory")


def _check_unit_interval(name: str, value: float, *, closed_top: bool = False) -> None:
    top_ok = value <= 1 if closed_top else value < 1
    if not (0 < value and top_ok):
        raise ValueError(f"{name} must be in (0,1{']' if closed_top else ')'}, got {value}")


def sample_size_absolute(eps: float, delta: float, dim: int, cfg: SampleSizeConfig) -> int:
    """Sample size for an additive-eps uniform error guarantee: ceil(C(d+ln(c/delta))/eps^2)."""
    _check_unit_interval("eps", eps, closed_top=True)
    _check_unit_interval("delta", delta, closed_top=True)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if cfg.c / delta <= 1:
        raise ValueError("c/delta must exceed 1 so the logarithm is positive")
    return math.ceil(cfg.C * (dim + math.log(cfg.c / delta)) / eps**2)


def sample_size_relative(
    eps: float, delta: float, dim: int, nu: float, cfg: SampleSizeConfig
) -> int:
    """Sample size for the multiplicative (1+nu) guarantee with additive floor nu*eps.

    ceil(C(d ln(c/(nu eps)) + ln(c/delta)) / (nu^2 eps)).
    """
    _check_unit_interval("eps", eps, closed_top=True)
    _check_unit_interval("delta", delta, closed_top=True)
    _check_unit_interval("nu", nu, closed_top=True)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if cfg.c / (nu * eps) <= 1 or cfg.c / delta <= 1:
        raise ValueError("logarithm arguments must exceed 1")
    value = cfg.C * (dim * math.log(cfg.c / (nu * eps)) + math.log(cfg.c / delta))
    return math.ceil(value / (nu**2 * eps))


def version_space_slack(best_err: float, eps: float, nu: float) -> float:
    """Error slack admitted around the empirical minimum: (2nu+nu^2) * max(best_err, eps)."""
    return (2 * nu + nu**2) * max(best_err, eps)


def version_space_member(
    sample: Pool, eps: float, nu: float, hyp: Hypothesis, best_err: float
) -> bool:
    """Whether ``hyp`` sits within the relative-slack version space of ``sample``.

    ``best_err`` is the best in-class error on ``sample``, supplied by the
    caller's class-specific ERM.
    """
    return error_rate(sample, hyp) <= best_err + version_space_slack(best_err, eps, nu)


def descending_order(values: np.ndarray) -> np.ndarray:
    """Indices sorting ``values`` descending, ties broken by original index (stable)."""
    return np.argsort(-np.asarray(values), kind="stable")


def ascending_order(values: np.ndarray) -> np.ndarray:
    return np.argsort(np.asarray(values), kind="stable")
