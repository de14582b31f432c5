"""Greedy query planning for finite hypothesis classes under outcome-dependent costs.

The cost of querying a point is only known once the label comes back (auditing
charges 1 for a negative, 0 for a positive).  The planner repeatedly picks the
query whose worst-case hypothesis-elimination rate per unit cost is largest;
its total cost is within a (ln(|H|-1)+1) factor of the exact minimax optimum,
which :func:`opt_cost_bruteforce` computes for small instances.

Version spaces are bitmasks over table rows, so set algebra is integer
arithmetic throughout.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np


class ModelMisspecificationError(RuntimeError):
    """An answer was inconsistent with every hypothesis in the table."""


class FiniteClassTable:
    """Explicit hypothesis-by-point label matrix.

    Rows are hypotheses, columns are pool points; duplicate rows are not
    allowed (use :meth:`from_matrix` to deduplicate an arbitrary restriction).
    Binary labels are the common case, but any small label alphabet works.
    """

    def __init__(
        self,
        labels: np.ndarray,
        hypothesis_ids: Sequence[str] | None = None,
        point_ids: Sequence[str] | None = None,
    ) -> None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 2 or labels.shape[0] < 1 or labels.shape[1] < 1:
            raise ValueError("table needs at least one row and one column")
        rows = [tuple(r) for r in labels]
        if len(set(rows)) != len(rows):
            raise ValueError("duplicate hypothesis rows; deduplicate via from_matrix")
        self.labels = labels
        self.hypothesis_ids = (
            list(hypothesis_ids) if hypothesis_ids is not None
            else [f"h{i}" for i in range(labels.shape[0])]
        )
        self.point_ids = (
            list(point_ids) if point_ids is not None
            else [f"x{j}" for j in range(labels.shape[1])]
        )
        if len(self.hypothesis_ids) != labels.shape[0]:
            raise ValueError("hypothesis id count mismatch")
        if len(self.point_ids) != labels.shape[1]:
            raise ValueError("point id count mismatch")
        self.alphabet = tuple(sorted(set(int(v) for v in labels.ravel())))
        # per point: label -> bitmask of rows predicting it
        self.masks: list[dict[int, int]] = []
        for j in range(labels.shape[1]):
            col: dict[int, int] = {}
            for r in range(labels.shape[0]):
                col[int(labels[r, j])] = col.get(int(labels[r, j]), 0) | (1 << r)
            self.masks.append(col)

    @classmethod
    def from_matrix(
        cls,
        labels: np.ndarray,
        hypothesis_ids: Sequence[str] | None = None,
        point_ids: Sequence[str] | None = None,
    ) -> "FiniteClassTable":
        """Build a table from a possibly-redundant restriction, keeping first occurrences."""
        labels = np.asarray(labels, dtype=np.int64)
        seen: dict[tuple, int] = {}
        keep = []
        for r in range(labels.shape[0]):
            key = tuple(labels[r])
            if key not in seen:
                seen[key] = r
                keep.append(r)
        ids = None
        if hypothesis_ids is not None:
            ids = [hypothesis_ids[r] for r in keep]
        return cls(labels[keep], ids, point_ids)

    @property
    def n_hypotheses(self) -> int:
        return self.labels.shape[0]

    @property
    def n_points(self) -> int:
        return self.labels.shape[1]

    @property
    def full_mask(self) -> int:
        return (1 << self.n_hypotheses) - 1

    def is_binary(self) -> bool:
        return set(self.alphabet) <= {-1, 1}


@dataclass(frozen=True)
class CostSpec:
    """Outcome-determined query costs: the price depends on the revealed label only.

    ``audit`` charges 1 for a negative and 0 for a positive; ``unit`` charges
    1 regardless; ``outcome-matrix`` reads a per-(point, label) table.
    """

    kind: str
    matrix: tuple[tuple[tuple[int, float], ...], ...] | None = None

    @classmethod
    def audit(cls) -> "CostSpec":
        return cls(kind="audit")

    @classmethod
    def unit(cls) -> "CostSpec":
        return cls(kind="unit")

    @classmethod
    def from_matrix(cls, costs: Sequence[dict[int, float]]) -> "CostSpec":
        frozen = []
        for row in costs:
            for value in row.values():
                if value < 0:
                    raise ValueError("costs must be non-negative")
            frozen.append(tuple(sorted(row.items())))
        return cls(kind="outcome-matrix", matrix=tuple(frozen))

    def of(self, point: int, label: int) -> float:
        if self.kind == "audit":
            return 1.0 if label == -1 else 0.0
        if self.kind == "unit":
            return 1.0
        assert self.matrix is not None
        for y, value in self.matrix[point]:
            if y == label:
                return value
        raise KeyError(f"no cost for point {point}, label {label}")

    def lookup(self, table: FiniteClassTable) -> list[dict[int, float]]:
        """Dense per-point cost dictionaries for the table's alphabet."""
        return [
            {y: self.of(j, y) for y in table.alphabet}
            for j in range(table.n_points)
        ]


@dataclass
class QueryTranscript:
    """Sequence of (point, revealed label, incurred cost) with version-space sizes."""

    entries: list[tuple[int, int, float]] = field(default_factory=list)
    version_sizes: list[int] = field(default_factory=list)

    @property
    def total_cost(self) -> float:
        return sum(c for _, _, c in self.entries)

    @property
    def negative_count(self) -> int:
        return sum(1 for _, y, _ in self.entries if y == -1)


def version_space(table: FiniteClassTable, answered: Sequence[tuple[int, int]]) -> int:
    """Bitmask of rows consistent with every (point, label) answer.

    Inconsistent answers yield the empty mask (0).  Labels outside the table
    alphabet are a caller error.
    """
    v = table.full_mask
    for point, label in answered:
        if label not in table.alphabet:
            raise ValueError(f"label {label} outside table alphabet {table.alphabet}")
        v &= table.masks[point].get(label, 0)
    return v


def greedy_select(table: FiniteClassTable, v: int, cost: CostSpec) -> int | None:
    """Point whose worst-case eliminated-per-cost ratio is largest; ties to smallest id.

    Zero-cost outcomes score infinite when they eliminate anything and zero
    otherwise.  Returns ``None`` when every point is already decided by ``v``.
    """
    size = v.bit_count()
    if size < 2:
        raise ValueError("version space must contain at least 2 hypotheses")
    lookup = cost.lookup(table)
    best_j: int | None = None
    best_score = -1.0
    for j in range(table.n_points):
        outcomes = []
        for y, mask in table.masks[j].items():
            sub = v & mask
            if sub:
                outcomes.append((y, size - sub.bit_count()))
        if len(outcomes) < 2:
            continue  # all of v agrees here
        score = math.inf
        for y, removed in outcomes:
            c = lookup[j][y]
            if c == 0.0:
                ratio = math.inf if removed > 0 else 0.0
            else:
                ratio = removed / c
            score = min(score, ratio)
        if score > best_score:
            best_score = score
            best_j = j
    return best_j


@dataclass
class GreedyIdentifyResult:
    hypothesis_index: int
    hypothesis_id: str
    transcript: QueryTranscript


def greedy_identify(
    table: FiniteClassTable,
    cost: CostSpec,
    true_row: int | None = None,
    answer: Callable[[int], int] | None = None,
) -> GreedyIdentifyResult:
    """Identify the true hypothesis by greedy querying; cost <= (ln(|H|-1)+1) * OPT.

    Answers come from ``true_row`` (a row index) or an ``answer`` callable.
    Raises :class:`ModelMisspecificationError` when an answer refutes every
    remaining hypothesis.
    """
    if (true_row is None) == (answer is None):
        raise ValueError("provide exactly one of true_row or answer")
    if answer is None:
        row = table.labels[true_row]
        answer = lambda j: int(row[j])  # noqa: E731
    v = table.full_mask
    transcript = QueryTranscript(version_sizes=[v.bit_count()])
    while v.bit_count() > 1:
        j = greedy_select(table, v, cost)
        if j is None:
            break
        y = answer(j)
        if y not in table.alphabet:
            raise ValueError(f"answer {y} outside table alphabet {table.alphabet}")
        new_v = v & table.masks[j].get(y, 0)
        if new_v == 0:
            raise ModelMisspecificationError(
                f"answer {y} at point {table.point_ids[j]} refutes every hypothesis"
            )
        assert new_v.bit_count() < v.bit_count()
        transcript.entries.append((j, y, cost.of(j, y)))
        transcript.version_sizes.append(new_v.bit_count())
        v = new_v
    index = (v & -v).bit_length() - 1
    return GreedyIdentifyResult(
        hypothesis_index=index,
        hypothesis_id=table.hypothesis_ids[index],
        transcript=transcript,
    )


def opt_cost_bruteforce(
    table: FiniteClassTable,
    cost: CostSpec,
    *,
    max_hypotheses: int = 16,
    max_points: int = 12,
) -> float:
    """Exact minimax query cost to pin down any consistent labeling.

    游戏-tree recursion memoized on the version-space bitmask:
    OPT(V) = 0 when |V| = 1, else min over undecided points of the worst
    consistent outcome's cost plus the resulting OPT.  Only outcome-determined
    costs (every :class:`CostSpec`) are supported; sizes are guarded because
    the state space grows quickly.
    """
    if not isinstance(cost, CostSpec):
        raise TypeError("opt_cost_bruteforce requires an outcome-determined CostSpec")
    if table.n_hypotheses > max_hypotheses or table.n_points > max_points:
        raise ValueError(
            f"instance too large for brute force "
            f"({table.n_hypotheses} hypotheses, {table.n_points} points)"
        )
    lookup = cost.lookup(table)
    masks = table.masks
    n_points = table.n_points
    memo: dict[int, float] = {}

    def rec(v: int) -> float:
        if v.bit_count() == 1:
            return 0.0
        cached = memo.get(v)
        if cached is not None:
            return cached
        best = math.inf
        for j in range(n_points):
            worst = 0.0
            outcomes = 0
            for y, mask in masks[j].items():
                sub = v & mask
                if not sub or sub == v:
                    if sub == v:
                        outcomes = 1
                        break
                    continue
                outcomes += 1
                worst = max(worst, lookup[j][y] + rec(sub))
            if outcomes >= 2:
                best = min(best, worst)
        assert best < math.inf, "deduplicated table must have a splitting point"
        memo[v] = best
        return best

    return rec(table.full_mask)


class Dominance(Enum):
    """Safe-query order between two points (binary labels).

    ``PREFER_FIRST``: every hypothesis labeling the second point negative also
    labels the first negative, so the first point is the safer early query.
    """

    EQUAL = "equal"
    PREFER_FIRST = "prefer-first"
    PREFER_SECOND = "prefer-second"
    INCOMPARABLE = "incomparable"


def dominance(table: FiniteClassTable, x: int, x_prime: int) -> Dominance:
    """Compare the negative-supporting hypothesis sets of two points."""
    if not table.is_binary():
        raise ValueError("dominance is defined for binary label alphabets")
    neg_x = table.masks[x].get(-1, 0)
    neg_xp = table.masks[x_prime].get(-1, 0)
    if neg_x == neg_xp:
        return Dominance.EQUAL
    if neg_xp & neg_x == neg_x:  # neg(x) subset of neg(x')
        return Dominance.PREFER_FIRST
    if neg_x & neg_xp == neg_xp:
        return Dominance.PREFER_SECOND
    return Dominance.INCOMPARABLE


def load_table_csv(path: str) -> FiniteClassTable:
    """Read a hypothesis table: header ``h,<point ids...>``, one row per hypothesis."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        point_ids = header[1:]
        ids, rows = [], []
        for row in reader:
            if not row:
                continue
            ids.append(row[0])
            rows.append([int(v) for v in row[1:]])
    return FiniteClassTable.from_matrix(np.array(rows), ids, point_ids)


def load_cost_csv(path: str) -> CostSpec:
    """Read an outcome cost matrix: header ``x,<labels...>``, one row per point."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        labels = [int(v) for v in header[1:]]
        rows = []
        for row in reader:
            if not row:
                continue
            rows.append({y: float(v) for y, v in zip(labels, row[1:])})
    return CostSpec.from_matrix(rows)
