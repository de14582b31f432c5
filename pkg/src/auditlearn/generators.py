"""Seeded synthetic distributions and adversarial pool constructions.

The noisy generators realize a distribution whose best in-class error is
exactly the flip rate: labels come from a reference hypothesis and are flipped
independently.  The circle constructions are the hard instances where every
negative label must be paid for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .greedy import FiniteClassTable
from .rectangles import DisjunctionHypothesis
from .thresholds import ThresholdHypothesis


class LabeledSampler(Protocol):
    """A distribution over labeled points; sampling threads an explicit rng."""

    dim: int

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]: ...


@dataclass(frozen=True)
class NoisyThreshold:
    """Uniform X on [0,1]; labels from a reference cut, flipped with probability eta."""

    a_star: float
    eta: float
    dim: int = 1

    def __post_init__(self) -> None:
        if not (0 <= self.a_star <= 1):
            raise ValueError("a_star must be in [0,1]")
        if not (0 <= self.eta < 0.5):
            raise ValueError("eta must be in [0, 0.5)")

    @property
    def best_error(self) -> float:
        return self.eta

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        xs = rng.random((n, 1))
        base = np.where(xs[:, 0] >= self.a_star, 1, -1)
        flips = rng.random(n) < self.eta
        return xs, np.where(flips, -base, base).astype(np.int8)

    def distribution_error(self, hyp: ThresholdHypothesis) -> float:
        """Exact error of a threshold hypothesis under this distribution."""
        cut = min(max(hyp.cut, 0.0), 1.0)
        return self.eta + (1 - 2 * self.eta) * abs(cut - self.a_star)


@dataclass(frozen=True)
class NoisyDisjunction:
    """Uniform X on [0,1]^d labeled by a reference threshold vector, flipped at rate eta."""

    a_star: tuple[float, ...]
    eta: float

    def __post_init__(self) -> None:
        if not all(0 <= a <= 1 for a in self.a_star):
            raise ValueError("a_star coordinates must be in [0,1]")
        if not (0 <= self.eta < 0.5):
            raise ValueError("eta must be in [0, 0.5)")

    @property
    def dim(self) -> int:
        return len(self.a_star)

    @property
    def best_error(self) -> float:
        return self.eta

    @property
    def positive_rate(self) -> float:
        """P(base label = +1) = 1 - prod(a_star) before flipping."""
        return 1.0 - float(np.prod(self.a_star))

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        xs = rng.random((n, self.dim))
        fired = (xs >= np.asarray(self.a_star)[None, :]).any(axis=1)
        base = np.where(fired, 1, -1)
        flips = rng.random(n) < self.eta
        return xs, np.where(flips, -base, base).astype(np.int8)

    def distribution_error(self, hyp: DisjunctionHypothesis) -> float:
        """Exact error via the inclusion box volumes (polarity +1 only)."""
        if hyp.polarity != 1:
            raise ValueError("closed form implemented for the outside-positive class")
        a = np.minimum(np.maximum(np.asarray(hyp.thresholds), 0.0), 1.0)
        b = np.asarray(self.a_star)
        # disagreement region between two union-of-halfspace sets:
        # vol(neg box of one) + vol(neg box of other) - 2 vol(common neg box)
        disagree = (
            float(np.prod(a)) + float(np.prod(b)) - 2 * float(np.prod(np.minimum(a, b)))
        )
        return self.eta + (1 - 2 * self.eta) * abs(disagree)


@dataclass
class CirclePool:
    """Distinct points on the open unit quarter-circle plus the admissible labelings
    of the outside-negative class: all-negative and each single-positive."""

    points: np.ndarray
    labelings: list[np.ndarray]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def to_table(self) -> FiniteClassTable:
        ids = ["all-negative"] + [f"only-{j}-positive" for j in range(self.size)]
        return FiniteClassTable(np.array(self.labelings), ids)


def circle_pool(m: int) -> CirclePool:
    """Equally spaced angles strictly inside (0, pi/2)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    theta = (np.arange(1, m + 1) / (m + 1)) * (math.pi / 2)
    points = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    labelings = [np.full(m, -1, dtype=np.int64)]
    for j in range(m):
        row = np.full(m, -1, dtype=np.int64)
        row[j] = 1
        labelings.append(row)
    return CirclePool(points=points, labelings=labelings)


def is_realizable_outside_negative(points: np.ndarray, labels: np.ndarray) -> bool:
    """Exact feasibility of a labeling for the outside-negative class.

    Searches the finite candidate grid of thresholds just above each
    coordinate value (plus 0 and a top sentinel), which covers every induced
    labeling on the sample.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    cands = []
    for i in range(points.shape[1]):
        vals = np.unique(points[:, i])
        cands.append(np.concatenate(([0.0], np.nextafter(vals, np.inf),
                                     [np.nextafter(vals[-1] * 2 + 1, np.inf)])))
    want_pos = labels == 1

    def ok(a: np.ndarray) -> bool:
        pos = (points < a[None, :]).all(axis=1)
        return bool(np.array_equal(pos, want_pos))

    if points.shape[1] != 2:
        raise ValueError("feasibility check implemented for 2-d points")
    for a0 in cands[0]:
        for a1 in cands[1]:
            if ok(np.array([a0, a1])):
                return True
    return False


@dataclass(frozen=True)
class CirclePairs:
    """Coordinate pairs each carrying a quarter-circle of support points.

    The marginal is uniform over all support points.  Realizable labelings of
    the outside-negative class mark at most one point per pair positive;
    ``positives`` assigns that choice (group index -> point index within the
    group, omitted groups stay all-negative).
    """

    d: int
    eps: float
    positives: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.d < 2 or self.d % 2 != 0:
            raise ValueError("d must be even and >= 2")
        per_group = 1.0 / (4.0 * self.eps)
        if abs(per_group - round(per_group)) > 1e-9:
            raise ValueError("1/(4 eps) must be an integer")
        for g, j in self.positives:
            if not (0 <= g < self.d // 2 and 0 <= j < round(per_group)):
                raise ValueError("positive choice out of range")

    @property
    def dim(self) -> int:
        return self.d

    @property
    def points_per_group(self) -> int:
        return round(1.0 / (4.0 * self.eps))

    @property
    def groups(self) -> int:
        return self.d // 2

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """All support points with their labels, one row per point."""
        k = self.points_per_group
        theta = (np.arange(1, k + 1) / (k + 1)) * (math.pi / 2)
        xs = np.zeros((self.groups * k, self.d))
        ys = np.full(self.groups * k, -1, dtype=np.int8)
        chosen = dict(self.positives)
        for g in range(self.groups):
            rows = slice(g * k, (g + 1) * k)
            xs[rows, 2 * g] = np.cos(theta)
            xs[rows, 2 * g + 1] = np.sin(theta)
            if g in chosen:
                ys[g * k + chosen[g]] = 1
        return xs, ys

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        xs, ys = self.support()
        idx = rng.integers(0, xs.shape[0], size=n)
        return xs[idx], ys[idx]


class SeededSampler:
    """A sampler bound to its own deterministic generator stream."""

    def __init__(self, dist: LabeledSampler, seed: int) -> None:
        self.dist = dist
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @property
    def dim(self) -> int:
        return self.dist.dim

    def draw(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        return self.dist.sample(n, self.rng)


def gen_noisy_threshold(a_star: float, eta: float, seed: int) -> SeededSampler:
    return SeededSampler(NoisyThreshold(a_star, eta), seed)


def gen_noisy_disjunction(a_star: tuple[float, ...], eta: float, seed: int) -> SeededSampler:
    return SeededSampler(NoisyDisjunction(tuple(a_star), eta), seed)


def gen_circle_pairs(d: int, eps: float, seed: int,
                     positives: tuple[tuple[int, int], ...] = ()) -> SeededSampler:
    return SeededSampler(CirclePairs(d, eps, positives), seed)
