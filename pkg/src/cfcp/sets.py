"""Prediction-set algebra: closed-interval unions and label sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "IntervalSet",
    "interval_union",
    "interval_intersection",
    "jaccard_distance",
    "jaccard_distance_masks",
]


def _normalize(intervals: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    items = sorted((float(lo), float(hi)) for lo, hi in intervals)
    out: list[list[float]] = []
    for lo, hi in items:
        if lo > hi:
            raise ValueError(f"interval with lo > hi: ({lo}, {hi})")
        # closed intervals that touch share a point, so they merge
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


@dataclass(frozen=True)
class IntervalSet:
    """A finite union of disjoint closed intervals, sorted ascending.

    The constructor normalizes its input, so ``IntervalSet([(0, 1), (1, 2)])``
    is stored as the single interval ``(0, 2)``.
    """

    intervals: tuple[tuple[float, float], ...] = ()

    def __init__(self, intervals: Iterable[tuple[float, float]] = ()):
        object.__setattr__(self, "intervals", _normalize(intervals))

    @classmethod
    def single(cls, lo: float, hi: float) -> "IntervalSet":
        if lo > hi:
            return cls()
        return cls([(lo, hi)])

    def __len__(self):
        return len(self.intervals)

    def __str__(self):
        if not self.intervals:
            return "{}"
        return " U ".join(f"[{lo:.4g}, {hi:.4g}]" for lo, hi in self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __contains__(self, y) -> bool:
        return any(lo <= y <= hi for lo, hi in self.intervals)

    def __or__(self, other: "IntervalSet") -> "IntervalSet":
        return interval_union(self, other)

    def __and__(self, other: "IntervalSet") -> "IntervalSet":
        return interval_intersection(self, other)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(lo) and math.isfinite(hi) for lo, hi in self.intervals)


def interval_union(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return IntervalSet(a.intervals + b.intervals)


def interval_intersection(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out = []
    i = j = 0
    A, B = a.intervals, b.intervals
    while i < len(A) and j < len(B):
        lo = max(A[i][0], B[j][0])
        hi = min(A[i][1], B[j][1])
        if lo <= hi:
            out.append((lo, hi))
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return IntervalSet(out)


def _size(s) -> float:
    if isinstance(s, IntervalSet):
        return s.measure
    return float(len(s))


def jaccard_distance(a, b) -> float:
    """``1 - |a & b| / |a | b|`` for two label sets or two interval sets.

    Label sets are measured by cardinality, interval sets by total length.
    Two empty sets are at distance 0.
    """
    if isinstance(a, IntervalSet) != isinstance(b, IntervalSet):
        raise TypeError("jaccard_distance needs two sets of the same kind")
    if isinstance(a, IntervalSet):
        inter = interval_intersection(a, b).measure
        union = a.measure + b.measure - inter
    else:
        a, b = set(a), set(b)
        inter = len(a & b)
        union = len(a | b)
    if union == 0:
        return 0.0
    return min(max(1.0 - inter / union, 0.0), 1.0)


def jaccard_distance_masks(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Jaccard distance between boolean label masks of shape (n, K)."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    inter = (a & b).sum(axis=-1)
    union = (a | b).sum(axis=-1)
    safe = np.where(union == 0, 1, union)
    return np.where(union == 0, 0.0, 1.0 - inter / safe)
