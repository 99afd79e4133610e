"""Breakpoint ordering of supply costs and the price intervals between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IntervalSet:
    breakpoints: tuple[float, ...]
    order: tuple[tuple[int, int], ...]
    intervals: tuple[tuple[int, float, float], ...]

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def locate(self, p: float) -> list[int]:
        """Indices of every interval containing ``p`` (two at a shared breakpoint)."""
        return [K for K, lo, hi in self.intervals if lo <= p <= hi]


def sort_pairs(C) -> list[tuple[int, int]]:
    """Ascending cost; ties go to the larger row index, then the larger column index."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    m, n = C.shape
    pairs = [(i, j) for i in range(m) for j in range(n)]
    return sorted(pairs, key=lambda ij: (C[ij], -ij[0], -ij[1]))


def build_intervals(C, p_max: float) -> IntervalSet:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    order = sort_pairs(C)
    points = [0.0] + [float(C[ij]) for ij in order] + [float(p_max)]
    intervals = tuple((K, points[K], points[K + 1]) for K in range(len(points) - 1))
    return IntervalSet(breakpoints=tuple(points), order=tuple(order), intervals=intervals)
