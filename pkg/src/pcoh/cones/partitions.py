"""Partitions of cone points, refinement, and common refinements."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..errors import StructuralError
from .differences import diff
from .spaces import FLOAT_EPS, BlackBoxFn, ConeSpace, Point, add, is_exact, sub, vsum


def _close(x: Point, y: Point, eps=0) -> bool:
    return all(abs(a - b) <= eps for a, b in zip(x, y))


def _is_zero(x: Point, eps=0) -> bool:
    return all(abs(a) <= eps for a in x)


def _eps(points) -> float:
    return 0 if all(is_exact(a) for p in points for a in p) else FLOAT_EPS


@dataclass(frozen=True)
class Partition:
    """Multiset of cone points summing to ``target``."""

    parts: Tuple[Point, ...]
    target: Point

    def __post_init__(self):
        if not self.parts:
            raise StructuralError("a partition needs at least one part")
        dim = len(self.target)
        if any(len(p) != dim for p in self.parts):
            raise StructuralError("partition parts have mismatched dimensions")
        if any(a < 0 for p in self.parts for a in p):
            raise StructuralError("partition parts must be nonnegative")
        eps = _eps(self.parts + (self.target,))
        if not _close(vsum(self.parts, dim), self.target, eps * max(1, len(self.parts))):
            raise StructuralError("parts do not sum to the target")

    @classmethod
    def of(cls, parts: Sequence[Point]) -> "Partition":
        parts = tuple(tuple(p) for p in parts)
        return cls(parts, vsum(parts, len(parts[0])))

    @classmethod
    def uniform(cls, u: Point, m: int) -> "Partition":
        part = tuple(a / m for a in u)
        return cls((part,) * m, u)

    def same_multiset(self, other: "Partition") -> bool:
        return sorted(self.parts) == sorted(other.parts)


def common_refinement(p1: Partition, p2: Partition, space: Optional[ConeSpace] = None) -> Partition:
    """A partition refining both ``p1`` and ``p2`` (same target required).

    Take the first part of the first worklist that is not orthogonal to some
    part of the second, emit their meet and subtract it from both. Every step
    zeroes at least one positive coordinate of one of the two parts, so the
    loop ends; when all remaining pairs are orthogonal both worklists are 0.
    """
    eps = _eps(p1.parts + p2.parts)
    if not _close(p1.target, p2.target, eps * (len(p1.parts) + len(p2.parts))):
        raise StructuralError("partitions of different points have no common refinement")
    meet = ConeSpace.meet
    left = [list(p) for p in p1.parts]
    right = [list(p) for p in p2.parts]
    out: List[Point] = []
    while True:
        pair = next(((i, j) for i, a in enumerate(left) for j, b in enumerate(right)
                     if not _is_zero(meet(a, b), eps)), None)
        if pair is None:
            break
        i, j = pair
        m = meet(left[i], right[j])
        out.append(tuple(m))
        left[i] = list(sub(left[i], m))
        right[j] = list(sub(right[j], m))
        if eps:
            left[i] = [a if a > eps else a * 0 for a in left[i]]
            right[j] = [b if b > eps else b * 0 for b in right[j]]
    for rest in left + right:
        if not _is_zero(rest, eps * len(out) or eps):
            raise StructuralError("common refinement left mass behind (not a lattice cone?)")
    return Partition(tuple(out), p1.target)


def find_grouping(fine: Partition, coarse: Partition) -> Optional[List[int]]:
    """Exhaustive search for an assignment of fine parts to coarse parts such
    that each coarse part is the sum of the fine parts assigned to it.

    Returns ``assignment[i] = index of the coarse part receiving fine part i``.
    """
    eps = _eps(fine.parts + coarse.parts)
    order = sorted(range(len(fine.parts)), key=lambda i: -sum(fine.parts[i]))
    remaining = [list(c) for c in coarse.parts]
    assign = [0] * len(fine.parts)

    def search(k: int) -> bool:
        if k == len(order):
            return all(_is_zero(r, eps * len(fine.parts)) for r in remaining)
        part = fine.parts[order[k]]
        tried = set()
        for j, r in enumerate(remaining):
            key = tuple(r)
            if key in tried:
                continue
            tried.add(key)
            if all(b >= a - eps for a, b in zip(part, r)):
                remaining[j] = list(sub(r, part))
                assign[order[k]] = j
                if search(k + 1):
                    return True
                remaining[j] = r
        return False

    return assign if search(0) else None


def is_refinement(fine: Partition, coarse: Partition) -> bool:
    return find_grouping(fine, coarse) is not None


def phi(f: BlackBoxFn, x: Point, partitions: Sequence[Partition]):
    """``sum over y_1 in pi_1, ..., y_n in pi_n`` of ``Delta_n f(x | y_1..y_n)``."""
    n = len(partitions)
    total = None
    for ys in itertools.product(*(p.parts for p in partitions)):
        d = diff(f, n, x, list(ys), check=False).signed
        total = d if total is None else add(total, d)
    return total


def uniform_phi(f: BlackBoxFn, x: Point, us: Sequence[Point], m: int):
    """``phi`` on the uniform ``m``-splits of every direction: ``m^n Delta_n f(x | us/m)``."""
    n = len(us)
    d = diff(f, n, x, [tuple(a / m for a in u) for u in us], check=False).signed
    return tuple(m ** n * v for v in d)
