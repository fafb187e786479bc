"""Higher-order differences and the pre-stability test."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import DomainError
from .spaces import BlackBoxFn, ConeSpace, Point, add, as_point, fmt_scalar, scale, sub

FLOAT_TOL = 1e-9


@dataclass
class Difference:
    plus: Point
    minus: Point

    @property
    def signed(self) -> Point:
        return sub(self.plus, self.minus)


def diff(f: BlackBoxFn, n: int, x: Point, us: Sequence[Point], check: bool = True) -> Difference:
    """``Delta^+_n`` and ``Delta^-_n`` of ``f`` at ``x`` along ``us``.

    ``I`` contributes to ``plus`` when ``n - |I|`` is even.
    """
    if len(us) != n:
        raise ValueError(f"expected {n} directions, got {len(us)}")
    if check and f.dom.local_norm(x, us) > 1:
        raise DomainError("x + sum(us) leaves the unit ball")
    plus = minus = None
    for r in range(n + 1):
        for subset in itertools.combinations(range(n), r):
            point = x
            for i in subset:
                point = add(point, us[i])
            value = f(point)
            if (n - r) % 2 == 0:
                plus = value if plus is None else add(plus, value)
            else:
                minus = value if minus is None else add(minus, value)
    if minus is None:
        minus = tuple(v * 0 for v in plus)
    return Difference(plus, minus)


@dataclass
class PrestabilityVerdict:
    passed: bool
    min_signed: Dict[int, object] = field(default_factory=dict)
    failures: Dict[int, int] = field(default_factory=dict)
    witnesses: Dict[int, dict] = field(default_factory=dict)
    exact: bool = True

    @property
    def failed_ranks(self) -> List[int]:
        return sorted(n for n, c in self.failures.items() if c)

    @property
    def witness(self) -> Optional[dict]:
        """Worst violation over all ranks."""
        if not self.witnesses:
            return None
        return min(self.witnesses.values(), key=lambda w: w["_low"])

    def to_json(self):
        return {"passed": self.passed,
                "min_signed": {str(n): fmt_scalar(v) for n, v in self.min_signed.items()},
                "failures": {str(n): c for n, c in self.failures.items()},
                "witnesses": {str(n): {k: v for k, v in w.items() if k != "_low"}
                              for n, w in sorted(self.witnesses.items())},
                "exact": self.exact}


def random_point(space: ConeSpace, rng: np.random.Generator, radius=Fraction(9, 10)) -> Point:
    """A random rational point of norm at most ``radius``."""
    raw = as_point([Fraction(int(v), 1000) for v in rng.integers(0, 1001, size=space.dim)], True)
    nrm = space.norm(raw)
    s = Fraction(int(rng.integers(0, 1001)), 1000) * radius
    return raw if nrm == 0 else scale(s / nrm, raw)


def random_directions(space: ConeSpace, x: Point, n: int, rng: np.random.Generator):
    """``n`` random rational directions scaled so that ``x + sum(us)`` stays in the ball."""
    raws = [as_point([Fraction(int(v), 1000) for v in rng.integers(0, 1001, size=space.dim)], True)
            for _ in range(n)]
    ln = space.local_norm(x, raws)
    t = Fraction(int(rng.integers(1, 1001)), 1000)
    return raws if ln == 0 else [scale(t / ln, u) for u in raws]


def is_prestable(f: BlackBoxFn, n_max: int = 3, trials: int = 200, seed: int = 0,
                 tol: float = FLOAT_TOL) -> PrestabilityVerdict:
    """Sample ``(x, us)`` and check every signed difference coordinate is ``>= 0``.

    Exact functions are checked exactly; float ones against ``-tol``.
    """
    rng = np.random.default_rng(seed)
    verdict = PrestabilityVerdict(True, exact=f.exact)
    for n in range(1, n_max + 1):
        verdict.failures[n] = 0
        for _ in range(trials):
            x = random_point(f.dom, rng)
            us = random_directions(f.dom, x, n, rng)
            if not f.exact:
                x, us = as_point(x, False), [as_point(u, False) for u in us]
            signed = diff(f, n, x, us, check=False).signed
            low = min(signed)
            if n not in verdict.min_signed or low < verdict.min_signed[n]:
                verdict.min_signed[n] = low
            bad = low < 0 if f.exact else low < -tol
            if bad:
                verdict.passed = False
                verdict.failures[n] += 1
                w = verdict.witnesses.get(n)
                if w is None or low < w["_low"]:
                    verdict.witnesses[n] = {"n": n, "x": [fmt_scalar(a) for a in x],
                                            "us": [[fmt_scalar(a) for a in u] for u in us],
                                            "signed": fmt_scalar(low), "_low": low}
    return verdict
