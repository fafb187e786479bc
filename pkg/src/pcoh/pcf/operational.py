"""Call-by-name small-step semantics: exact exploration and seeded sampling.

Evaluation contexts are ``[] | E N | ifz(E,.,.) | succ(E) | pred(E) | let(x,E,.)``.
One unit of fuel is one reduction step on every live branch.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..algebra import fmt_rational
from ..errors import StructuralError
from .syntax import App, Choice, Fix, Ifz, Lam, Let, Num, Pred, Succ, Term, show, subst

HALF = Fraction(1, 2)


@dataclass
class SubDistribution:
    probs: Dict[int, Fraction] = field(default_factory=dict)
    residual: Fraction = Fraction(0)

    @property
    def mass(self) -> Fraction:
        """Terminated mass; ``mass + residual`` is always 1."""
        return sum(self.probs.values(), Fraction(0))

    def __getitem__(self, n: int) -> Fraction:
        return self.probs.get(n, Fraction(0))

    def vector(self, cutoff: int) -> List[Fraction]:
        return [self[n] for n in range(cutoff)]

    def to_json(self):
        return {"probs": {str(n): fmt_rational(self.probs[n]) for n in sorted(self.probs)},
                "residual": fmt_rational(self.residual)}

    @classmethod
    def from_json(cls, obj) -> "SubDistribution":
        return cls({int(k): Fraction(v) for k, v in obj["probs"].items()}, Fraction(obj["residual"]))


def step(t: Term) -> List[Tuple[Fraction, Term]]:
    """Successors of a closed non-value term; a Choice yields ``[left, right]``."""
    if isinstance(t, Choice):
        return [(HALF, t.left), (HALF, t.right)]
    if isinstance(t, Fix):
        return [(Fraction(1), App(t.body, t))]
    if isinstance(t, App):
        if isinstance(t.fn, Lam):
            return [(Fraction(1), subst(t.fn.body, t.fn.var, t.arg))]
        return [(p, App(s, t.arg)) for p, s in step(t.fn)]
    if isinstance(t, Ifz):
        if isinstance(t.cond, Num):
            return [(Fraction(1), t.zero if t.cond.n == 0 else t.other)]
        return [(p, Ifz(s, t.zero, t.other)) for p, s in step(t.cond)]
    if isinstance(t, Succ):
        if isinstance(t.arg, Num):
            return [(Fraction(1), Num(t.arg.n + 1))]
        return [(p, Succ(s)) for p, s in step(t.arg)]
    if isinstance(t, Pred):
        if isinstance(t.arg, Num):
            return [(Fraction(1), Num(max(t.arg.n - 1, 0)))]
        return [(p, Pred(s)) for p, s in step(t.arg)]
    if isinstance(t, Let):
        if isinstance(t.bound, Num):
            return [(Fraction(1), subst(t.body, t.var, t.bound))]
        return [(p, Let(t.var, s, t.body)) for p, s in step(t.bound)]
    raise StructuralError(f"stuck term `{show(t)}` (not closed or not of type N)")


def _deep(fn, *args):
    # evaluation contexts nest as deep as the step count
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        return fn(*args)
    finally:
        sys.setrecursionlimit(limit)


def eval_exact(term: Term, fuel: int) -> SubDistribution:
    """Exhaustive breadth-first exploration of the reduction tree.

    Identical residual terms are merged, so the frontier stays small on
    programs whose branches reconverge.
    """
    return _deep(_eval_exact, term, fuel)


def _eval_exact(term, fuel):
    probs: Dict[int, Fraction] = {}
    frontier: Dict[Term, Fraction] = {}
    if isinstance(term, Num):
        probs[term.n] = Fraction(1)
    else:
        frontier[term] = Fraction(1)
    for _ in range(fuel):
        if not frontier:
            break
        nxt: Dict[Term, Fraction] = {}
        for t, p in frontier.items():
            for q, s in step(t):
                if isinstance(s, Num):
                    probs[s.n] = probs.get(s.n, Fraction(0)) + p * q
                else:
                    nxt[s] = nxt.get(s, Fraction(0)) + p * q
        frontier = nxt
    return SubDistribution(probs, sum(frontier.values(), Fraction(0)))


def sample(term: Term, seed: int, fuel: int) -> Optional[int]:
    """One run; each Choice consumes ``rng.integers(0, 2)`` (0 picks the left operand).

    Returns the numeral reached, or ``None`` when fuel runs out.
    """
    return _deep(_sample, term, np.random.default_rng(seed), fuel)


def _sample(t, rng, fuel):
    for _ in range(fuel):
        if isinstance(t, Num):
            return t.n
        succ = step(t)
        t = succ[int(rng.integers(0, 2))][1] if len(succ) == 2 else succ[0][1]
    return t.n if isinstance(t, Num) else None
