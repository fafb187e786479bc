"""Side-by-side comparison of operational and denotational probabilities."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence

from ..algebra import fmt_rational
from ..errors import PcfTypeError
from .denotation import DenParams, denote_closed
from .operational import SubDistribution, eval_exact
from .syntax import N, Term
from .typecheck import typecheck

DEFAULT_FUELS = (8, 16, 32, 64)
DEFAULT_PARAMS = (DenParams(8, 4, 2), DenParams(8, 4, 4), DenParams(8, 4, 8), DenParams(8, 4, 16))


@dataclass
class AdequacyRow:
    fuel: int
    params: DenParams
    operational: SubDistribution
    denotation: List[Fraction]
    gap: Fraction


@dataclass
class AdequacyReport:
    rows: List[AdequacyRow] = field(default_factory=list)
    operational_monotone: bool = True
    denotation_monotone: bool = True
    gap_shrinks: bool = True

    @property
    def final_gap(self) -> Fraction:
        return self.rows[-1].gap if self.rows else Fraction(0)

    @property
    def passed(self) -> bool:
        return self.operational_monotone and self.denotation_monotone and self.gap_shrinks

    def to_json(self):
        return {
            "rows": [{"fuel": r.fuel, "W": r.params.W, "D": r.params.D, "K": r.params.K,
                      "operational": r.operational.to_json(),
                      "denotation": [fmt_rational(q) for q in r.denotation],
                      "gap": fmt_rational(r.gap)} for r in self.rows],
            "operational_monotone": self.operational_monotone,
            "denotation_monotone": self.denotation_monotone,
            "gap_shrinks": self.gap_shrinks,
            "final_gap": fmt_rational(self.final_gap),
            "passed": self.passed,
        }


def adequacy(term: Term, fuels: Sequence[int] = DEFAULT_FUELS,
             params: Sequence[DenParams] = DEFAULT_PARAMS) -> AdequacyReport:
    """Walk the two budget schedules in lockstep.

    The gap is the largest pointwise difference on indices below ``W``.
    Monotonicity is checked between consecutive schedule points.
    """
    if len(fuels) != len(params):
        raise ValueError("fuel and parameter schedules must have equal length")
    ty = typecheck(term)
    if ty != N:
        raise PcfTypeError(f"adequacy needs a program of type N, got {ty}")
    report = AdequacyReport()
    prev = None
    for fuel, p in zip(fuels, params):
        op = eval_exact(term, fuel)
        den = denote_closed(term, p)
        vec = [den[n] for n in range(p.W)]
        gap = max((abs(op[n] - vec[n]) for n in range(p.W)), default=Fraction(0))
        row = AdequacyRow(fuel, p, op, vec, gap)
        if prev is not None:
            if any(op[n] < prev.operational[n] for n in prev.operational.probs) \
                    or op.residual > prev.operational.residual:
                report.operational_monotone = False
            if any(vec[n] < prev.denotation[n] for n in range(min(len(vec), len(prev.denotation)))):
                report.denotation_monotone = False
            if gap > prev.gap:
                report.gap_shrinks = False
        report.rows.append(row)
        prev = row
    return report
