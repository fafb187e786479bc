"""Derivatives along partitions, Taylor partial sums, and coefficient extraction."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from .. import simplex
from ..algebra import alpha, enum_multisets
from ..errors import DomainError, EstimationError, StructuralError
from ..kleisli import Morphism
from .differences import diff
from .partitions import uniform_phi
from .spaces import (MP, BlackBoxFn, Point, add, as_point, fmt_scalar, is_exact, scale, sub)

log = logging.getLogger(__name__)

DEFAULT_SCHEDULE = tuple(2 ** j for j in range(13))
DEFAULT_TOL = 1e-8
DEFAULT_JMAX = 20
FLOAT_SLACK = 1e-30


def _max_abs(x: Point):
    return max((abs(a) for a in x), default=0)


def _richardson(values: List[Point]) -> Point:
    """Extrapolate ``Phi(m) = D + c1/m + c2/m^2 + ...`` along doubling ``m``."""
    table = [list(values)]
    for level in range(1, len(values)):
        prev = table[-1]
        w = 2 ** level
        table.append([tuple((w * a - b) / (w - 1) for a, b in zip(prev[j], prev[j - 1]))
                      for j in range(1, len(prev))])
    return table[-1][-1]


@dataclass
class DerivativeTrace:
    schedule: List[int]
    phi: List[Point]
    estimate: Point
    richardson: bool = False

    def to_json(self):
        def enc(p):
            return fmt_scalar(p[0]) if len(p) == 1 else [fmt_scalar(a) for a in p]
        return {"schedule": list(self.schedule), "phi": [enc(p) for p in self.phi],
                "estimate": enc(self.estimate), "richardson": self.richardson}


def _check_local(f: BlackBoxFn, x: Point, us: Sequence[Point]):
    if f.dom.local_norm(x, us) > 1:
        raise DomainError("x + sum(directions) leaves the unit ball")


def derivative(f: BlackBoxFn, n: int, x: Point, us: Sequence[Point],
               schedule: Sequence[int] = DEFAULT_SCHEDULE, richardson: bool = False) -> DerivativeTrace:
    """``D^n f(x | us)`` approximated by ``Phi`` on uniform splits.

    The trace must be nonincreasing for a pre-stable ``f``; an increase
    raises :class:`EstimationError`.
    """
    if len(us) != n:
        raise ValueError(f"expected {n} directions, got {len(us)}")
    schedule = list(schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    _check_local(f, x, us)
    phis = [uniform_phi(f, x, us, m) for m in schedule]
    for prev, cur in zip(phis, phis[1:]):
        slack = 0 if all(is_exact(a) for a in cur) else FLOAT_SLACK * max(1, _max_abs(prev))
        if any(c > p + slack for c, p in zip(cur, prev)):
            raise EstimationError("Phi increased along the refinement schedule", phis)
    estimate = phis[-1]
    if richardson:
        if any(b != 2 * a for a, b in zip(schedule, schedule[1:])):
            raise ValueError("Richardson extrapolation needs a doubling schedule")
        estimate = _richardson(phis)
    return DerivativeTrace(schedule, phis, estimate, richardson)


def _vandermonde_coeffs(ts: Sequence, values: Sequence[Point]) -> List[Point]:
    """Exact polynomial coefficients (per coordinate) through ``(t_i, values_i)``."""
    rows = [[t ** j for j in range(len(ts))] for t in ts]
    dim = len(values[0])
    cols = []
    for c in range(dim):
        sol = simplex.solve_square(rows, [v[c] for v in values])
        if sol is None:
            raise StructuralError("interpolation nodes are not distinct")
        cols.append(sol)
    return [tuple(cols[c][j] for c in range(dim)) for j in range(len(ts))]


def derivative_at_zero(g: BlackBoxFn, directions: Sequence[Point], mode: str = "scaling-limit",
                       tol: float = DEFAULT_TOL, j_max: int = DEFAULT_JMAX,
                       base: Optional[Point] = None, trace: Optional[list] = None) -> Point:
    """``D^k g(base | directions)``, by default at ``base = 0``.

    Directions that overshoot the local ball are handled by homogeneity:
    evaluations only use ``t * directions`` with ``t`` small enough.
    """
    k = len(directions)
    exact_in = g.exact
    base = g.dom.zero(exact=True) if base is None else base
    ln = g.dom.local_norm(base, directions)
    if k == 0:
        return g(base)
    if mode == "exact-poly":
        if g.degree is None or not g.exact:
            raise StructuralError("exact-poly mode needs an exact function with a known degree")
        deg = g.degree
        if deg < k:
            return tuple(Fraction(0) for _ in range(g.cod.dim))
        top = max(Fraction(1), Fraction(ln))
        ts = [Fraction(i, deg + 1) / top for i in range(1, deg + 2)]
        values = [diff(g, k, base, [scale(t, u) for u in directions], check=False).signed for t in ts]
        return _vandermonde_coeffs(ts, values)[k]
    if mode != "scaling-limit":
        raise ValueError(f"unknown mode {mode!r}")
    j0 = 0
    while ln * Fraction(1, 2 ** j0) > 1:
        j0 += 1
    if not exact_in:
        base = as_point(base, False)
        directions = [as_point(u, False) for u in directions]
    trace = [] if trace is None else trace
    prev = None
    for j in range(j0, j0 + j_max + 1):
        t = Fraction(1, 2 ** j) if exact_in else MP.mpf(2) ** (-j)
        d = diff(g, k, base, [scale(t, u) for u in directions], check=False).signed
        est = tuple(v / t ** k for v in d)
        trace.append(est)
        if prev is not None and _max_abs(sub(est, prev)) < tol:
            return est
        prev = est
    raise EstimationError(f"scaling limit did not settle to {tol} within {j_max} halvings",
                          [[fmt_scalar(a) for a in p] for p in trace])


def taylor_partial(f: BlackBoxFn, N: int, x: Point, base: Optional[Point] = None, mode: str = "auto",
                   schedule: Sequence[int] = DEFAULT_SCHEDULE, richardson: bool = False) -> Point:
    """``f(b) + sum_{k=1..N} D^k f(b | x,...,x) / k!`` with ``b = base`` (default 0).

    ``exact-poly`` reads the coefficients of ``t |-> f(b + t x)`` off an exact
    interpolation. ``partition`` estimates ``D^k f(b | x/k, ..., x/k)`` along
    the split schedule and rescales by ``k^k`` (directions ``x`` themselves
    would leave the ball for large ``k``).
    """
    exact_f = f.exact and f.degree is not None
    if mode == "auto":
        mode = "exact-poly" if exact_f else "partition"
    b = f.dom.zero(exact=f.exact) if base is None else tuple(base)
    if f.dom.norm(add(b, x)) >= 1 and any(a for a in x):
        raise DomainError("base + x must lie strictly inside the unit ball")
    if mode == "exact-poly":
        if not exact_f:
            raise StructuralError("exact-poly mode needs an exact function with a known degree")
        deg = f.degree
        ts = [Fraction(i, max(deg, 1)) for i in range(deg + 1)]
        coeffs = _vandermonde_coeffs(ts, [f(add(b, scale(t, x))) for t in ts])
        total = coeffs[0]
        for k in range(1, min(N, deg) + 1):
            total = add(total, coeffs[k])
        return total
    if mode != "partition":
        raise ValueError(f"unknown mode {mode!r}")
    if not f.exact:
        b, x = as_point(b, False), as_point(x, False)
    total = f(b)
    for k in range(1, N + 1):
        step = tuple(a / k for a in x)
        est = derivative(f, k, b, [step] * k, schedule, richardson).estimate
        total = add(total, tuple(Fraction(k ** k, math.factorial(k)) * v for v in est))
    return total


def remainder(f: BlackBoxFn, N: int, d: Point, base: Optional[Point] = None, **kw) -> Point:
    """``R_N(b | d) = f(b + d) - T_N f(b | d)``."""
    b = f.dom.zero(exact=f.exact) if base is None else tuple(base)
    fx = f(add(b, d))
    return sub(fx, taylor_partial(f, N, d, base=b, **kw))


@dataclass
class BernsteinReport:
    remainders: List[Point]
    tol: float
    nonnegative: bool
    nonincreasing: bool

    @property
    def final(self):
        return _max_abs(self.remainders[-1])

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.nonincreasing and self.final < self.tol

    def to_json(self):
        return {"remainders": [[fmt_scalar(a) for a in r] for r in self.remainders],
                "nonnegative": self.nonnegative, "nonincreasing": self.nonincreasing,
                "final": fmt_scalar(self.final), "tol": self.tol, "passed": self.passed}


def bernstein_check(f: BlackBoxFn, x: Point, N_max: int, tol: float = DEFAULT_TOL, **kw) -> BernsteinReport:
    """Remainders ``f(x) - T_N f(0 | x)`` for ``N = 0..N_max``."""
    rems = [remainder(f, N, x, **kw) for N in range(N_max + 1)]
    nonneg = all(a >= -tol for r in rems for a in r)
    noninc = all(c <= p + tol for r0, r1 in zip(rems, rems[1:]) for p, c in zip(r0, r1))
    return BernsteinReport(rems, tol, nonneg, noninc)


def _to_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(MP.nstr(v, 40, min_fixed=-50, max_fixed=50))


def extract_coefficients(g: BlackBoxFn, D: int, mode: str = "exact-poly", tol: float = DEFAULT_TOL,
                         j_max: int = DEFAULT_JMAX) -> Morphism:
    """Power-series coefficients of ``g`` up to degree ``D``.

    ``f[mu, b] = alpha_mu / k! * D^k g(0 | e_a1, ..., e_ak)_b`` where the
    derivative is taken along ``e_a / (k ||e_a||)`` and rescaled by
    homogeneity. Float estimates below ``tol`` in absolute value become 0.
    Without a generating series the result is only heuristic (uniform splits
    need not attain the infimum), which is logged as a warning.
    """
    dom, cod = g.dom, g.cod
    if dom.desc is None or cod.desc is None:
        raise StructuralError("extraction needs PCS cones on both sides")
    if not g.series_backed:
        log.warning("%s has no generating series; extracted coefficients are heuristic", g.name)
    web = list(dom.desc.web)
    norms = {a: dom.norm(dom.basis(i)) for i, a in enumerate(web)}
    coeffs = {}
    for mu in enum_multisets(dom.desc.web, D):
        k = mu.degree
        elems = mu.elements()
        dirs = [dom.basis(web.index(a), 1 / (k * norms[a])) for a in elems]
        try:
            val = derivative_at_zero(g, dirs, mode=mode, tol=tol, j_max=j_max)
        except EstimationError as e:
            raise EstimationError(f"coefficient at {mu}: {e}", e.trace) from e
        rescale = Fraction(1)
        for a in elems:
            rescale *= k * norms[a]
        factor = alpha(mu) * rescale / math.factorial(k)
        for b, v in zip(cod.desc.web, val):
            c = factor * v
            if not isinstance(c, Fraction):
                if abs(c) < tol:
                    continue
                if c < 0:
                    raise EstimationError(f"negative coefficient {fmt_scalar(c)} at ({mu}, {b})")
                c = _to_fraction(c)
            if c:
                coeffs[(mu, b)] = c
    return Morphism(dom.desc, cod.desc, D, coeffs)
