"""Power-series denotations of PCF terms.

A term in context ``x_0:A_0, ..., x_{k-1}:A_{k-1}`` denotes a Kleisli
morphism from the product of the ``[[A_i]]`` to ``[[A]]``; multisets range over
the tagged web ``Tag(i, a)``. Types are read with ``N -> Nat(W)`` and
``A -> B -> [[A]] =>_D [[B]]``. Every truncation (web cutoff ``W``, degree ``D``,
``K`` Kleene steps) only drops nonnegative terms.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .. import pcs
from ..algebra import EMPTY, ArrowElem, Multiset, SparseVec, Tag
from ..errors import CapabilityError, PcfTypeError, StructuralError
from ..kleisli import Morphism
from ..pcs import PcsDescriptor
from .syntax import (N, App, Arrow, Choice, Fix, Ifz, Lam, Let, Num, Pred, Succ, Term, Type, Var)
from .typecheck import typecheck

Poly = Dict[Multiset, Fraction]
# output element -> polynomial over the context web
Den = Dict[object, Poly]

MAX_VAR_WEB = 200_000
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class DenParams:
    W: int = 8
    D: int = 4
    K: int = 32

    def __post_init__(self):
        if self.W < 1 or self.D < 0 or self.K < 0:
            raise StructuralError(f"invalid budgets {self}")


def interpret_type(ty: Type, params: DenParams) -> PcsDescriptor:
    if isinstance(ty, Arrow):
        return pcs.arrow(interpret_type(ty.dom, params), interpret_type(ty.cod, params), params.D)
    return pcs.nat(params.W)


class _Denoter:
    def __init__(self, params: DenParams):
        self.p = params
        self.truncated = False

    # -- polynomial arithmetic ---------------------------------------------

    def mul(self, a: Poly, b: Poly) -> Poly:
        out: Poly = {}
        D = self.p.D
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                if m1.degree + m2.degree > D:
                    self.truncated = True
                    continue
                m = m1 + m2
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return out

    @staticmethod
    def add_into(acc: Poly, p: Poly, scale=Fraction(1)):
        for m, c in p.items():
            acc[m] = acc.get(m, Fraction(0)) + scale * c

    @staticmethod
    def total(den: Den) -> Poly:
        acc: Poly = {}
        for p in den.values():
            _Denoter.add_into(acc, p)
        return acc

    # -- clauses -----------------------------------------------------------

    def run(self, ctx: List[Tuple[str, Type]], t: Term) -> Den:
        if isinstance(t, Num):
            return {t.n: {EMPTY: Fraction(1)}} if t.n < self.p.W else {}
        if isinstance(t, Var):
            return self.var(ctx, t.name)
        if isinstance(t, Choice):
            out: Den = {}
            for side in (t.left, t.right):
                for b, p in self.run(ctx, side).items():
                    self.add_into(out.setdefault(b, {}), p, HALF)
            return out
        if isinstance(t, Succ):
            return {n + 1: p for n, p in self.run(ctx, t.arg).items() if n + 1 < self.p.W}
        if isinstance(t, Pred):
            out = {}
            for n, p in self.run(ctx, t.arg).items():
                self.add_into(out.setdefault(max(n - 1, 0), {}), p)
            return out
        if isinstance(t, Ifz):
            cond = self.run(ctx, t.cond)
            zero_w = cond.get(0, {})
            pos_w: Poly = {}
            for n, p in cond.items():
                if n >= 1:
                    self.add_into(pos_w, p)
            out = {}
            for weight, branch in ((zero_w, t.zero), (pos_w, t.other)):
                if not weight:
                    continue
                for b, p in self.run(ctx, branch).items():
                    self.add_into(out.setdefault(b, {}), self.mul(weight, p))
            return out
        if isinstance(t, Let):
            return self.let(ctx, t)
        if isinstance(t, Lam):
            return self.lam(ctx, t)
        if isinstance(t, App):
            return self.app(self.run(ctx, t.fn), self.run(ctx, t.arg))
        if isinstance(t, Fix):
            body = self.run(ctx, t.body)
            h: Den = {}
            for _ in range(self.p.K):
                h = self.app(body, h)
            return h
        raise TypeError(f"not a term: {t!r}")

    def var(self, ctx, name) -> Den:
        for i in range(len(ctx) - 1, -1, -1):
            if ctx[i][0] == name:
                desc = interpret_type(ctx[i][1], self.p)
                if _web_size(desc) > MAX_VAR_WEB:
                    raise CapabilityError(f"web of {ctx[i][1]} is too large to enumerate")
                return {a: {Multiset.of(Tag(i, a)): Fraction(1)} for a in desc.web}
        raise PcfTypeError(f"unbound variable {name}", name)

    def let(self, ctx, t: Let) -> Den:
        k = len(ctx)
        bound = self.run(ctx, t.bound)
        body = self.run(ctx + [(t.var, N)], t.body)
        out: Den = {}
        for b, poly in body.items():
            acc = out.setdefault(b, {})
            for mu, c in poly.items():
                rest = Multiset._canonical(tuple((a, m) for a, m in mu.counts if a.index != k))
                xs = {a.elem for a, _ in mu.counts if a.index == k}
                if not xs:
                    weights = self.total(bound)
                elif len(xs) == 1:
                    weights = bound.get(next(iter(xs)), {})
                else:
                    continue
                self.add_into(acc, self.mul(weights, {rest: c}))
        return {b: p for b, p in out.items() if p}

    def lam(self, ctx, t: Lam) -> Den:
        k = len(ctx)
        body = self.run(ctx + [(t.var, t.ty)], t.body)
        out: Den = {}
        for c, poly in body.items():
            for mu, q in poly.items():
                outer = Multiset._canonical(tuple((a, m) for a, m in mu.counts if a.index != k))
                inner = Multiset._canonical(tuple((a.elem, m) for a, m in mu.counts if a.index == k))
                acc = out.setdefault(ArrowElem(inner, c), {})
                acc[outer] = acc.get(outer, Fraction(0)) + q
        return out

    def app(self, fn: Den, arg: Den) -> Den:
        out: Den = {}
        powers: Dict[Multiset, Optional[Poly]] = {EMPTY: {EMPTY: Fraction(1)}}

        def product_for(nu: Multiset) -> Optional[Poly]:
            if nu not in powers:
                elems = nu.elements()
                head, last = Multiset.from_elements(elems[:-1]), elems[-1]
                prev = product_for(head)
                factor = arg.get(last)
                powers[nu] = None if (prev is None or not factor) else self.mul(prev, factor)
            return powers[nu]

        for e, poly in fn.items():
            prod = product_for(e.mu)
            if not prod:
                continue
            acc = out.setdefault(e.out, {})
            self.add_into(acc, self.mul(poly, prod))
        return {b: p for b, p in out.items() if p}


def _web_size(desc: PcsDescriptor) -> int:
    from math import comb
    if desc.shape == "nat":
        return desc.cutoff
    if desc.shape == "arrow":
        n = _web_size(desc.dom)
        if n > MAX_VAR_WEB:
            return n
        return comb(n + desc.degree, desc.degree) * _web_size(desc.cod)
    return len(desc.web)


def denote(ctx: Sequence[Tuple[str, Type]], term: Term, params: DenParams = DenParams()) -> Morphism:
    """Morphism from the product of the context spaces to the type's space."""
    ctx = list(ctx)
    ty = typecheck(term, dict(ctx))
    d = _Denoter(params)
    den = d.run(ctx, term)
    dom = pcs.product(*(interpret_type(a, params) for _, a in ctx))
    cod = interpret_type(ty, params)
    coeffs = {(mu, b): q for b, poly in den.items() for mu, q in poly.items()}
    return Morphism(dom, cod, params.D, coeffs, truncated=d.truncated, check=False)


def denote_closed(term: Term, params: DenParams = DenParams()):
    """A closed program of type N gives a vector over ``Nat(W)``; a closed
    function gives its coefficient table as a morphism ``[[A]] -> [[B]]``."""
    f = denote([], term, params)
    if f.cod.shape == "nat":
        return SparseVec(f.cod.web, {b: q for (_, b), q in f.coeffs.items()})
    return Morphism(f.cod.dom, f.cod.cod, params.D,
                    {(e.mu, e.out): q for (_, e), q in f.coeffs.items()},
                    truncated=f.truncated, check=False)
