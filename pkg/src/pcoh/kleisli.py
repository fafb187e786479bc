"""Kleisli morphisms of Pcoh as degree-truncated power series.

A :class:`Morphism` ``X -> Y`` is a nonnegative coefficient table indexed by
``(mu, b)`` with ``mu`` a multiset over the web of ``X`` and ``b`` in the web
of ``Y``. It acts on a clique ``x`` as ``x |-> sum_mu f[mu,b] x^mu``.
Truncation only ever drops nonnegative terms, so every result is a lower
bound of the untruncated series.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import pcs
from .algebra import (EMPTY, ArrowElem, Multiset, SparseVec, Tag, decode_elem, elem_key,
                      encode_elem, fmt_rational)
from .errors import CapabilityError, DegreeOverflow, StructuralError
from .pcs import PcsDescriptor

log = logging.getLogger(__name__)

DEFAULT_DEGREE = 4

Key = Tuple[Multiset, Any]


class Morphism:
    __slots__ = ("dom", "cod", "degree", "coeffs", "truncated")

    def __init__(self, dom: PcsDescriptor, cod: PcsDescriptor, degree: int,
                 coeffs: Mapping[Key, Any], truncated: bool = False, check: bool = True):
        clean: Dict[Key, Fraction] = {}
        for (mu, b), q in coeffs.items():
            q = q if isinstance(q, Fraction) else Fraction(q)
            if not q:
                continue
            if check:
                if q < 0:
                    raise StructuralError(f"negative coefficient at ({mu}, {b})")
                if mu.degree > degree:
                    raise StructuralError(f"multiset {mu} exceeds the degree bound {degree}")
                if b not in cod.web:
                    raise StructuralError(f"{b!r} is not in the codomain web")
                for a in mu.support:
                    if a not in dom.web:
                        raise StructuralError(f"{a!r} is not in the domain web")
            clean[(mu, b)] = q
        self.dom, self.cod, self.degree = dom, cod, degree
        self.coeffs = clean
        self.truncated = truncated

    def __getitem__(self, key: Key) -> Fraction:
        return self.coeffs.get(key, Fraction(0))

    def items(self) -> List[Tuple[Key, Fraction]]:
        return sorted(self.coeffs.items(), key=lambda kv: (kv[0][0].key, elem_key(kv[0][1])))

    @property
    def max_degree(self) -> int:
        return max((mu.degree for mu, _ in self.coeffs), default=0)

    def __eq__(self, other):
        return (isinstance(other, Morphism) and self.dom == other.dom
                and self.cod == other.cod and self.coeffs == other.coeffs)

    def __repr__(self):
        body = ", ".join(f"({mu},{b}): {q}" for (mu, b), q in self.items()[:12])
        more = "" if len(self.coeffs) <= 12 else f", ... {len(self.coeffs) - 12} more"
        return f"Morphism({self.dom!r} -> {self.cod!r}, D={self.degree}, {{{body}{more}}})"

    def scale(self, c) -> "Morphism":
        c = Fraction(c)
        return Morphism(self.dom, self.cod, self.degree,
                        {k: c * q for k, q in self.coeffs.items()}, self.truncated, check=False)

    def to_json(self):
        return {"dom": self.dom.to_json(), "cod": self.cod.to_json(), "degree": self.degree,
                "coeffs": [{"mu": mu.to_json(), "b": encode_elem(b), "val": fmt_rational(q)}
                           for (mu, b), q in self.items()]}

    @classmethod
    def from_json(cls, obj) -> "Morphism":
        dom = PcsDescriptor.from_json(obj["dom"])
        cod = PcsDescriptor.from_json(obj["cod"])
        coeffs = {(Multiset.from_json(c["mu"]), decode_elem(c["b"])): Fraction(c["val"])
                  for c in obj["coeffs"]}
        return cls(dom, cod, int(obj["degree"]), coeffs)


# -- evaluation --------------------------------------------------------------

def evaluate(f: Morphism, x: Mapping | Callable, zero=Fraction(0)) -> Dict[Any, Any]:
    """``(f . x^!)_b`` for any scalar type; ``x`` maps domain elements to scalars."""
    lookup = x if callable(x) else (lambda a, _x=x: _x[a])
    out: Dict[Any, Any] = {}
    cache: Dict[Any, Any] = {}

    def get(a):
        if a not in cache:
            cache[a] = lookup(a)
        return cache[a]

    for (mu, b), q in f.coeffs.items():
        term = q
        for a, c in mu.counts:
            xa = get(a)
            if not xa:
                term = None
                break
            term = term * xa ** c
        if term is not None:
            out[b] = out.get(b, zero) + term
    return out


def apply(f: Morphism, x: SparseVec) -> SparseVec:
    """``f . x^!`` exactly, as a vector over the codomain web."""
    if x.web != f.dom.web:
        raise StructuralError(f"argument is not over the domain web of {f.dom!r}")
    return SparseVec(f.cod.web, evaluate(f, x))


# -- structural morphisms ----------------------------------------------------

def identity(X: PcsDescriptor, degree: int = 1) -> Morphism:
    if degree < 1:
        raise StructuralError("identity needs degree >= 1")
    return Morphism(X, X, degree, {(Multiset.of(a), a): 1 for a in X.web}, check=False)


def constant(X: PcsDescriptor, y: SparseVec, cod: PcsDescriptor, degree: int = 0) -> Morphism:
    return Morphism(X, cod, degree, {(EMPTY, b): q for b, q in y.items()})


def _poly_mul(p: Dict[Multiset, Fraction], q: Dict[Multiset, Fraction], degree: int, flag: List[bool]):
    out: Dict[Multiset, Fraction] = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            if m1.degree + m2.degree > degree:
                flag[0] = True
                continue
            m = m1 + m2
            out[m] = out.get(m, Fraction(0)) + c1 * c2
    return out


def compose(g: Morphism, f: Morphism, degree: Optional[int] = None) -> Morphism:
    """``g o f`` by power-series substitution, truncated at ``degree``.

    ``truncated`` is set on the result when a nonzero term was dropped.
    """
    if g.dom.web != f.cod.web:
        raise StructuralError(f"cannot compose: {g.dom!r} vs {f.cod!r}")
    if degree is None:
        degree = f.degree * g.degree
    per_output: Dict[Any, Dict[Multiset, Fraction]] = {}
    for (mu, b), q in f.coeffs.items():
        per_output.setdefault(b, {})[mu] = q
    flag = [False]
    powers: Dict[Tuple[Any, int], Dict[Multiset, Fraction]] = {}

    def power(b, k):
        key = (b, k)
        if key not in powers:
            base = per_output.get(b, {})
            powers[key] = {EMPTY: Fraction(1)} if k == 0 else _poly_mul(power(b, k - 1), base, degree, flag)
        return powers[key]

    out: Dict[Key, Fraction] = {}
    for (nu, c), gq in g.coeffs.items():
        prod = {EMPTY: Fraction(1)}
        for b, k in nu.counts:
            prod = _poly_mul(prod, power(b, k), degree, flag)
            if not prod:
                break
        for mu, v in prod.items():
            out[(mu, c)] = out.get((mu, c), Fraction(0)) + gq * v
    if flag[0]:
        log.debug("compose truncated at degree %d", degree)
    return Morphism(f.dom, g.cod, degree, out, truncated=flag[0] or f.truncated or g.truncated,
                    check=False)


def pair(fs: Sequence[Morphism]) -> Morphism:
    if not fs:
        raise StructuralError("pair needs at least one component")
    dom = fs[0].dom
    for f in fs:
        if f.dom != dom:
            raise StructuralError("pair components must share their domain")
    cod = pcs.product(*(f.cod for f in fs))
    coeffs = {(mu, Tag(i, b)): q for i, f in enumerate(fs) for (mu, b), q in f.coeffs.items()}
    return Morphism(dom, cod, max(f.degree for f in fs), coeffs,
                    truncated=any(f.truncated for f in fs), check=False)


def proj(prod: PcsDescriptor, i: int) -> Morphism:
    prod._need("product")
    Xi = prod.factors[i]
    return Morphism(prod, Xi, 1, {(Multiset.of(Tag(i, a)), a): 1 for a in Xi.web}, check=False)


def _split(mu: Multiset) -> Tuple[Multiset, Multiset]:
    left = Multiset((t.elem, c) for t, c in mu.counts if t.index == 0)
    right = Multiset((t.elem, c) for t, c in mu.counts if t.index == 1)
    return left, right


def curry(f: Morphism, degree: Optional[int] = None, truncate: bool = False) -> Morphism:
    """``X x Y -> Z`` to ``X -> (Y => Z)``; the arrow space gets degree bound ``degree``."""
    f.dom._need("product")
    if len(f.dom.factors) != 2:
        raise StructuralError("curry expects a binary product domain")
    X, Y = f.dom.factors
    if degree is None:
        degree = f.degree
    out: Dict[Key, Fraction] = {}
    dropped = False
    for (mu, c), q in f.coeffs.items():
        mx, my = _split(mu)
        if my.degree > degree:
            if not truncate:
                raise DegreeOverflow(f"curry: {my} needs arrow degree {my.degree} > {degree}")
            dropped = True
            continue
        out[(mx, ArrowElem(my, c))] = q
    return Morphism(X, pcs.arrow(Y, f.cod, degree), f.degree, out,
                    truncated=dropped or f.truncated, check=False)


def uncurry(h: Morphism) -> Morphism:
    h.cod._need("arrow")
    Y, Z = h.cod.factors
    dom = pcs.product(h.dom, Y)
    out = {}
    for (mx, e), q in h.coeffs.items():
        mu = mx.map(lambda a: Tag(0, a)) + e.mu.map(lambda a: Tag(1, a))
        out[(mu, e.out)] = q
    return Morphism(dom, Z, h.degree + h.cod.degree, out, truncated=h.truncated, check=False)


def eval_morphism(Y: PcsDescriptor, Z: PcsDescriptor, degree: int) -> Morphism:
    """``ev : (Y => Z) x Y -> Z``, linear in the function argument."""
    A = pcs.arrow(Y, Z, degree)
    dom = pcs.product(A, Y)
    coeffs = {}
    for e in A.web:
        mu = Multiset.of(Tag(0, e)) + e.mu.map(lambda a: Tag(1, a))
        coeffs[(mu, e.out)] = Fraction(1)
    return Morphism(dom, Z, 1 + degree, coeffs, check=False)


def morphism_to_point(f: Morphism, degree: Optional[int] = None) -> SparseVec:
    """Coefficient table of ``f`` as a vector of the arrow space ``dom => cod``."""
    degree = f.degree if degree is None else degree
    A = pcs.arrow(f.dom, f.cod, degree)
    entries = {}
    for (mu, b), q in f.coeffs.items():
        if mu.degree > degree:
            raise DegreeOverflow(f"{mu} exceeds arrow degree {degree}")
        entries[ArrowElem(mu, b)] = q
    return SparseVec(A.web, entries)


def point_to_morphism(A: PcsDescriptor, x: SparseVec) -> Morphism:
    A._need("arrow")
    return Morphism(A.dom, A.cod, A.degree, {(e.mu, e.out): q for e, q in x.items()}, check=False)


# -- validity ----------------------------------------------------------------

@dataclass
class MorphismVerdict:
    status: str
    checked: int
    witness: Optional[SparseVec] = None
    image: Optional[SparseVec] = None
    exact_checks: bool = True

    @property
    def passed(self) -> bool:
        return self.status == "passed-sampled"


def sample_cliques(X: PcsDescriptor, trials: int, seed: int) -> List[SparseVec]:
    """Generators, scaled basis vectors and random convex combinations of generators."""
    gens = pcs.generators(X)
    polar = pcs.PolarPolytope(X.web, tuple(gens))
    points = list(gens)
    for a in X.web:
        lam = 1 / pcs.dual_sup(SparseVec.basis(X.web, a), polar)
        points.append(SparseVec.basis(X.web, a, lam))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        w = [int(v) for v in rng.integers(0, 1000, size=len(gens))]
        total = sum(w)
        if total == 0:
            continue
        x = SparseVec.zero(X.web)
        for wi, g in zip(w, gens):
            if wi:
                x = x + g.scale(Fraction(wi, total))
        points.append(x)
    return points


def is_morphism(f: Morphism, trials: int = 64, seed: int = 0) -> MorphismVerdict:
    """Check ``f . x^!`` is a clique of the codomain on sampled cliques ``x``.

    A pass is evidence, not a proof: only finitely many cliques are tried.
    """
    if f.dom.shape == "arrow":
        raise CapabilityError("cannot sample cliques of an arrow space")
    checked = 0
    exact = True
    for x in sample_cliques(f.dom, trials, seed):
        y = apply(f, x)
        member = pcs.clique_membership(y, f.cod, trials=max(4, trials // 4), seed=seed + 1)
        exact = exact and member.exact
        checked += 1
        if not member:
            return MorphismVerdict("violated", checked, witness=x, image=y, exact_checks=exact)
    return MorphismVerdict("passed-sampled", checked, exact_checks=exact)


def sampled_norm(f: Morphism, trials: int = 64, seed: int = 0) -> Fraction:
    """``max ||f(x)||`` over sampled cliques: a lower bound of the arrow-cone norm."""
    return max(pcs.norm(apply(f, x), f.cod) for x in sample_cliques(f.dom, trials, seed))
