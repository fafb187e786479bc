"""Probabilistic coherence spaces over finite webs.

A space is described by a :class:`PcsDescriptor`. Builtin shapes carry
closed-form clique tests; ``generated`` spaces are the bipolar closure of a
finite generator list, and all their questions are answered by exact LP over
the polar ``{u >= 0 | <g,u> <= 1 for every generator g}``.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from . import simplex
from .algebra import (ArrowElem, SparseVec, Tag, Web, decode_elem, encode_elem,
                      enum_multisets, fmt_rational)
from .errors import CapabilityError, InfiniteNorm, StructuralError

log = logging.getLogger(__name__)

MAX_VERTEX_DIM = 6

ONE_ATOM = "*"
TRUE, FALSE = "t", "f"


@dataclass(frozen=True)
class PcsDescriptor:
    shape: str
    cutoff: int = 0
    factors: Tuple["PcsDescriptor", ...] = ()
    degree: int = 0
    atoms: Tuple = ()
    gens: Tuple[SparseVec, ...] = ()

    @cached_property
    def web(self) -> Web:
        if self.shape == "one":
            return Web([ONE_ATOM])
        if self.shape == "bool":
            return Web([TRUE, FALSE])
        if self.shape == "nat":
            return Web(range(self.cutoff))
        if self.shape == "product":
            return Web(Tag(i, a) for i, f in enumerate(self.factors) for a in f.web)
        if self.shape == "arrow":
            dom, cod = self.factors
            return Web(ArrowElem(mu, b) for mu in enum_multisets(dom.web, self.degree) for b in cod.web)
        if self.shape == "generated":
            return Web(self.atoms)
        raise StructuralError(f"unknown PCS shape {self.shape!r}")

    @property
    def dom(self) -> "PcsDescriptor":
        self._need("arrow")
        return self.factors[0]

    @property
    def cod(self) -> "PcsDescriptor":
        self._need("arrow")
        return self.factors[1]

    def _need(self, shape):
        if self.shape != shape:
            raise StructuralError(f"expected a {shape} space, got {self.shape}")

    def __repr__(self):
        if self.shape == "nat":
            return f"Nat({self.cutoff})"
        if self.shape == "product":
            return "(" + " x ".join(map(repr, self.factors)) + ")"
        if self.shape == "arrow":
            return f"({self.factors[0]!r} =>{self.degree} {self.factors[1]!r})"
        if self.shape == "generated":
            return f"Generated({list(self.atoms)}, {len(self.gens)} gens)"
        return self.shape.capitalize()

    def to_json(self):
        if self.shape in ("one", "bool"):
            return {"shape": self.shape}
        if self.shape == "nat":
            return {"shape": "nat", "cutoff": self.cutoff}
        if self.shape == "product":
            return {"shape": "product", "factors": [f.to_json() for f in self.factors]}
        if self.shape == "arrow":
            return {"shape": "arrow", "dom": self.dom.to_json(), "cod": self.cod.to_json(),
                    "degree": self.degree}
        return {"shape": "generated", "web": self.web.to_json(),
                "generators": [[[encode_elem(a), fmt_rational(q)] for a, q in g.items()]
                               for g in self.gens]}

    @classmethod
    def from_json(cls, obj) -> "PcsDescriptor":
        shape = obj.get("shape")
        if shape == "one":
            return ONE
        if shape == "bool":
            return BOOL
        if shape == "nat":
            return nat(int(obj["cutoff"]))
        if shape == "product":
            return product(*(cls.from_json(f) for f in obj["factors"]))
        if shape == "arrow":
            return arrow(cls.from_json(obj["dom"]), cls.from_json(obj["cod"]), int(obj["degree"]))
        if shape == "generated":
            web = Web.from_json(obj["web"])
            gens = [SparseVec(web, ((decode_elem(a), Fraction(q)) for a, q in g))
                    for g in obj["generators"]]
            return generated(web, gens)
        raise StructuralError(f"unknown PCS shape {shape!r}")


ONE = PcsDescriptor("one")
BOOL = PcsDescriptor("bool")


def nat(cutoff: int) -> PcsDescriptor:
    if cutoff < 1:
        raise StructuralError("Nat cutoff must be >= 1")
    return PcsDescriptor("nat", cutoff=cutoff)


def product(*factors: PcsDescriptor) -> PcsDescriptor:
    return PcsDescriptor("product", factors=tuple(factors))


def arrow(dom: PcsDescriptor, cod: PcsDescriptor, degree: int) -> PcsDescriptor:
    if degree < 0:
        raise StructuralError("arrow degree bound must be >= 0")
    return PcsDescriptor("arrow", factors=(dom, cod), degree=degree)


def generated(web: Web | Sequence, gens: Sequence[SparseVec]) -> PcsDescriptor:
    web = web if isinstance(web, Web) else Web(web)
    for g in gens:
        if g.web != web:
            raise StructuralError("generator web differs from the declared web")
    return PcsDescriptor("generated", atoms=web.elements, gens=tuple(gens))


# -- product plumbing --------------------------------------------------------

def pack(desc: PcsDescriptor, parts: Sequence[SparseVec]) -> SparseVec:
    """Tagged concatenation of component vectors into the product web."""
    desc._need("product")
    if len(parts) != len(desc.factors):
        raise StructuralError("wrong number of product components")
    entries = {}
    for i, (f, x) in enumerate(zip(desc.factors, parts)):
        if x.web != f.web:
            raise StructuralError(f"component {i} is not over {f!r}")
        for a, q in x.items():
            entries[Tag(i, a)] = q
    return SparseVec(desc.web, entries)


def component(desc: PcsDescriptor, x: SparseVec, i: int) -> SparseVec:
    desc._need("product")
    return SparseVec(desc.factors[i].web, {t.elem: q for t, q in x.items() if t.index == i})


# -- generators and polars ---------------------------------------------------

def generators(desc: PcsDescriptor) -> List[SparseVec]:
    """A finite generator list whose bipolar is P(desc)."""
    web = desc.web
    if desc.shape in ("one", "bool", "nat"):
        return [SparseVec.basis(web, a) for a in web]
    if desc.shape == "generated":
        return list(desc.gens)
    if desc.shape == "product":
        per = [[None] + generators(f) for f in desc.factors]
        out = []
        for combo in itertools.product(*per):
            if all(g is None for g in combo):
                continue
            parts = [g if g is not None else SparseVec.zero(f.web) for g, f in zip(combo, desc.factors)]
            out.append(pack(desc, parts))
        return out
    raise CapabilityError("arrow spaces are not materialized as generator lists")


@dataclass
class VertexSet:
    vertices: List[SparseVec]
    bounded: bool

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self):
        return len(self.vertices)


@dataclass
class PolarPolytope:
    """``{u >= 0 | <g,u> <= 1 for g in constraints}``."""

    web: Web
    constraints: Tuple[SparseVec, ...]
    _vertices: Optional[VertexSet] = field(default=None, repr=False)

    @classmethod
    def of(cls, desc: PcsDescriptor) -> "PolarPolytope":
        return cls(desc.web, tuple(generators(desc)))

    def vertices(self) -> VertexSet:
        if self._vertices is None:
            self._vertices = polar_vertices(self.constraints, self.web)
        return self._vertices


def _lp_max(objective: SparseVec, constraints: Sequence[SparseVec], web: Web) -> simplex.LPResult:
    elems = web.elements
    A = [[g[a] for a in elems] for g in constraints]
    return simplex.solve([objective[a] for a in elems], A, [1] * len(A))


def dual_sup(x: SparseVec, polar: PolarPolytope) -> Fraction:
    """``sup { <x,u> | u in polar }``: the cone norm of ``x``."""
    if x.web != polar.web:
        raise StructuralError("point and polar live over different webs")
    if x.is_zero():
        return Fraction(0)
    res = _lp_max(x, polar.constraints, polar.web)
    if res.status == simplex.UNBOUNDED:
        raise InfiniteNorm(f"{x!r} has a coordinate outside every generator's support")
    return res.value


def norm_by_scaling(x: SparseVec, gens: Sequence[SparseVec]) -> Fraction:
    """``inf {1/r | r.x in downward convex hull of gens}``, solved on the primal side.

    Independent of :func:`dual_sup`; the two agree on every PCS.
    """
    if x.is_zero():
        return Fraction(0)
    web = x.web
    m = len(gens)
    # variables: lambda_1..lambda_m, r ; maximize r
    A, b = [], []
    for a in web:
        A.append([-g[a] for g in gens] + [x[a]])
        b.append(0)
    A.append([1] * m + [0])
    b.append(1)
    res = simplex.solve([0] * m + [1], A, b)
    if res.status != simplex.OPTIMAL or res.value == 0:
        raise InfiniteNorm(f"no positive multiple of {x!r} is a clique")
    return 1 / res.value


def in_bipolar(x: SparseVec, gens: Sequence[SparseVec]) -> bool:
    try:
        return dual_sup(x, PolarPolytope(x.web, tuple(gens))) <= 1
    except InfiniteNorm:
        return False


def in_down_hull(v: SparseVec, gens: Sequence[SparseVec]) -> bool:
    """Is ``v <= sum lambda_i g_i`` for some subprobability weights ``lambda``?"""
    if v.is_zero():
        return True
    m = len(gens)
    if m == 0:
        return False
    A, b = [], []
    for a in v.web:
        A.append([-g[a] for g in gens])
        b.append(-v[a])
    A.append([1] * m)
    b.append(1)
    return simplex.feasible(A, b, n=m) is not None


def polar_vertices(gens: Sequence[SparseVec], web: Web) -> VertexSet:
    """Vertex set of ``{u >= 0 | <g,u> <= 1}`` by brute-force basis enumeration."""
    n = len(web)
    if n > MAX_VERTEX_DIM:
        raise CapabilityError(f"vertex enumeration limited to webs of size <= {MAX_VERTEX_DIM}, got {n}")
    elems = web.elements
    covered = {a for g in gens for a in g.support}
    bounded = all(a in covered for a in elems)
    rows = [[g[a] for a in elems] for g in gens]
    planes = [(r, Fraction(1)) for r in rows]
    planes += [([Fraction(int(i == j)) for j in range(n)], Fraction(0)) for i in range(n)]
    found = {}
    for subset in itertools.combinations(range(len(planes)), n):
        sol = simplex.solve_square([planes[k][0] for k in subset], [planes[k][1] for k in subset])
        if sol is None or any(v < 0 for v in sol):
            continue
        if any(sum(r[j] * sol[j] for j in range(n)) > 1 for r in rows):
            continue
        found[tuple(sol)] = True
    if n == 0:
        found[()] = True
    verts = [SparseVec.from_dense(web, list(p)) for p in sorted(found)]
    return VertexSet(verts, bounded)


# -- clique membership -------------------------------------------------------

@dataclass
class Membership:
    ok: bool
    exact: bool = True
    note: str = ""

    def __bool__(self):
        return self.ok


def clique_membership(x: SparseVec, desc: PcsDescriptor, trials: int = 64, seed: int = 0) -> Membership:
    if desc.shape == "arrow":
        from . import kleisli

        verdict = kleisli.is_morphism(kleisli.point_to_morphism(desc, x), trials=trials, seed=seed)
        return Membership(verdict.passed, exact=False, note=verdict.status)
    if x.web != desc.web:
        raise StructuralError(f"vector is not over the web of {desc!r}")
    if desc.shape == "one":
        return Membership(x[ONE_ATOM] <= 1)
    if desc.shape in ("bool", "nat"):
        return Membership(x.total() <= 1)
    if desc.shape == "product":
        parts = [clique_membership(component(desc, x, i), f, trials, seed)
                 for i, f in enumerate(desc.factors)]
        return Membership(all(parts), exact=all(p.exact for p in parts))
    return Membership(in_bipolar(x, desc.gens))


def norm(x: SparseVec, desc: PcsDescriptor) -> Fraction:
    """Cone norm of ``x`` in the cone generated by P(desc)."""
    if desc.shape == "arrow":
        raise CapabilityError("the arrow-space norm is a supremum over cliques; not computed exactly")
    return dual_sup(x, PolarPolytope.of(desc))


# -- certification -----------------------------------------------------------

@dataclass
class PcsReport:
    space: str
    lambdas: Dict
    lambda_ok: bool
    bounds: Dict
    bound_ok: bool
    closure_ok: Optional[bool]
    closure_mode: str
    double_polar_vertices: List[SparseVec] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.lambda_ok and self.bound_ok and bool(self.closure_ok)

    def to_json(self):
        def q(v):
            return None if v is None else fmt_rational(v)
        return {
            "space": self.space,
            "lambda": [[encode_elem(a), q(v)] for a, v in self.lambdas.items()],
            "lambda_ok": self.lambda_ok,
            "bound": [[encode_elem(a), q(v)] for a, v in self.bounds.items()],
            "bound_ok": self.bound_ok,
            "closure_ok": self.closure_ok,
            "closure_mode": self.closure_mode,
            "double_polar_vertices": [[fmt_rational(c) for c in v.dense()] for v in self.double_polar_vertices],
            "failures": self.failures,
            "passed": self.passed,
        }


def check_pcs(desc: PcsDescriptor, trials: int = 32, seed: int = 0) -> PcsReport:
    """Certify the three PCS conditions for a builtin or generated space.

    (i) every ``e_a`` has a positive multiple in P; (ii) every coordinate is
    bounded on P; (iii) the double polar equals the downward convex hull of
    the generators (vertex-exact up to ``MAX_VERTEX_DIM``, sampled beyond).
    """
    web = desc.web
    gens = generators(desc)
    polar = PolarPolytope(web, tuple(gens))
    failures = []

    lambdas, lambda_ok = {}, True
    for a in web:
        try:
            lambdas[a] = 1 / dual_sup(SparseVec.basis(web, a), polar)
        except InfiniteNorm:
            lambdas[a] = Fraction(0)
            lambda_ok = False
            failures.append(f"no positive multiple of e_{a} is a clique")

    # M_a = 1 / max{t | t e_a in polar}: support function of the bipolar along e_a
    bounds, bound_ok = {}, True
    for a in web:
        tmax = _max_scaled_basis_in_polar(gens, a)
        # polar unbounded along e_a forces v_a = 0 on the bipolar
        bounds[a] = Fraction(0) if tmax is None else 1 / tmax

    dp_vertices: List[SparseVec] = []
    if len(web) <= MAX_VERTEX_DIM:
        mode = "vertex-exact"
        pverts = polar.vertices()
        covered = [a for a in web if any(g[a] for g in gens)]
        sub = Web(covered)
        restricted = [SparseVec(sub, {a: v[a] for a in covered}) for v in pverts]
        dp = polar_vertices(restricted, sub)
        dp_vertices = [SparseVec(web, v.items()) for v in dp]
        closure_ok = dp.bounded
        if not dp.bounded:
            failures.append("double polar is unbounded")
        for v in dp_vertices:
            if not in_down_hull(v, gens):
                closure_ok = False
                failures.append(f"double-polar vertex {v!r} is outside the downward hull of the generators")
        for a in covered:
            top = max((v[a] for v in dp_vertices), default=Fraction(0))
            if bounds.get(a) is not None and top != bounds[a]:
                failures.append(f"bound mismatch at {a}: LP {bounds[a]} vs vertices {top}")
                bound_ok = False
    else:
        import numpy as np

        mode = "sampled-necessary"
        rng = np.random.default_rng(seed)
        closure_ok = all(in_bipolar(g, gens) for g in gens)
        for _ in range(trials):
            w = [Fraction(int(k), 1000) for k in rng.integers(0, 1000, size=len(gens))]
            total = sum(w, Fraction(0))
            if total == 0:
                continue
            v = SparseVec(web, {})
            for wi, g in zip(w, gens):
                v = v + g.scale(wi / total)
            if not in_bipolar(v, gens):
                closure_ok = False
                failures.append(f"hull point {v!r} rejected by the polar test")
        log.info("closure of %r checked by sampling only (dimension %d)", desc, len(web))

    return PcsReport(repr(desc), lambdas, lambda_ok, bounds, bound_ok, closure_ok, mode,
                     dp_vertices, failures)


def _max_scaled_basis_in_polar(gens, a) -> Optional[Fraction]:
    """``max {t | t e_a in polar}``; ``None`` when unbounded (coordinate outside every support)."""
    top = max((g[a] for g in gens), default=Fraction(0))
    if top == 0:
        return None
    return 1 / top
