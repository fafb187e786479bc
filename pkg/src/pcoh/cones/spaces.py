"""Finite-dimensional lattice cones, their norms, and black-box functions on them.

Points are dense tuples in the order of the space's coordinates. Scalars are
either :class:`fractions.Fraction` (exact mode) or mpmath floats from a
private 192-bit context (float mode).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Optional, Sequence, Tuple

import mpmath

from .. import pcs
from ..algebra import SparseVec, Web
from ..errors import CapabilityError, DomainError, StructuralError
from ..kleisli import Morphism, evaluate

MP = mpmath.MPContext()
MP.prec = 192

FLOAT_EPS = 1e-12

Point = Tuple[Any, ...]


def to_float(v):
    """Convert an exact or float scalar to the float context."""
    if isinstance(v, Fraction):
        return MP.mpf(v.numerator) / v.denominator
    return MP.mpf(v)


def is_exact(v) -> bool:
    return isinstance(v, (Fraction, int))


def fmt_scalar(v) -> str:
    if isinstance(v, (Fraction, int)):
        return str(Fraction(v))
    return MP.nstr(v, 30)


def as_point(values: Sequence, exact: bool) -> Point:
    if exact:
        return tuple(Fraction(v) for v in values)
    return tuple(to_float(v) for v in values)


def add(x: Point, y: Point) -> Point:
    return tuple(a + b for a, b in zip(x, y))


def sub(x: Point, y: Point) -> Point:
    return tuple(a - b for a, b in zip(x, y))


def scale(c, x: Point) -> Point:
    return tuple(c * a for a in x)


def vsum(points: Sequence[Point], dim: int) -> Point:
    total = tuple(Fraction(0) for _ in range(dim))
    for p in points:
        total = add(total, p)
    return total


@dataclass(frozen=True)
class ConeSpace:
    """A lattice cone ``R+^dim`` whose unit ball is cut out by finitely many
    nonnegative functionals: ``||x|| = max_v <x, v>``."""

    kind: str
    dim: int
    desc: Optional[pcs.PcsDescriptor] = None

    def __repr__(self):
        if self.kind == "pcs":
            return f"ConeSpace({self.desc!r})"
        return "HalfLine" if self.kind == "halfline" else f"OrthantSup({self.dim})"

    @cached_property
    def functionals(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """Polar vertices (zero vertex dropped); these determine norm and local norms."""
        if self.kind == "halfline":
            return ((Fraction(1),),)
        if self.kind == "orthant":
            return tuple(tuple(Fraction(int(i == j)) for j in range(self.dim)) for i in range(self.dim))
        return _pcs_functionals(self.desc)

    @cached_property
    def float_functionals(self):
        return tuple(tuple(to_float(q) for q in v) for v in self.functionals)

    @property
    def web(self) -> Web:
        if self.desc is None:
            return Web(range(self.dim))
        return self.desc.web

    def _funcs(self, x: Point):
        return self.functionals if all(is_exact(a) for a in x) else self.float_functionals

    def check_point(self, x: Point):
        if len(x) != self.dim:
            raise StructuralError(f"point of length {len(x)} in a {self.dim}-dimensional cone")
        if any(a < 0 for a in x):
            raise DomainError("cone points are nonnegative")

    def norm(self, x: Point):
        self.check_point(x)
        vals = [sum((a * b for a, b in zip(x, v) if b), x[0] * 0) for v in self._funcs(x)]
        return max(vals, default=x[0] * 0 if x else Fraction(0))

    def local_norm(self, x: Point, us: Sequence[Point]):
        """``inf{1/r | x + r * sum(us) in the unit ball}`` (0 when the directions vanish)."""
        self.check_point(x)
        zero = x[0] * 0 if x else Fraction(0)
        if self.norm(x) >= 1:
            raise DomainError("local cones are defined strictly inside the unit ball")
        s = vsum(us, self.dim) if us else tuple(zero for _ in x)
        best = zero
        for v in self._funcs(x):
            den = sum((a * b for a, b in zip(s, v) if b), zero)
            if den > 0:
                num = 1 - sum((a * b for a, b in zip(x, v) if b), zero)
                best = max(best, den / num)
        return best

    def in_ball(self, x: Point, slack=0) -> bool:
        return self.norm(x) <= 1 + slack

    def zero(self, exact: bool = True) -> Point:
        return as_point([0] * self.dim, exact)

    def basis(self, i: int, c=Fraction(1)) -> Point:
        return tuple(c if j == i else c * 0 for j in range(self.dim))

    @staticmethod
    def meet(x: Point, y: Point) -> Point:
        return tuple(min(a, b) for a, b in zip(x, y))

    @staticmethod
    def join(x: Point, y: Point) -> Point:
        return tuple(max(a, b) for a, b in zip(x, y))


HALF_LINE = ConeSpace("halfline", 1)


def orthant(n: int) -> ConeSpace:
    return ConeSpace("orthant", n)


def pcs_cone(desc: pcs.PcsDescriptor) -> ConeSpace:
    if desc.shape == "arrow":
        raise CapabilityError("arrow cones are handled through morphisms, not as explicit cones")
    return ConeSpace("pcs", len(desc.web), desc)


def _pcs_functionals(desc: pcs.PcsDescriptor):
    """Polar vertices with closed forms for the builtin spaces."""
    n = len(desc.web)
    if desc.shape in ("one", "bool", "nat"):
        return (tuple(Fraction(1) for _ in range(n)),)
    if desc.shape == "product":
        out, offset = [], 0
        for f in desc.factors:
            for v in _pcs_functionals(f):
                out.append((Fraction(0),) * offset + v + (Fraction(0),) * (n - offset - len(v)))
            offset += len(f.web)
        return tuple(out)
    if desc.shape == "generated":
        verts = pcs.polar_vertices(desc.gens, desc.web)
        if not verts.bounded:
            raise CapabilityError("some coordinate lies outside every generator (infinite norm)")
        return tuple(tuple(v[a] for a in desc.web) for v in verts if not v.is_zero())
    raise CapabilityError(f"no explicit polar for {desc!r}")


def to_sparse(space: ConeSpace, x: Point) -> SparseVec:
    return SparseVec(space.web, {a: Fraction(v) for a, v in zip(space.web, x) if v})


def from_sparse(space: ConeSpace, x: SparseVec) -> Point:
    return tuple(x[a] for a in space.web)


@dataclass(frozen=True)
class BlackBoxFn:
    """A function between cones, claimed pre-stable.

    ``exact`` promises rational output on rational input. ``degree`` is a
    known polynomial degree bound (enables exact interpolation), and
    ``morphism`` keeps the generating power series when there is one.
    """

    dom: ConeSpace
    cod: ConeSpace
    fn: Callable[[Point], Point]
    exact: bool = False
    degree: Optional[int] = None
    morphism: Optional[Morphism] = field(default=None, compare=False)
    name: str = "f"

    def __call__(self, x: Point) -> Point:
        if not self.exact:
            x = tuple(to_float(a) for a in x)
        y = tuple(self.fn(x))
        if len(y) != self.cod.dim:
            raise StructuralError(f"{self.name} returned {len(y)} coordinates, expected {self.cod.dim}")
        return y

    @property
    def series_backed(self) -> bool:
        return self.morphism is not None


def from_morphism(f: Morphism, exact: bool = True) -> BlackBoxFn:
    """``x |-> f . x^!`` as a function between the associated cones."""
    dom, cod = pcs_cone(f.dom), pcs_cone(f.cod)
    dom_web, cod_web = list(f.dom.web), list(f.cod.web)

    def fn(x: Point) -> Point:
        zero = x[0] * 0 if x else Fraction(0)
        vals = evaluate(f, dict(zip(dom_web, x)), zero=zero)
        return tuple(vals.get(b, zero) for b in cod_web)

    return BlackBoxFn(dom, cod, fn, exact=exact, degree=f.max_degree, morphism=f, name="morphism")


def from_callable(dom: ConeSpace, cod: ConeSpace, fn: Callable, exact: bool = False,
                  degree: Optional[int] = None, name: str = "f") -> BlackBoxFn:
    return BlackBoxFn(dom, cod, fn, exact=exact, degree=degree, name=name)


def scalar_fn(fn: Callable, exact: bool = False, degree: Optional[int] = None, name: str = "f") -> BlackBoxFn:
    """A function of the half-line to itself, given on scalars."""
    return BlackBoxFn(HALF_LINE, HALF_LINE, lambda x: (fn(x[0]),), exact=exact, degree=degree, name=name)
