"""Exact sparse linear algebra over finite webs.

Scalars are :class:`fractions.Fraction` throughout. Web elements are
``int`` (numerals), ``str`` (named atoms), :class:`Tag` (component of a
product web) or :class:`ArrowElem` (element of an arrow web).
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from .errors import StructuralError

Rational = Fraction


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact scalars; pass a Fraction or a 'p/q' string")
    return Fraction(value)


def fmt_rational(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True, slots=True)
class Tag:
    """Element ``(index, elem)`` of a tagged disjoint union."""

    index: int
    elem: Any

    def __str__(self):
        return f"({self.index},{self.elem})"


@dataclass(frozen=True, slots=True)
class ArrowElem:
    """Element ``(mu, b)`` of the web of an arrow space."""

    mu: "Multiset"
    out: Any

    def __str__(self):
        return f"({self.mu},{self.out})"


@functools.lru_cache(maxsize=1 << 18, typed=True)
def elem_key(a) -> tuple:
    """Total order on web elements, used for every canonical ordering."""
    if isinstance(a, bool):
        raise StructuralError("booleans are not web elements")
    if isinstance(a, int):
        return (0, a)
    if isinstance(a, str):
        return (1, a)
    if isinstance(a, Tag):
        return (2, a.index, elem_key(a.elem))
    if isinstance(a, ArrowElem):
        return (3, a.mu.key, elem_key(a.out))
    raise StructuralError(f"not a web element: {a!r}")


# -- JSON element encoding ---------------------------------------------------

def encode_elem(a):
    if isinstance(a, int):
        return str(a)
    if isinstance(a, str):
        return a
    if isinstance(a, Tag):
        return [a.index, encode_elem(a.elem)]
    if isinstance(a, ArrowElem):
        return {"mu": a.mu.to_json(), "b": encode_elem(a.out)}
    raise StructuralError(f"not a web element: {a!r}")


def decode_elem(obj):
    if isinstance(obj, str):
        return int(obj) if obj.isdigit() else obj
    if isinstance(obj, list) and len(obj) == 2 and isinstance(obj[0], int):
        return Tag(obj[0], decode_elem(obj[1]))
    if isinstance(obj, dict) and set(obj) == {"mu", "b"}:
        return ArrowElem(Multiset.from_json(obj["mu"]), decode_elem(obj["b"]))
    raise StructuralError(f"cannot decode web element {obj!r}")


# -- Web ---------------------------------------------------------------------

class Web:
    """Ordered finite set of distinct web elements."""

    __slots__ = ("elements", "_index")

    def __init__(self, elements: Iterable):
        elements = tuple(elements)
        index = {}
        for i, a in enumerate(elements):
            elem_key(a)
            if isinstance(a, str) and a.isdigit():
                raise StructuralError(f"string atom {a!r} collides with numeral encoding; use int")
            if a in index:
                raise StructuralError(f"duplicate web element {a!r}")
            index[a] = i
        self.elements = elements
        self._index = index

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, a):
        return a in self._index

    def index(self, a) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise StructuralError(f"{a!r} is not in the web") from None

    def __eq__(self, other):
        return isinstance(other, Web) and self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        if len(self.elements) > 8:
            return f"Web({list(self.elements[:8])}+{len(self.elements) - 8})"
        return f"Web({list(self.elements)})"

    def to_json(self):
        return [encode_elem(a) for a in self.elements]

    @classmethod
    def from_json(cls, obj):
        return cls(decode_elem(a) for a in obj)


def check_same_web(u_web: Web, v_web: Web):
    if u_web != v_web:
        raise StructuralError(f"web mismatch: {u_web!r} vs {v_web!r}")


# -- Multiset ----------------------------------------------------------------

class Multiset:
    """Finite multiset of web elements; immutable and hashable.

    Canonical order of multisets is lexicographic on
    ``(degree, sorted element keys)``.
    """

    __slots__ = ("counts", "degree", "_hash", "_key")

    def __init__(self, counts: Mapping | Iterable[Tuple[Any, int]] = ()):
        items = counts.items() if isinstance(counts, Mapping) else counts
        merged: Dict[Any, int] = {}
        for a, c in items:
            if not isinstance(c, int) or c < 0:
                raise StructuralError(f"multiplicity of {a!r} must be a nonnegative int, got {c!r}")
            if c:
                merged[a] = merged.get(a, 0) + c
        self.counts = tuple(sorted(merged.items(), key=lambda kv: elem_key(kv[0])))
        self.degree = sum(merged.values())
        self._hash = hash(self.counts)
        self._key = None

    @classmethod
    def _canonical(cls, counts: tuple) -> "Multiset":
        """Trusted constructor: ``counts`` already merged, positive and sorted."""
        m = object.__new__(cls)
        m.counts = counts
        m.degree = sum(c for _, c in counts)
        m._hash = hash(counts)
        m._key = None
        return m

    @classmethod
    def of(cls, *elements) -> "Multiset":
        return cls((a, 1) for a in elements)

    @classmethod
    def from_elements(cls, elements: Iterable) -> "Multiset":
        return cls((a, 1) for a in elements)

    @property
    def support(self) -> Tuple:
        return tuple(a for a, _ in self.counts)

    def count(self, a) -> int:
        for b, c in self.counts:
            if b == a:
                return c
        return 0

    def elements(self) -> list:
        """Expanded sorted element list, e.g. ``[0, 0, 1]`` for ``[0^2, 1]``."""
        return [a for a, c in self.counts for _ in range(c)]

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.degree, tuple(elem_key(a) for a in self.elements()))
        return self._key

    def __add__(self, other: "Multiset") -> "Multiset":
        if not other.counts:
            return self
        if not self.counts:
            return other
        merged = dict(self.counts)
        for a, c in other.counts:
            merged[a] = merged.get(a, 0) + c
        return Multiset._canonical(tuple(sorted(merged.items(), key=_first_key)))

    def __eq__(self, other):
        return isinstance(other, Multiset) and self.counts == other.counts

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __len__(self):
        return self.degree

    def __iter__(self) -> Iterator:
        return iter(self.elements())

    def __repr__(self):
        return "[" + ",".join(str(a) for a in self.elements()) + "]"

    def map(self, fn) -> "Multiset":
        return Multiset((fn(a), c) for a, c in self.counts)

    def to_json(self):
        return [[encode_elem(a), c] for a, c in self.counts]

    @classmethod
    def from_json(cls, obj) -> "Multiset":
        return cls((decode_elem(a), int(c)) for a, c in obj)


def _first_key(kv):
    return elem_key(kv[0])


EMPTY = Multiset()


# -- SparseVec ---------------------------------------------------------------

class SparseVec:
    """Finitely supported nonnegative rational vector over a web."""

    __slots__ = ("web", "_entries")

    def __init__(self, web: Web, entries: Mapping | Iterable = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        clean = {}
        for a, q in items:
            q = as_rational(q)
            if q < 0:
                raise StructuralError(f"negative entry {q} at {a!r}")
            if a not in web:
                raise StructuralError(f"{a!r} is not in the web {web!r}")
            if q:
                clean[a] = clean.get(a, Fraction(0)) + q
        self.web = web
        self._entries = clean

    @classmethod
    def zero(cls, web: Web) -> "SparseVec":
        return cls(web)

    @classmethod
    def basis(cls, web: Web, a, scale=1) -> "SparseVec":
        return cls(web, {a: scale})

    @classmethod
    def from_dense(cls, web: Web, values: Sequence) -> "SparseVec":
        if len(values) != len(web):
            raise StructuralError("dense vector length differs from web size")
        return cls(web, zip(web.elements, values))

    def __getitem__(self, a) -> Fraction:
        return self._entries.get(a, Fraction(0))

    def items(self):
        """Nonzero entries in web order."""
        return sorted(self._entries.items(), key=lambda kv: self.web.index(kv[0]))

    @property
    def support(self) -> Tuple:
        return tuple(a for a, _ in self.items())

    def dense(self) -> Tuple[Fraction, ...]:
        return tuple(self[a] for a in self.web)

    def total(self) -> Fraction:
        return sum(self._entries.values(), Fraction(0))

    def is_zero(self) -> bool:
        return not self._entries

    def __add__(self, other: "SparseVec") -> "SparseVec":
        check_same_web(self.web, other.web)
        out = dict(self._entries)
        for a, q in other._entries.items():
            out[a] = out.get(a, Fraction(0)) + q
        return SparseVec(self.web, out)

    def scale(self, c) -> "SparseVec":
        c = as_rational(c)
        return SparseVec(self.web, {a: c * q for a, q in self._entries.items()})

    __rmul__ = scale

    def __eq__(self, other):
        return isinstance(other, SparseVec) and self.web == other.web and self._entries == other._entries

    def __hash__(self):
        return hash((self.web, frozenset(self._entries.items())))

    def __repr__(self):
        body = ", ".join(f"{a}: {q}" for a, q in self.items())
        return f"SparseVec({{{body}}})"

    def to_json(self):
        return {"web": self.web.to_json(),
                "entries": [[encode_elem(a), fmt_rational(q)] for a, q in self.items()]}

    @classmethod
    def from_json(cls, obj, web: Web | None = None) -> "SparseVec":
        if web is None:
            web = Web.from_json(obj["web"])
        return cls(web, ((decode_elem(a), Fraction(q)) for a, q in obj["entries"]))


# -- Matrix ------------------------------------------------------------------

class Matrix:
    """Nonnegative rational matrix indexed by ``rows x cols``."""

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, rows: Web, cols: Web, entries: Mapping):
        clean = {}
        for (a, b), q in entries.items():
            q = as_rational(q)
            if q < 0:
                raise StructuralError(f"negative matrix entry at {(a, b)!r}")
            if a not in rows or b not in cols:
                raise StructuralError(f"entry {(a, b)!r} outside the declared webs")
            if q:
                clean[(a, b)] = q
        self.rows, self.cols, self._entries = rows, cols, clean

    @classmethod
    def from_rows(cls, rows: Web, cols: Web, table: Sequence[Sequence]) -> "Matrix":
        return cls(rows, cols, {(a, b): as_rational(q)
                                for a, row in zip(rows, table)
                                for b, q in zip(cols, row)})

    @classmethod
    def identity(cls, web: Web) -> "Matrix":
        return cls(web, web, {(a, a): 1 for a in web})

    def __getitem__(self, key) -> Fraction:
        return self._entries.get(key, Fraction(0))

    def items(self):
        return sorted(self._entries.items(),
                      key=lambda kv: (self.rows.index(kv[0][0]), self.cols.index(kv[0][1])))

    def row(self, a) -> SparseVec:
        return SparseVec(self.cols, {b: q for (r, b), q in self._entries.items() if r == a})

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols and self._entries == other._entries)


# -- operations --------------------------------------------------------------

def scal(u: SparseVec, v: SparseVec) -> Fraction:
    """``<u, v> = sum_a u_a v_a``; finite on finite webs."""
    check_same_web(u.web, v.web)
    small, big = (u, v) if len(u._entries) <= len(v._entries) else (v, u)
    return sum((q * big[a] for a, q in small._entries.items()), Fraction(0))


def mat_apply(m: Matrix, u: SparseVec) -> SparseVec:
    """``(m . u)_b = sum_a m_{a,b} u_a``."""
    check_same_web(m.rows, u.web)
    out: Dict[Any, Fraction] = {}
    for (a, b), q in m._entries.items():
        ua = u[a]
        if ua:
            out[b] = out.get(b, Fraction(0)) + q * ua
    return SparseVec(m.cols, out)


def monomial(x, mu: Multiset):
    """``x^mu``; ``x`` is anything indexable by web elements (exact or not)."""
    result = 1
    for a, c in mu.counts:
        xa = x[a]
        if not xa:
            return xa * 0
        result = result * xa ** c
    return result if not isinstance(result, int) else Fraction(result)


def promote(x: SparseVec, degree: int) -> Dict[Multiset, Fraction]:
    """Promotion ``x^!`` restricted to multisets of degree <= ``degree`` over Supp(x)."""
    if degree < 0:
        raise StructuralError("degree bound must be >= 0")
    support = Web(x.support)
    return {mu: monomial(x, mu) for mu in enum_multisets(support, degree)}


def alpha(mu: Multiset) -> int:
    """Number of sequences ``(c_1..c_k)`` whose multiset is ``mu``."""
    out = math.factorial(mu.degree)
    for _, c in mu.counts:
        out //= math.factorial(c)
    return out


def enum_multisets(web: Web | Sequence, degree: int, exact_degree: bool = False) -> list:
    """All multisets of degree <= ``degree`` (or == with ``exact_degree``) in canonical order."""
    if degree < 0:
        raise StructuralError("degree bound must be >= 0")
    elems = sorted(web, key=elem_key)
    out = []
    for k in (range(degree, degree + 1) if exact_degree else range(degree + 1)):
        for combo in itertools.combinations_with_replacement(elems, k):
            out.append(Multiset.from_elements(combo))
    return out


def leq(u: SparseVec, v: SparseVec) -> bool:
    check_same_web(u.web, v.web)
    return all(q <= v[a] for a, q in u._entries.items())
