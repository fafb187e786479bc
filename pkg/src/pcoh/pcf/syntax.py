"""Abstract syntax of PCF with fair binary choice."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, Union


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class NatType:
    def __str__(self):
        return "N"


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self):
        left = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{left} -> {self.cod}"


Type = Union[NatType, Arrow]
N = NatType()


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    var: str
    ty: Type
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Fix:
    """``Y M``: the fixpoint of ``M : A -> A``."""

    body: "Term"


@dataclass(frozen=True)
class Ifz:
    cond: "Term"
    zero: "Term"
    other: "Term"


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Choice:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Num:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("numerals are nonnegative")


@dataclass(frozen=True)
class Succ:
    arg: "Term"


@dataclass(frozen=True)
class Pred:
    arg: "Term"


Term = Union[Var, Lam, App, Fix, Ifz, Let, Choice, Num, Succ, Pred]

OMEGA = Fix(Lam("y", N, Var("y")))


def show(t: Term) -> str:
    """Concrete syntax accepted back by the parser."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Num):
        return str(t.n)
    if t == OMEGA:
        return "Omega"
    if isinstance(t, Lam):
        return f"\\{t.var}:{t.ty}. {show(t.body)}"
    if isinstance(t, App):
        fn = show(t.fn) if isinstance(t.fn, (Var, Num, App, Succ, Pred, Ifz, Let)) else f"({show(t.fn)})"
        return f"{fn} {_atom(t.arg)}"
    if isinstance(t, Fix):
        return f"Y {_atom(t.body)}"
    if isinstance(t, Ifz):
        return f"ifz({show(t.cond)}, {show(t.zero)}, {show(t.other)})"
    if isinstance(t, Let):
        return f"let({t.var}, {show(t.bound)}, {show(t.body)})"
    if isinstance(t, Choice):
        left = show(t.left)
        if isinstance(t.left, (Choice, Lam)):
            left = f"({left})"
        return f"{left} (+) {show(t.right)}"
    if isinstance(t, Succ):
        return f"succ({show(t.arg)})"
    if isinstance(t, Pred):
        return f"pred({show(t.arg)})"
    raise TypeError(f"not a term: {t!r}")


def _atom(t: Term) -> str:
    s = show(t)
    if isinstance(t, (Var, Num, Succ, Pred, Ifz, Let)) or t == OMEGA:
        return s
    return f"({s})"


def free_vars(t: Term) -> FrozenSet[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Num):
        return frozenset()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, Let):
        return free_vars(t.bound) | (free_vars(t.body) - {t.var})
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    if isinstance(t, Ifz):
        return free_vars(t.cond) | free_vars(t.zero) | free_vars(t.other)
    if isinstance(t, Choice):
        return free_vars(t.left) | free_vars(t.right)
    if isinstance(t, (Fix, Succ, Pred)):
        return free_vars(t.body if isinstance(t, Fix) else t.arg)
    raise TypeError(f"not a term: {t!r}")


_fresh = itertools.count()


def _fresh_name(base: str, avoid) -> str:
    while True:
        name = f"{base}_{next(_fresh)}"
        if name not in avoid:
            return name


def subst(t: Term, x: str, s: Term) -> Term:
    """Capture-avoiding ``t[s/x]``."""
    fv = free_vars(s)
    return _subst(t, x, s, fv)


def _binder(var, body, x, s, fv):
    """Substitute under a binder; returns the (possibly renamed) binder and body."""
    if var == x:
        return var, body
    if var in fv:
        new = _fresh_name(var, fv | free_vars(body))
        body = _subst(body, var, Var(new), frozenset((new,)))
        var = new
    return var, _subst(body, x, s, fv)


def _subst(t, x, s, fv):
    if isinstance(t, Var):
        return s if t.name == x else t
    if isinstance(t, Num):
        return t
    if isinstance(t, Lam):
        var, body = _binder(t.var, t.body, x, s, fv)
        return Lam(var, t.ty, body)
    if isinstance(t, Let):
        var, body = _binder(t.var, t.body, x, s, fv)
        return Let(var, _subst(t.bound, x, s, fv), body)
    if isinstance(t, App):
        return App(_subst(t.fn, x, s, fv), _subst(t.arg, x, s, fv))
    if isinstance(t, Ifz):
        return Ifz(_subst(t.cond, x, s, fv), _subst(t.zero, x, s, fv), _subst(t.other, x, s, fv))
    if isinstance(t, Choice):
        return Choice(_subst(t.left, x, s, fv), _subst(t.right, x, s, fv))
    if isinstance(t, Fix):
        return Fix(_subst(t.body, x, s, fv))
    if isinstance(t, Succ):
        return Succ(_subst(t.arg, x, s, fv))
    if isinstance(t, Pred):
        return Pred(_subst(t.arg, x, s, fv))
    raise TypeError(f"not a term: {t!r}")
