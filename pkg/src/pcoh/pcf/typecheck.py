"""Simple type checking for PCF terms with annotated binders."""
from __future__ import annotations

from typing import Mapping, Optional

from ..errors import PcfTypeError
from .syntax import (N, App, Arrow, Choice, Fix, Ifz, Lam, Let, Num, Pred, Succ, Term, Type,
                     Var, show)


def typecheck(term: Term, ctx: Optional[Mapping[str, Type]] = None) -> Type:
    return _check(dict(ctx or {}), term)


def _expect(ty: Type, want: Type, term: Term, what: str):
    if ty != want:
        raise PcfTypeError(f"{what} has type {ty}, expected {want}", show(term))


def _check(ctx, t) -> Type:
    if isinstance(t, Var):
        if t.name not in ctx:
            raise PcfTypeError(f"unbound variable {t.name}", t.name)
        return ctx[t.name]
    if isinstance(t, Num):
        return N
    if isinstance(t, Lam):
        return Arrow(t.ty, _check({**ctx, t.var: t.ty}, t.body))
    if isinstance(t, App):
        fn = _check(ctx, t.fn)
        if not isinstance(fn, Arrow):
            raise PcfTypeError(f"applying a term of type {fn}", show(t))
        _expect(_check(ctx, t.arg), fn.dom, t, "argument")
        return fn.cod
    if isinstance(t, Fix):
        fn = _check(ctx, t.body)
        if not isinstance(fn, Arrow) or fn.dom != fn.cod:
            raise PcfTypeError(f"Y needs a term of type A -> A, got {fn}", show(t))
        return fn.cod
    if isinstance(t, (Succ, Pred)):
        _expect(_check(ctx, t.arg), N, t, "argument")
        return N
    if isinstance(t, Ifz):
        _expect(_check(ctx, t.cond), N, t, "scrutinee")
        zero = _check(ctx, t.zero)
        _expect(_check(ctx, t.other), zero, t, "else branch")
        return zero
    if isinstance(t, Let):
        _expect(_check(ctx, t.bound), N, t, "let-bound term")
        return _check({**ctx, t.var: N}, t.body)
    if isinstance(t, Choice):
        left = _check(ctx, t.left)
        _expect(_check(ctx, t.right), left, t, "right operand")
        return left
    raise TypeError(f"not a term: {t!r}")
