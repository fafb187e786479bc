"""Recursive-descent parser for the concrete PCF syntax.

Grammar::

    term  := lam | app [ "(+)" term ]        -- (+) is right-assoc, lowest precedence
    lam   := "\\" ident ":" type "." term
    app   := atom { atom }
    atom  := ident | number | "(" term ")" | "Y" atom | "Omega"
           | "succ" "(" term ")" | "pred" "(" term ")"
           | "ifz" "(" term "," term "," term ")" | "let" "(" ident "," term "," term ")"
    type  := "N" | "(" type ")" | type "->" type

``#`` starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List

from ..errors import PcfSyntaxError
from .syntax import (N, OMEGA, App, Arrow, Choice, Fix, Ifz, Lam, Let, Num, Pred, Succ, Term,
                     Type, Var)

KEYWORDS = {"Y", "succ", "pred", "ifz", "let", "Omega", "N"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<choice>\(\+\))
  | (?P<arrow>->)
  | (?P<lam>\\|λ)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[(),:.])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PcfSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            if kind == "ident" and m.group() in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise PcfSyntaxError(f"{msg}, found {found!r}", tok.line, tok.col)

    def eat(self, text):
        if self.tok.text != text:
            self.fail(f"expected {text!r}")
        self.i += 1

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.fail("expected an identifier")
        name = self.tok.text
        self.i += 1
        return name

    def term(self) -> Term:
        if self.tok.kind == "lam":
            return self.lam()
        left = self.app()
        if self.tok.kind == "choice":
            self.i += 1
            return Choice(left, self.term())
        return left

    def lam(self) -> Term:
        self.i += 1
        var = self.ident()
        self.eat(":")
        ty = self.type()
        self.eat(".")
        return Lam(var, ty, self.term())

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind in ("ident", "num") or t.text == "(" or (t.kind == "kw" and t.text != "N")

    def app(self) -> Term:
        if not self.starts_atom():
            self.fail("expected a term")
        t = self.atom()
        while self.starts_atom():
            t = App(t, self.atom())
        return t

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "ident":
            self.i += 1
            return Var(t.text)
        if t.kind == "num":
            self.i += 1
            return Num(int(t.text))
        if t.text == "(":
            self.i += 1
            inner = self.term()
            self.eat(")")
            return inner
        if t.kind != "kw":
            self.fail("expected a term")
        self.i += 1
        if t.text == "Omega":
            return OMEGA
        if t.text == "Y":
            if not self.starts_atom():
                self.fail("Y expects an argument")
            return Fix(self.atom())
        self.eat("(")
        if t.text in ("succ", "pred"):
            arg = self.term()
            self.eat(")")
            return Succ(arg) if t.text == "succ" else Pred(arg)
        if t.text == "ifz":
            cond = self.term()
            self.eat(",")
            zero = self.term()
            self.eat(",")
            other = self.term()
            self.eat(")")
            return Ifz(cond, zero, other)
        if t.text == "let":
            var = self.ident()
            self.eat(",")
            bound = self.term()
            self.eat(",")
            body = self.term()
            self.eat(")")
            return Let(var, bound, body)
        self.fail("unexpected keyword", t)

    def type(self) -> Type:
        if self.tok.text == "N":
            self.i += 1
            left = N
        elif self.tok.text == "(":
            self.i += 1
            left = self.type()
            self.eat(")")
        else:
            self.fail("expected a type")
        if self.tok.kind == "arrow":
            self.i += 1
            return Arrow(left, self.type())
        return left


def parse(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.tok.kind != "eof":
        p.fail("trailing input")
    return t


def parse_type(text: str) -> Type:
    p = _Parser(text)
    ty = p.type()
    if p.tok.kind != "eof":
        p.fail("trailing input")
    return ty
