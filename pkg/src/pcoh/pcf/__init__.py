"""PCF with fair binary choice: front end, operational and denotational semantics."""
from .adequacy import AdequacyReport, adequacy
from .denotation import DenParams, denote, denote_closed, interpret_type
from .operational import SubDistribution, eval_exact, sample, step
from .parser import parse, parse_type
from .syntax import (N, OMEGA, App, Arrow, Choice, Fix, Ifz, Lam, Let, Num, Pred, Succ, Var,
                     free_vars, show, subst)
from .typecheck import typecheck

__all__ = ["AdequacyReport", "adequacy", "DenParams", "denote", "denote_closed", "interpret_type",
           "SubDistribution", "eval_exact", "sample", "step", "parse", "parse_type", "N", "OMEGA",
           "App", "Arrow", "Choice", "Fix", "Ifz", "Lam", "Let", "Num", "Pred", "Succ", "Var",
           "free_vars", "show", "subst", "typecheck"]
