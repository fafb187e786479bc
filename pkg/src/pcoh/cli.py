"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 front-end error, 3 capability or budget
error, 4 property violation (a witness is printed).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import kleisli, pcs
from .algebra import SparseVec, fmt_rational
from .cones import (Partition, bernstein_check, common_refinement, extract_coefficients,
                    find_grouping, from_morphism, is_prestable)
from .cones.spaces import fmt_scalar
from .errors import CapabilityError, FrontEndError, PcohError, PropertyViolation
from .kleisli import Morphism
from .pcf import DenParams, adequacy, denote_closed, eval_exact, parse, sample, typecheck
from .pcf.syntax import N

log = logging.getLogger("pcoh")

DEFAULTS = dict(web_cutoff=8, degree=4, fixpoint_iters=32, fuel=64, tol=1e-8, trials=64, seed=0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, *groups: str):
    if "budget" in groups:
        p.add_argument("--web-cutoff", "--W", dest="web_cutoff", type=int, default=DEFAULTS["web_cutoff"],
                       help="numerals kept in the web of N (default 8)")
        p.add_argument("--degree", "--D", dest="degree", type=int, default=DEFAULTS["degree"],
                       help="multiset degree bound (default 4)")
        p.add_argument("--fixpoint-iters", "--K", dest="fixpoint_iters", type=int,
                       default=DEFAULTS["fixpoint_iters"], help="Kleene iterations for Y (default 32)")
    if "fuel" in groups:
        p.add_argument("--fuel", type=int, default=DEFAULTS["fuel"], help="reduction steps (default 64)")
    if "random" in groups:
        p.add_argument("--trials", type=int, default=DEFAULTS["trials"])
        p.add_argument("--seed", type=int, default=DEFAULTS["seed"],
                       help="64-bit seed; all randomness derives from it (default 0)")
    if "tol" in groups:
        p.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcoh", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("run", help="sample one run of a program")
    p.add_argument("file")
    _common(p, "fuel", "random")

    p = sub.add_parser("dist", help="exact output distribution of a program")
    p.add_argument("file")
    _common(p, "fuel")

    p = sub.add_parser("denote", help="power-series denotation of a closed program")
    p.add_argument("file")
    _common(p, "budget")

    p = sub.add_parser("adequacy", help="operational versus denotational probabilities")
    p.add_argument("file")
    p.add_argument("--fuels", default="8,16,32,64", help="comma-separated fuel schedule")
    p.add_argument("--iters", default="2,4,8,16", help="comma-separated K schedule")
    _common(p, "budget")

    p = sub.add_parser("pcs-check", help="certify a PCS descriptor")
    p.add_argument("file")
    _common(p, "random")

    p = sub.add_parser("morphism-check", help="sampled validity check of a morphism")
    p.add_argument("file")
    _common(p, "random")

    p = sub.add_parser("prestable", help="sampled pre-stability test of a morphism")
    p.add_argument("file")
    p.add_argument("--n-max", type=int, default=3)
    _common(p, "random")

    p = sub.add_parser("extract", help="recover power-series coefficients from derivatives at 0")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("file", nargs="?", help="morphism JSON")
    src.add_argument("--from-denote", metavar="PCF", help="closed first-order program")
    p.add_argument("--mode", choices=("exact-poly", "scaling-limit"), default="exact-poly")
    p.add_argument("--j-max", type=int, default=20)
    _common(p, "budget", "tol")

    p = sub.add_parser("bernstein", help="Taylor remainders of a morphism at a point")
    p.add_argument("file", help="morphism JSON")
    p.add_argument("--x", required=True, help="comma-separated rationals in the domain web order")
    p.add_argument("--N", dest="n_max", type=int, default=None, help="largest Taylor rank")
    _common(p, "tol")

    p = sub.add_parser("refine", help="common refinement of two partitions")
    p.add_argument("file", help='JSON {"p1": [[...], ...], "p2": [[...], ...]}')
    _common(p)
    return parser


# -- helpers -----------------------------------------------------------------

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise FrontEndError(f"cannot read {path}: {e.strerror}") from e


def _read_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise FrontEndError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e


def _load_morphism(path: str) -> Morphism:
    try:
        return Morphism.from_json(_read_json(path))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, PcohError):
            raise
        raise FrontEndError(f"{path}: not a morphism description ({e})") from e


def _load_program(path: str, want_ground: bool = True):
    term = parse(_read(path))
    ty = typecheck(term)
    if want_ground and ty != N:
        raise FrontEndError(f"{path}: expected a program of type N, got {ty}")
    return term


def _params(args) -> DenParams:
    return DenParams(args.web_cutoff, args.degree, args.fixpoint_iters)


def _emit(args, obj, table: str):
    print(json.dumps(obj, sort_keys=False) if args.json else table)


def _vec_table(vals: Sequence[Fraction]) -> str:
    return "\n".join(f"{i}\t{fmt_rational(q)}" for i, q in enumerate(vals))


def _ints(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise UsageError(f"bad integer list {text!r}") from e


def _rationals(text: str) -> List[Fraction]:
    try:
        return [Fraction(s.strip()) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise UsageError(f"bad rational list {text!r}") from e


# -- subcommands -------------------------------------------------------------

def cmd_run(args) -> int:
    out = sample(_load_program(args.file), args.seed, args.fuel)
    _emit(args, {"outcome": out, "seed": args.seed, "fuel": args.fuel},
          "timeout" if out is None else str(out))
    return 0


def cmd_dist(args) -> int:
    d = eval_exact(_load_program(args.file), args.fuel)
    lines = [f"{n}\t{fmt_rational(q)}" for n, q in sorted(d.probs.items())]
    lines.append(f"residual\t{fmt_rational(d.residual)}")
    _emit(args, d.to_json(), "\n".join(lines))
    return 0


def cmd_denote(args) -> int:
    term = _load_program(args.file, want_ground=False)
    params = _params(args)
    den = denote_closed(term, params)
    if isinstance(den, SparseVec):
        vals = [den[n] for n in range(params.W)]
        _emit(args, {"vector": [fmt_rational(q) for q in vals]}, _vec_table(vals))
    else:
        obj = den.to_json()
        obj["truncated"] = den.truncated
        table = "\n".join(f"{mu}\t{b}\t{fmt_rational(q)}" for (mu, b), q in den.items())
        _emit(args, obj, table or "(all coefficients zero)")
    if getattr(den, "truncated", False):
        log.warning("degree truncation dropped terms; the result is a lower bound")
    return 0


def cmd_adequacy(args) -> int:
    term = _load_program(args.file)
    fuels, iters = _ints(args.fuels), _ints(args.iters)
    if len(fuels) != len(iters):
        raise UsageError("--fuels and --iters need the same length")
    schedule = [DenParams(args.web_cutoff, args.degree, k) for k in iters]
    rep = adequacy(term, fuels, schedule)
    lines = ["fuel\tK\tgap"] + [f"{r.fuel}\t{r.params.K}\t{fmt_rational(r.gap)}" for r in rep.rows]
    lines.append(f"final gap {fmt_rational(rep.final_gap)}; {'PASS' if rep.passed else 'FAIL'}")
    _emit(args, rep.to_json(), "\n".join(lines))
    if not rep.passed:
        raise PropertyViolation("adequacy schedule is not monotone", rep.to_json())
    return 0


def cmd_pcs_check(args) -> int:
    try:
        desc = pcs.PcsDescriptor.from_json(_read_json(args.file))
    except (KeyError, TypeError) as e:
        raise FrontEndError(f"{args.file}: not a PCS description ({e})") from e
    rep = pcs.check_pcs(desc, trials=args.trials, seed=args.seed)
    _emit(args, rep.to_json(), f"{desc!r}: {'PASS' if rep.passed else 'FAIL'} ({rep.closure_mode})")
    if not rep.passed:
        raise PropertyViolation("PCS conditions fail", rep.to_json())
    return 0


def cmd_morphism_check(args) -> int:
    f = _load_morphism(args.file)
    v = kleisli.is_morphism(f, args.trials, args.seed)
    obj = {"status": v.status, "checked": v.checked}
    if v.witness is not None:
        obj["witness"] = v.witness.to_json()
        obj["image"] = v.image.to_json()
    _emit(args, obj, f"{v.status} ({v.checked} cliques)")
    if not v.passed:
        raise PropertyViolation("image leaves the codomain", obj)
    return 0


def cmd_prestable(args) -> int:
    f = _load_morphism(args.file)
    v = is_prestable(from_morphism(f), args.n_max, args.trials, args.seed)
    _emit(args, v.to_json(), f"{'PASS' if v.passed else 'FAIL'} failures per rank {v.failures}")
    if not v.passed:
        raise PropertyViolation("negative higher-order difference", v.to_json())
    return 0


def cmd_extract(args) -> int:
    if args.from_denote:
        term = _load_program(args.from_denote, want_ground=False)
        source = denote_closed(term, _params(args))
        if not isinstance(source, Morphism):
            raise FrontEndError("extraction needs a program of function type")
    else:
        source = _load_morphism(args.file)
    g = from_morphism(source, exact=args.mode == "exact-poly")
    out = extract_coefficients(g, args.degree, mode=args.mode, tol=args.tol, j_max=args.j_max)
    obj = out.to_json()
    table = "\n".join(f"{mu}\t{b}\t{fmt_rational(q)}" for (mu, b), q in out.items())
    _emit(args, obj, table or "(all coefficients zero)")
    if source.max_degree <= args.degree:
        if args.mode == "exact-poly":
            ok = out == source
        else:
            keys = set(out.coeffs) | set(source.coeffs)
            ok = all(abs(out[k] - source[k]) <= 100 * args.tol for k in keys)
        if not ok:
            raise PropertyViolation("extraction does not reproduce the source coefficients", obj)
    return 0


def cmd_bernstein(args) -> int:
    f = _load_morphism(args.file)
    g = from_morphism(f)
    x = tuple(_rationals(args.x))
    if len(x) != g.dom.dim:
        raise UsageError(f"--x needs {g.dom.dim} coordinates")
    n_max = f.max_degree if args.n_max is None else args.n_max
    rep = bernstein_check(g, x, n_max, tol=args.tol)
    lines = [f"N={i}\t" + " ".join(fmt_scalar(a) for a in r) for i, r in enumerate(rep.remainders)]
    lines.append("PASS" if rep.passed else "FAIL")
    _emit(args, rep.to_json(), "\n".join(lines))
    if not rep.passed:
        raise PropertyViolation("Taylor remainders do not vanish", rep.to_json())
    return 0


def cmd_refine(args) -> int:
    obj = _read_json(args.file)
    try:
        p1 = Partition.of([tuple(Fraction(str(v)) for v in part) for part in obj["p1"]])
        p2 = Partition.of([tuple(Fraction(str(v)) for v in part) for part in obj["p2"]])
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, PcohError):
            raise
        raise FrontEndError(f"{args.file}: not a partition pair ({e})") from e
    out = common_refinement(p1, p2)
    g1, g2 = find_grouping(out, p1), find_grouping(out, p2)
    res = {"parts": [[fmt_rational(a) for a in part] for part in out.parts],
           "target": [fmt_rational(a) for a in out.target],
           "grouping_p1": g1, "grouping_p2": g2}
    table = "\n".join(" ".join(fmt_rational(a) for a in part) for part in out.parts)
    _emit(args, res, table)
    if g1 is None or g2 is None:
        raise PropertyViolation("output does not refine both inputs", res)
    return 0


COMMANDS = {"run": cmd_run, "dist": cmd_dist, "denote": cmd_denote, "adequacy": cmd_adequacy,
            "pcs-check": cmd_pcs_check, "morphism-check": cmd_morphism_check,
            "prestable": cmd_prestable, "extract": cmd_extract, "bernstein": cmd_bernstein,
            "refine": cmd_refine}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"pcoh: error: {e}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="pcoh: %(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"pcoh: error: {e}", file=sys.stderr)
        return 1
    except PropertyViolation as e:
        print(f"pcoh: property violation: {e}", file=sys.stderr)
        if e.witness is not None and not args.json:
            print(json.dumps(e.witness), file=sys.stderr)
        return e.exit_code
    except PcohError as e:
        print(f"pcoh: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except RecursionError:
        print("pcoh: term nesting exceeds the recursion budget", file=sys.stderr)
        return CapabilityError.exit_code


if __name__ == "__main__":
    sys.exit(main())
