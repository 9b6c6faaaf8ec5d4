"""Command-line frontend.

Subcommands cover the whole pipeline: ``params``, ``curve``, ``telescope``,
``region``, ``verify``, ``cost``, and ``suggest`` work on term files, while
``rat-curve``, ``rat-telescope``, ``rat-verify``, ``decompose``, and ``lift``
drive the rational-input pipeline on ratio, decomposition, and operator
files.

Exit codes: 0 when the requested result was produced (a telescoper found, a
pair verified, a table written); 1 when a solve or verification came back
negative at the requested point; 2 on bad arguments or malformed input.
Results go to standard output unless ``--out`` (``--csv`` for tables) names a
file; identical invocations produce identical bytes.  ``region`` reports
per-row progress on standard error only, and honors the ``HYPERTEL_WORKERS``
environment variable when ``--workers`` is not given.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from gmpy2 import mpq

from . import curves, ratcase, telescope, termio
from .errors import HypertelError, PreconditionError
from .hyperterm import ProperTerm, structural_params

__all__ = ["main", "build_parser"]

FOUND = 0
NO_SOLUTION = 1
BAD_INPUT = 2


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_term(path: str) -> ProperTerm:
    return termio.parse_term(_read(path))


def _rational_number(text: str) -> mpq:
    try:
        return mpq(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _order_window(rmin: Optional[int], rmax: int, curve: curves.CurveSpec) -> range:
    low = curve.rmin if rmin is None else rmin
    if rmax < low:
        raise PreconditionError(f"empty order window [{low}, {rmax}]")
    return range(low, rmax + 1)


# -- term pipeline ------------------------------------------------------------

def _cmd_params(args) -> int:
    sp = structural_params(_load_term(args.term))
    _emit(f"{sp}\n", args.out)
    return FOUND


def _cmd_curve(args) -> int:
    curve = curves.nonrational_curve(structural_params(_load_term(args.term)))
    rows = [(r, curves.dmin(curve, r))
            for r in _order_window(args.rmin, args.rmax, curve)]
    _emit(termio.curve_csv(rows), args.out)
    return FOUND


def _cmd_telescope(args) -> int:
    h = _load_term(args.term)
    mode = args.mode or ("structured" if args.degree is not None else "zeilberger")
    if mode == "structured":
        if args.order is None or args.degree is None:
            raise PreconditionError("structured mode needs --order and --degree")
        pair = telescope.solve_structured(
            h, args.order, args.degree, force=args.force)
        requested = f"order {args.order}, degree {args.degree}"
    else:
        rmax = args.order if args.order is not None else 8
        pair = telescope.solve_zeilberger(
            h, rmax, slack=args.slack, force=args.force)
        requested = f"orders up to {rmax}"
    if pair is None:
        print(f"no telescoper at {requested}", file=sys.stderr)
        return NO_SOLUTION
    _emit(termio.serialize_pair(*pair), args.out)
    return FOUND


def _cmd_region(args) -> int:
    h = _load_term(args.term)

    def progress(r: int, solvable: list[int]) -> None:
        print(f"r={r}: {len(solvable)} solvable degrees", file=sys.stderr)

    marked = telescope.region_scan(
        h, args.rmax, args.dmax, slack=args.slack, force=args.force,
        workers=args.workers, progress=progress)
    rows = [(r, d, (r, d) in marked)
            for r in range(args.rmax + 1) for d in range(args.dmax + 1)]
    _emit(termio.region_csv(rows), args.out)
    return FOUND


def _cmd_verify(args) -> int:
    h = _load_term(args.term)
    tele, cert = termio.parse_pair(_read(args.pair))
    ok = telescope.verify_pair(h, tele, cert)
    _emit("ok\n" if ok else "FAIL\n", args.out)
    return FOUND if ok else NO_SOLUTION


def _cost_setup(args) -> tuple[curves.CostModel, curves.CurveSpec]:
    if args.rational:
        inp = termio.parse_decomp(_read(args.term))
        return curves.cost_model_rational(inp, args.kappa), curves.rational_curve(inp)
    sp = structural_params(_load_term(args.term))
    return curves.cost_model_nonrational(sp, args.kappa), curves.nonrational_curve(sp)


def _cmd_cost(args) -> int:
    model, curve = _cost_setup(args)
    rows = []
    for r in _order_window(args.rmin, args.rmax, curve):
        d = curves.dmin(curve, r)
        rows.append((r, d, curves.cost(model, r, d)))
    _emit(termio.cost_csv(rows), args.out)
    return FOUND


def _cmd_suggest(args) -> int:
    model, curve = _cost_setup(args)
    r, d, c = curves.suggest_order(model, curve, args.rmax)
    _emit(f"r={r} d={d} cost={termio.format_number(c)}\n", args.out)
    return FOUND


# -- rational pipeline --------------------------------------------------------

def _cmd_rat_curve(args) -> int:
    curve = curves.rational_curve(termio.parse_decomp(_read(args.decomp)))
    rows = [(r, curves.dmin(curve, r))
            for r in _order_window(args.rmin, args.rmax, curve)]
    _emit(termio.curve_csv(rows), args.out)
    return FOUND


def _cmd_rat_telescope(args) -> int:
    inp = termio.parse_decomp(_read(args.decomp))
    degree = args.degree
    if degree is None:
        degree = curves.dmin(curves.rational_curve(inp), args.order)
    op = ratcase.solve_rational(inp, args.order, degree)
    if op is None:
        print(f"no telescoper at order {args.order}, degree {degree}",
              file=sys.stderr)
        return NO_SOLUTION
    _emit(termio.serialize_telescoper(op), args.out)
    return FOUND


def _cmd_rat_verify(args) -> int:
    inp = termio.parse_decomp(_read(args.decomp))
    op = termio.parse_telescoper(_read(args.operator))
    ok = ratcase.verify_rational(inp, op)
    _emit("ok\n" if ok else "FAIL\n", args.out)
    return FOUND if ok else NO_SOLUTION


def _cmd_decompose(args) -> int:
    p, q = termio.parse_ratio(_read(args.ratio))
    _emit(termio.serialize_decomp(ratcase.decompose(p, q)), args.out)
    return FOUND


def _cmd_lift(args) -> int:
    op = termio.parse_telescoper(_read(args.operator))
    a = termio.parse_poly(args.a)
    b = termio.parse_poly(args.b)
    _emit(termio.serialize_telescoper(ratcase.lift(op, a, b)), args.out)
    return FOUND


# -- argument wiring ----------------------------------------------------------

def _add_out(sub, *, table: bool = False) -> None:
    flags = ("--out", "--csv") if table else ("--out",)
    sub.add_argument(*flags, dest="out", metavar="PATH",
                     help="write the result here instead of standard output")


def _add_window(sub) -> None:
    sub.add_argument("--rmin", type=int, metavar="R",
                     help="first order (default: the curve's minimal order)")
    sub.add_argument("--rmax", type=int, metavar="R", required=True,
                     help="last order")


def _add_cost_options(sub) -> None:
    sub.add_argument("--kappa", type=_rational_number, default=mpq(1),
                     metavar="P/Q", help="cost scale factor (default 1)")
    sub.add_argument("--rational", action="store_true",
                     help="treat the input as a decomposition file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypertel",
        description="Telescopers for proper hypergeometric terms: structural "
                    "parameters, order-degree curves, solvers, and verifiers.")
    commands = parser.add_subparsers(dest="command", required=True,
                                     metavar="COMMAND")

    sub = commands.add_parser("params", help="print the structural parameters")
    sub.add_argument("term", help="term file")
    _add_out(sub)
    sub.set_defaults(func=_cmd_params)

    sub = commands.add_parser("curve", help="tabulate the order-degree curve")
    sub.add_argument("term", help="term file")
    _add_window(sub)
    _add_out(sub, table=True)
    sub.set_defaults(func=_cmd_curve)

    sub = commands.add_parser("telescope", help="search for a telescoper")
    sub.add_argument("term", help="term file")
    sub.add_argument("--order", type=int, metavar="R",
                     help="target order (zeilberger mode: highest order tried)")
    sub.add_argument("--degree", type=int, metavar="D",
                     help="coefficient degree cap (selects structured mode)")
    sub.add_argument("--mode", choices=("structured", "zeilberger"),
                     help="override the solver choice")
    sub.add_argument("--slack", type=int, default=2, metavar="S",
                     help="extra certificate degree in zeilberger mode")
    sub.add_argument("--force", action="store_true",
                     help="run even on terms the rational pipeline handles")
    _add_out(sub)
    sub.set_defaults(func=_cmd_telescope)

    sub = commands.add_parser("region",
                              help="map solvable (order, degree) cells")
    sub.add_argument("term", help="term file")
    sub.add_argument("--rmax", type=int, required=True, metavar="R")
    sub.add_argument("--dmax", type=int, required=True, metavar="D")
    sub.add_argument("--slack", type=int, default=2, metavar="S",
                     help="extra degree allowed in direct solves")
    sub.add_argument("--force", action="store_true",
                     help="run even on terms the rational pipeline handles")
    sub.add_argument("--workers", type=int, metavar="N",
                     help="parallel workers (default: HYPERTEL_WORKERS or "
                          "the machine's parallelism)")
    _add_out(sub, table=True)
    sub.set_defaults(func=_cmd_region)

    sub = commands.add_parser("verify",
                              help="check an operator/certificate pair")
    sub.add_argument("term", help="term file")
    sub.add_argument("pair", help="operator plus certificate file")
    _add_out(sub)
    sub.set_defaults(func=_cmd_verify)

    sub = commands.add_parser("cost", help="tabulate predicted solving cost")
    sub.add_argument("term", help="term file (decomposition with --rational)")
    _add_window(sub)
    _add_cost_options(sub)
    _add_out(sub, table=True)
    sub.set_defaults(func=_cmd_cost)

    sub = commands.add_parser("suggest",
                              help="pick the cheapest certified order")
    sub.add_argument("term", help="term file (decomposition with --rational)")
    sub.add_argument("--rmax", type=int, required=True, metavar="R",
                     help="highest order considered")
    _add_cost_options(sub)
    _add_out(sub)
    sub.set_defaults(func=_cmd_suggest)

    sub = commands.add_parser("rat-curve",
                              help="order-degree curve of a decomposition")
    sub.add_argument("decomp", help="decomposition file")
    _add_window(sub)
    _add_out(sub, table=True)
    sub.set_defaults(func=_cmd_rat_curve)

    sub = commands.add_parser("rat-telescope",
                              help="solve the rational-input case")
    sub.add_argument("decomp", help="decomposition file")
    sub.add_argument("--order", type=int, required=True, metavar="R")
    sub.add_argument("--degree", type=int, metavar="D",
                     help="coefficient degree cap (default: the curve's "
                          "minimal certified degree)")
    _add_out(sub)
    sub.set_defaults(func=_cmd_rat_telescope)

    sub = commands.add_parser("rat-verify",
                              help="check an operator against a decomposition")
    sub.add_argument("decomp", help="decomposition file")
    sub.add_argument("operator", help="operator file")
    _add_out(sub)
    sub.set_defaults(func=_cmd_rat_verify)

    sub = commands.add_parser("decompose",
                              help="split a rational function into parts")
    sub.add_argument("ratio", help="rational function file (p and q lines)")
    _add_out(sub)
    sub.set_defaults(func=_cmd_decompose)

    sub = commands.add_parser("lift",
                              help="transport an operator across a rational "
                                   "ratio change")
    sub.add_argument("operator", help="operator file")
    sub.add_argument("--a", required=True, metavar="POLY",
                     help="numerator of the ratio change, a polynomial in n")
    sub.add_argument("--b", required=True, metavar="POLY",
                     help="denominator of the ratio change, a polynomial in n")
    _add_out(sub)
    sub.set_defaults(func=_cmd_lift)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HypertelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
