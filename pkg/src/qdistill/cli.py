"""Command-line front end: ``qdistill classify|distill|sweep|gen``.

Exit codes: 0 success, 1 other numerical failure, 2 unreadable or
malformed input, 3 matrix is not a density matrix, 4 state is in the
wrong class for the requested protocol, 5 generator could not satisfy
the recipe.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .classify import DEFAULT_TOL, StateClass, classify_state
from .distill import (SCHEDULES, apply_filter, bell_diagonalize, protocol_filter,
                      protocol_for, simulate_protocol)
from .entanglement import TOL_BELL, concurrence, eof, marginal_deviation
from .errors import InvalidState, QDistillError, RecipeUnsatisfiable, WrongClass
from .oracle import StateRecipe, random_state

EXIT_OK, EXIT_FAILURE, EXIT_PARSE, EXIT_INVALID, EXIT_WRONG_CLASS, EXIT_RECIPE = 0, 1, 2, 3, 4, 5

CLASS_ALIASES = {
    "separable": StateClass.SEPARABLE,
    "belldiagonal": StateClass.BELL_DIAGONAL,
    "pure": StateClass.PURE_DISTILLABLE,
    "incompletely-distillable": StateClass.INCOMPLETELY_DISTILLABLE,
    "incompletely-quasi": StateClass.INCOMPLETELY_QUASI_DISTILLABLE,
    "quasi": StateClass.QUASI_DISTILLABLE,
}
CLASS_ALIASES.update({c.value.lower(): c for c in StateClass})

PROTOCOLS = ("auto", "t1", "t2", "t3", "belldiag", "pure")
PROTOCOL_HELP = ("auto picks by class; t1: limit filters for rank-2 states with one support "
                 "product vector; t2: limit filters for rank-3 states with a product kernel; "
                 "t3: one-shot filter for rank-2 states with two support product vectors; "
                 "belldiag: marginal balancing; pure: Schmidt balancing")


def parse_class(name: str) -> StateClass:
    try:
        return CLASS_ALIASES[name.lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown class {name!r}; choose from {', '.join(sorted(CLASS_ALIASES))}") from None


def _matrix_text(m) -> str:
    return np.array2string(np.asarray(m), precision=6, suppress_small=True)


def _yes(flag: bool) -> str:
    return "attained" if flag else "not attained (limit only)"


def cmd_classify(args) -> int:
    rho = io.read_state(args.path)
    c = classify_state(rho, tol=args.tol, bell_tol=args.bell_tol)
    if args.json:
        print(json.dumps(c.to_dict(), indent=2))
        return EXIT_OK
    print(f"{c.class_tag.value}, M={c.m_rho:.6g}, {_yes(c.attained)}")
    print(f"rank:         {c.rank}")
    print(f"face:         {c.face.subcase.value}")
    print(f"concurrence:  {c.concurrence:.12g}")
    print(f"eof:          {c.eof:.12g}")
    print(f"c_max:        {c.c_max:.12g}")
    print(f"M_rho:        {c.m_rho:.12g}")
    return EXIT_OK


def cmd_distill(args) -> int:
    rho = io.read_state(args.path)
    protocol = protocol_for(rho) if args.protocol == "auto" else args.protocol
    if protocol == "belldiag":
        f = bell_diagonalize(rho, max_iter=args.max_iter, tol=args.tol)[0]
    else:
        f = protocol_filter(rho, protocol, args.n)
    out = apply_filter(rho, f)
    c = concurrence(out.state)
    report = {
        "protocol": protocol,
        "n": args.n,
        "probability": out.probability,
        "concurrence": c,
        "eof": eof(c),
        "marginal_deviation": marginal_deviation(out.state),
    }
    if args.json:
        norm = f.normalized()
        report["filter_a"] = [[[z.real, z.imag] for z in row] for row in norm.a]
        report["filter_b"] = [[[z.real, z.imag] for z in row] for row in norm.b]
        print(json.dumps(report, indent=2))
    else:
        norm = f.normalized()
        print(f"protocol:     {protocol}")
        print("filter A:\n" + _matrix_text(norm.a))
        print("filter B:\n" + _matrix_text(norm.b))
        for key in ("probability", "concurrence", "eof", "marginal_deviation"):
            print(f"{key + ':':<20}{report[key]:.12g}")
    if args.out:
        io.write_state(args.out, out.state)
    return EXIT_OK


def cmd_sweep(args) -> int:
    rho = io.read_state(args.path)
    trace = simulate_protocol(rho, n_max=args.n_max, schedule=args.schedule)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            io.write_sweep(fh, trace.steps)
    else:
        io.write_sweep(sys.stdout, trace.steps)
    return EXIT_OK


def cmd_gen(args) -> int:
    rho = random_state(StateRecipe(args.state_class, rank=args.rank, seed=args.seed,
                                   spread=args.spread, margin=args.margin))
    text = io.format_state(rho)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = argparse.ArgumentParser(prog="qdistill", formatter_class=fmt,
                                 description="Single-copy entanglement distillation of two-qubit "
                                             "states by local filtering.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", formatter_class=fmt, help="classify a state file")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="rank, product-vector and entanglement tolerance")
    p.add_argument("--bell-tol", type=float, default=TOL_BELL,
                   help="marginal tolerance for the Bell-diagonal test")
    p.add_argument("--json", action="store_true", help="emit the classification as JSON")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("distill", formatter_class=fmt, help="apply a distillation protocol")
    p.add_argument("path")
    p.add_argument("--protocol", choices=PROTOCOLS, default="auto", help=PROTOCOL_HELP)
    p.add_argument("--n", type=int, default=1000, help="sequence index for limit protocols")
    p.add_argument("--tol", type=float, default=1e-9, help="marginal tolerance for belldiag")
    p.add_argument("--max-iter", type=int, default=200, help="iteration cap for belldiag")
    p.add_argument("--out", help="write the filtered state to this file")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("sweep", formatter_class=fmt, help="tabulate a protocol as CSV")
    p.add_argument("path")
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--schedule", choices=sorted(SCHEDULES), default="geometric")
    p.add_argument("--out", help="CSV output file (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", formatter_class=fmt, help="generate a random state of a given class")
    p.add_argument("--class", dest="state_class", type=parse_class, required=True,
                   help="one of: " + ", ".join(sorted(CLASS_ALIASES)))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--spread", type=float, default=1.0, help="Dirichlet concentration of weights")
    p.add_argument("--margin", type=float, default=1e-3, help="distance from class boundaries")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except io.StateFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidState as exc:
        print(f"error: invalid state: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except WrongClass as exc:
        actual = exc.actual.value if exc.actual is not None else "unknown"
        print(f"error: wrong class ({actual}): {exc}", file=sys.stderr)
        return EXIT_WRONG_CLASS
    except RecipeUnsatisfiable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RECIPE
    except QDistillError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
