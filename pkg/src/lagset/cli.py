"""Command-line front end.

Exit codes: 0 pass, 1 verification mismatch, 2 infeasible or degenerate
input, 3 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .plant import PlantError
from .polytope import PolytopeError
from .recursion import StepError
from .oracle import OracleInfeasible
from .scalar import EXACT, get_backend
from .serialize import dumps, load_plant, polytope_from_dict

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_measurements(path):
    if path is None:
        return None
    text = Path(path).read_text()
    try:
        values = json.loads(text)
    except json.JSONDecodeError:
        values = text.split()
    return [EXACT.convert(str(v)) for v in values]


def _load_initial(path, backend):
    if path is None:
        return None
    with open(path) as fh:
        return polytope_from_dict(json.load(fh), get_backend(backend))


def _scenario(args) -> harness.Scenario:
    p = load_plant(args.plant)
    x0 = None
    if getattr(args, "x0", None):
        x0 = tuple(EXACT.convert(c) for c in args.x0.split(","))
    return harness.Scenario(
        p,
        args.steps,
        seed=args.seed,
        x0=x0,
        mode=getattr(args, "mode", "ptu"),
        backend=getattr(args, "backend", "exact"),
        measurements=_load_measurements(getattr(args, "measurements", None)),
        initial=_load_initial(getattr(args, "initial", None), getattr(args, "backend", "exact")),
    )


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    trace = harness.simulate(sc, out=args.out, timing=args.timing)
    if args.out is None:
        print(trace.to_json())
    else:
        last = trace.entries[-1]
        print(f"{len(trace.entries)} steps written to {args.out}; "
              f"final set has {last['n_f_final']} facets, {last['n_v_final']} vertices")
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _scenario(args)
    summary = harness.verify(sc, fault=args.fault)
    print(summary)
    if not summary.ok:
        if summary.dumps:
            print(dumps(summary.dumps))
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_bench(args) -> int:
    records = harness.bench(args.order, args.steps, args.repeats, args.seed,
                            mode=args.mode, workers=args.workers)
    text = harness.bench_csv(records, args.csv)
    if args.csv is None:
        print(text, end="")
    summary = harness.timing_summary(records, args.threshold)
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def cmd_example(args) -> int:
    print(harness.example(args.name))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lagset", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def scenario_args(sp, with_mode=True):
        sp.add_argument("--plant", required=True, help='JSON file {"n": [...], "d": [...]}')
        sp.add_argument("--steps", type=int, required=True)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--x0", help="comma separated initial state (default 0)")
        sp.add_argument("--measurements", help="file of measurements to replay (JSON list or whitespace separated)")
        sp.add_argument("--initial", help="polytope JSON for the initial set (default: the point x0)")
        if with_mode:
            sp.add_argument("--mode", choices=["utp", "ptu"], default="ptu")

    sp = sub.add_parser("simulate", help="run the recursion on a simulated trajectory")
    scenario_args(sp)
    sp.add_argument("--backend", choices=["exact", "float"], default="exact")
    sp.add_argument("--out", help="trace file (default: stdout)")
    sp.add_argument("--timing", action="store_true", help="include step durations in the trace")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="check every step against the projection oracle")
    scenario_args(sp)
    sp.add_argument("--fault", choices=["skip-ridges"], help="inject a known fault")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="time incidence updates against the oracle")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--repeats", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mode", choices=["utp", "ptu"], default="ptu")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--threshold", type=int, default=50, help="facet count for the summary")
    sp.add_argument("--csv", help="output CSV (default: stdout)")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("example", help="print a worked example")
    sp.add_argument("name", help="fig1, square or diamond")
    sp.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        if getattr(args, "steps", 1) < 1 or getattr(args, "repeats", 1) < 1:
            raise UsageError("--steps and --repeats must be positive")
        if getattr(args, "order", 1) < 1:
            raise UsageError("--order must be positive")
        return args.func(args)
    except (UsageError, harness.UnknownExample) as exc:
        print(f"lagset: error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_USAGE
    except (harness.ContainmentViolation, harness.VerificationMismatch) as exc:
        print(f"lagset: mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (StepError, OracleInfeasible, PlantError, PolytopeError) as exc:
        print(f"lagset: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"lagset: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
