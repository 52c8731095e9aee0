"""Command-line entry point: ``fibcubes <subcommand> [options]``.

Every run prints a manifest line first, then JSON lines (or TSV for
``search --format tsv``). Exit codes: 0 success, 1 computation or
verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime
import json
import random
import sys
from fractions import Fraction
from typing import Optional

from . import __version__
from . import ballreal as br
from . import linforms as lf
from .ballreal import BallReal, ConstantId, escalate
from .collision_search import SearchConfig, search
from .contfrac import expand
from .errors import FibCubesError, StageError
from .expr import evaluate
from .recurrence_core import SequenceKind, fib_cube_via_identity, lucas_cube_via_identity, seq_value

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TRIVIAL_FIB_PAIRS = {((1, 1), (2, 1)), ((1, 1), (2, 2))}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ball_json(x: BallReal, digits: int = 30) -> dict:
    return {"mid": x.to_decimal(digits), "rad": br.format_fraction(x.rad_fraction(), 3)}


def _emit(out, obj) -> None:
    out.write(json.dumps(obj, sort_keys=False) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fibcubes", description=__doc__.splitlines()[0])
    parser.add_argument("--bits", type=int, default=None,
                        help="initial ball precision in bits (default 256, or $FIBCUBES_BITS)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("search", help="exhaustive two-way power-sum collision search")
    p.add_argument("--sequence", choices=["fib", "lucas", "naturals"], required=True)
    p.add_argument("--exponent", type=int, default=3)
    p.add_argument("--max-first", type=int, default=162, help="bound on k in the pair (k, l)")
    p.add_argument("--max-second", type=int, default=171, help="bound on m in the pair (m, n)")
    p.add_argument("--allow-zero-index", action="store_true", help="include index 0")
    p.add_argument("--format", choices=["json", "tsv"], default="json")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")

    p = sub.add_parser("cf", help="continued fraction of a constant or expression")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--constant", choices=[c.value for c in ConstantId])
    g.add_argument("--expr", help="expression, e.g. 'log(alpha)/log(5)'")
    p.add_argument("--max-q", type=int, default=None, help="stop at the first q_j >= MAX_Q")
    p.add_argument("--terms", type=int, default=None, help="number of partial quotients")

    p = sub.add_parser("matveev", help="Matveev lower-bound coefficient")
    p.add_argument("--form", choices=["lambda1", "lambda2"], help="use the built-in instance")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--a-values", nargs="+", help="explicit A_j expressions (generic instance)")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--max-b", type=int, default=1, help="max |b_j| for the generic instance")

    p = sub.add_parser("solve-bound", help="largest x with x < coeff*(1+log(scale*x))^power")
    p.add_argument("--coeff", required=True)
    p.add_argument("--scale", default="1")
    p.add_argument("--power", type=int, choices=[0, 1, 2], default=1)

    p = sub.add_parser("reduce", help="Dujella-Pethö reduction (fixture or live mode)")
    p.add_argument("--fixture-q", type=int, help="convergent denominator to use directly")
    p.add_argument("--fixture-eps", help="epsilon to use directly")
    p.add_argument("--tau-expr")
    p.add_argument("--mu-expr")
    p.add_argument("--a", dest="a_coeff", required=True, help="constant A")
    p.add_argument("--b", dest="b_base", default="alpha", help="base B (default alpha)")
    p.add_argument("--cap", type=Fraction, default=Fraction(lf.REDUCTION_CAP), help="M")
    p.add_argument("--max-attempts", type=int, default=30)

    p = sub.add_parser("verify", help="certified checks of the inequality chain and identities")
    p.add_argument("--check", choices=["a1", "a6", "a7"], required=True)
    p.add_argument("--n-max", type=int, default=2000)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("prove", help="run the whole pipeline and check the theorem")
    p.add_argument("--target", choices=["fibonacci", "lucas"], required=True)
    p.add_argument("--max-first", type=int, default=None, help="override the k search bound")
    p.add_argument("--max-second", type=int, default=None, help="override the m search bound")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _manifest(args: argparse.Namespace, bits: int) -> dict:
    flags = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items())}
    return {
        "manifest": {
            "subcommand": args.command,
            "args": flags,
            "bits": bits,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "version": __version__,
        }
    }


# ---- subcommands ----------------------------------------------------------------

def cmd_search(args, bits, out) -> int:
    kind = SequenceKind.parse(args.sequence)
    config = SearchConfig(kind, args.exponent, args.max_first, args.max_second,
                          0 if args.allow_zero_index else 1)
    records = search(config, workers=args.workers)
    if args.format == "tsv":
        out.write("value\tk\tl\tm\tn\ttrivial\n")
        for r in records:
            out.write(f"{r.value}\t{r.pair_a[0]}\t{r.pair_a[1]}\t{r.pair_b[0]}\t{r.pair_b[1]}\t{str(r.trivial).lower()}\n")
    else:
        for r in records:
            _emit(out, r.to_json())
        _emit(out, {"summary": {"records": len(records), "nontrivial": sum(not r.trivial for r in records)}})
    return EXIT_OK


def cmd_cf(args, bits, out) -> int:
    if args.max_q is None and args.terms is None:
        raise ValueError("give --max-q or --terms")
    text = args.expr if args.expr else args.constant

    def run(b):
        x = br.constant(ConstantId(args.constant), b) if args.constant else evaluate(text, b)
        stop = (lambda q: q >= args.max_q) if args.max_q is not None else None
        return expand(x, stop=stop, max_terms=args.terms)

    cf = escalate(run, bits)
    for j, (a, (p, q)) in enumerate(zip(cf.quotients, cf.convergents)):
        _emit(out, {"j": j, "a": str(a), "p": str(p), "q": str(q)})
    _emit(out, {"summary": {"terms": len(cf.quotients), "terminated": cf.terminated}})
    return EXIT_OK


def cmd_matveev(args, bits, out) -> int:
    if args.form == "lambda1":
        inst = lf.lambda1_instance(args.k, args.m, bits)
    elif args.form == "lambda2":
        inst = lf.lambda2_instance(args.m, bits)
    elif args.a_values:
        a_vals = tuple(evaluate(t, bits) for t in args.a_values)
        inst = lf.MatveevInstance(len(a_vals), args.degree, a_vals, args.max_b)
    else:
        raise ValueError("give --form or --a-values")
    c = lf.matveev_coefficient(inst, bits)
    _emit(out, {
        "l": inst.l, "degree": inst.degree, "max_abs_b": str(inst.max_abs_b),
        "coefficient": _ball_json(c), "log_lower_bound": _ball_json(lf.matveev_log_lower_bound(inst, bits)),
    })
    return EXIT_OK


def cmd_solve_bound(args, bits, out) -> int:
    x = lf.solve_log_bound(evaluate(args.coeff, bits), evaluate(args.scale, bits), args.power, bits)
    _emit(out, {"bound": str(x)})
    return EXIT_OK


def cmd_reduce(args, bits, out) -> int:
    if args.fixture_q is not None:
        if args.fixture_eps is None:
            raise ValueError("--fixture-q needs --fixture-eps")
        outcome = escalate(lambda b: lf.reduce_fixture(
            args.fixture_q, evaluate(args.fixture_eps, b), evaluate(args.a_coeff, b),
            evaluate(args.b_base, b), bits=b), bits)
        mode = "fixture"
    elif args.tau_expr and args.mu_expr:
        cap = int(args.cap)
        outcome = escalate(lambda b: lf.dujella_petho_reduce(lf.ReductionInstance(
            evaluate(args.tau_expr, b), evaluate(args.mu_expr, b), evaluate(args.a_coeff, b),
            evaluate(args.b_base, b), cap), args.max_attempts), bits)
        mode = "live"
    else:
        raise ValueError("give --fixture-q/--fixture-eps or --tau-expr/--mu-expr")
    _emit(out, {"mode": mode, "q_used": str(outcome.q_used), "epsilon": _ball_json(outcome.epsilon, 12),
                "bound": outcome.bound, "convergent_index": outcome.convergent_index})
    return EXIT_OK


def _a6_direct(k, l, m, n) -> bool:
    conditions = [k >= l, m >= n, m > k, l - 1 <= m, n - 1 <= k, m < 3 * k]
    return all(conditions)


def cmd_verify(args, bits, out) -> int:
    if args.check == "a1":
        rep = lf.verify_fib_bounds(args.n_max, bits)
        _emit(out, {"check": "a1", "passed": True, "lower_range": list(rep.lower_checked),
                    "upper_range": list(rep.upper_checked),
                    "exact_resolutions": [list(x) for x in rep.exact_resolutions],
                    "n0_lower_holds": rep.n0_lower_holds})
        return EXIT_OK
    if args.check == "a6":
        rng = random.Random(args.seed)
        mismatches = 0
        for _ in range(args.samples):
            q = [rng.randint(1, 60) for _ in range(4)]
            mismatches += lf.constraint_filter(*q) != _a6_direct(*q)
        # every Fibonacci collision in a small box must pass the filter
        box = min(args.n_max, 60)
        recs = search(SearchConfig(SequenceKind.FIBONACCI, 3, box, box))
        unfiltered = [r.to_json() for r in recs if not lf.constraint_filter(*r.pair_a, *r.pair_b)]
        ok = mismatches == 0 and not unfiltered
        _emit(out, {"check": "a6", "passed": ok, "samples": args.samples, "mismatches": mismatches,
                    "collisions_checked": len(recs), "collisions_failing_filter": unfiltered})
        return EXIT_OK if ok else EXIT_FAIL
    bad = []
    for n in range(1, args.n_max + 1):
        if fib_cube_via_identity(n) != seq_value(SequenceKind.FIBONACCI, n) ** 3:
            bad.append(("fib", n))
        if lucas_cube_via_identity(n) != seq_value(SequenceKind.LUCAS, n) ** 3:
            bad.append(("lucas", n))
    _emit(out, {"check": "a7", "passed": not bad, "n_max": args.n_max, "failures": bad})
    return EXIT_OK if not bad else EXIT_FAIL


def run_proof(target: str, bits: int, max_first: Optional[int] = None,
              max_second: Optional[int] = None, workers: int = 1) -> tuple[bool, list[dict]]:
    """Run the bound chain, the reductions and the final search. Returns (verdict, report lines)."""
    lines = []
    chain = lf.pipeline_bounds(bits=bits)
    lines.append({"stage": "matveev", "c_lambda1": _ball_json(chain.c_lambda1, 12),
                  "c_lambda2": _ball_json(chain.c_lambda2, 12)})
    lines.append({"stage": "absolute_bounds", "m_coeff": _ball_json(chain.m_coeff, 12),
                  "k_coeff": _ball_json(chain.k_coeff, 12), "min_index": chain.min_index,
                  "combined_bound": str(chain.combined_bound),
                  "published_combined_bound": str(chain.published_combined_bound)})
    cap = lf.REDUCTION_CAP
    if max(chain.combined_bound, chain.published_combined_bound) > cap:
        raise StageError(f"reduction cap {cap} does not dominate the absolute bound")

    red_m = lf.reduce_fixture(lf.M_REDUCTION["q"], lf.M_REDUCTION["epsilon"], lf.M_REDUCTION["a_coeff"],
                              cap=cap, bits=bits)
    red_k = lf.reduce_fixture(lf.K_REDUCTION["q"], lf.K_REDUCTION["epsilon"], lf.K_REDUCTION["a_coeff"],
                              cap=cap, bits=bits)
    lines.append({"stage": "reduction", "cap": str(cap), "m_bound": red_m.bound, "k_bound": red_k.bound,
                  "q_m": str(red_m.q_used), "q_k": str(red_k.q_used)})

    box_first = red_k.bound if max_first is None else max_first
    box_second = red_m.bound if max_second is None else max_second
    if box_first < red_k.bound or box_second < red_m.bound:
        raise StageError(f"search box (k <= {box_first}, m <= {box_second}) does not cover "
                         f"the reduced bounds (k <= {red_k.bound}, m <= {red_m.bound})")
    kind = SequenceKind.FIBONACCI if target == "fibonacci" else SequenceKind.LUCAS
    records = search(SearchConfig(kind, 3, box_first, box_second), workers=workers)
    lines.append({"stage": "search", "sequence": kind.value, "max_first": box_first,
                  "max_second": box_second, "collisions": [r.to_json() for r in records]})

    if kind is SequenceKind.FIBONACCI:
        found = {(r.pair_a, r.pair_b) for r in records}
        ok = found == TRIVIAL_FIB_PAIRS and all(r.trivial and r.value == 2 for r in records)
        expected = "only the trivial tuples (1,1,2,1) and (1,1,2,2), value 2"
    else:
        ok = not records
        expected = "no collisions"
    lines.append({"verdict": {"target": target, "matches_theorem": ok, "expected": expected}})
    return ok, lines


def cmd_prove(args, bits, out) -> int:
    ok, lines = run_proof(args.target, bits, args.max_first, args.max_second, args.workers)
    for line in lines:
        _emit(out, line)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "search": cmd_search,
    "cf": cmd_cf,
    "matveev": cmd_matveev,
    "solve-bound": cmd_solve_bound,
    "reduce": cmd_reduce,
    "verify": cmd_verify,
    "prove": cmd_prove,
}


def main(argv: Optional[list[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    bits = args.bits or br.default_bits()
    if bits < 64:
        print("fibcubes: error: --bits must be >= 64", file=sys.stderr)
        return EXIT_USAGE
    _emit(out, _manifest(args, bits))
    try:
        return COMMANDS[args.command](args, bits, out)
    except (FibCubesError, ValueError, ZeroDivisionError) as exc:
        print(f"fibcubes: {type(exc).__name__}: {exc}", file=sys.stderr)
        _emit(out, {"error": {"type": type(exc).__name__, "message": str(exc)}})
        return EXIT_FAIL


def entry() -> None:
    sys.exit(main())
