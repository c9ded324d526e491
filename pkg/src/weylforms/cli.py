"""Command-line interface: count, expsum, weyl, invariants, predict, corpus.

Every subcommand prints one JSON report on stdout.  Exit codes: 0 success,
1 bad input, 2 a mathematical assertion failed, 3 an interval comparison could
not be decided at the working precision.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence

import jsonschema

from . import _numeric as nm
from .circle import predict_and_verify, singular_series_term
from .counting import count_solutions, write_series_csv
from .exact import left_kernel_check
from .forms import (Box, FormSystem, FormSyntaxError, bilinear_family, parse_form,
                    parse_fraction, read_system)
from .invariants import DEFAULT_PRIMES, check_theorem_conditions, h_invariant_bounds
from .weyl import (MajorArc, RankDeficient, build_psi, exponential_sum,
                   major_arc_approximation, run_dichotomy)

EXIT_OK, EXIT_INPUT, EXIT_ASSERTION, EXIT_PRECISION = 0, 1, 2, 3

ANCHORS = {
    "count": "N(P) = #{x in Z^n : x in P*B, f_1(x) = ... = f_r(x) = 0}",
    "expsum": "S(alpha) = sum_{x in P*B} e(alpha_1 f_1(x) + ... + alpha_r f_r(x))",
    "weyl_alternatives": "|S(alpha)| < P^(n-k)  or  #{near tuples} >= P^((d-1)n*theta - 2^(d-1)k)",
    "weyl_major_arc": "1 <= q << P^(r(d-1)theta),  |q alpha_i - a_i| << P^(-d + r(d-1)theta)",
    "weyl_rank_deficient": "b^T psi = 0 with b primitive: rank psi < r",
    "weyl_minor": "|S(alpha)| << P^(n - 2^(1-d) g theta + eps)",
    "invariants_pencil": "n - max_b dim Sing(f_b) > r(r+1)(d-1)2^(d-1)",
    "invariants_h": "min_b h(f_b) > phi(d) r(r+1)(d-1)2^(d-1)",
    "invariants_rank": "d = 2: min_b rank(f_b) > 2r(r+1)",
    "invariants_g": "inf_b g(f_b) > r(r+1)(d-1)2^(d-1)",
    "invariants_v_star": "V* = {x : rank (d f_i / d x_j) < r},  u <= dim V*",
    "predict": "N(P) = S J P^(n-rd) + O(P^(n-rd-delta))",
}

SCHEMA = json.loads(resources.files("weylforms").joinpath("report_schema.json").read_text())


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # keep exit code 2 reserved for mathematical assertion failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def split_top_level(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return _jsonable(v.item())
    return v


def validate_report(report: dict) -> None:
    jsonschema.validate(report, SCHEMA)


# argument handling ----------------------------------------------------------

def _load_system(args) -> FormSystem:
    if args.system is None:
        raise InputError("--system is required for this subcommand")
    try:
        return read_system(args.system)
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _box(args, n: int) -> Box:
    return Box.parse(args.box, n)


def _P_values(args) -> list[Fraction]:
    if not args.P:
        raise InputError("at least one --P is required")
    out = []
    for text in args.P:
        P = parse_fraction(text)
        if P <= 0:
            raise InputError("P must be positive")
        out.append(P)
    return out


def _alpha(args, r: int) -> list:
    if not args.alpha:
        raise InputError("--alpha is required")
    parts = [p for a in args.alpha for p in split_top_level(a)]
    if len(parts) != r:
        raise InputError(f"expected {r} alpha components, got {len(parts)}")
    return parts


def _primes(args) -> tuple[int, ...]:
    if args.primes is None:
        return DEFAULT_PRIMES
    return tuple(int(p) for p in split_top_level(args.primes))


def _config(args, system: Optional[FormSystem], box: Optional[Box]) -> dict:
    cfg = {"system_file": args.system, "system": None if system is None else str(system),
           "box": [] if box is None else box.to_strings(), "seed": args.seed,
           "workers": args.workers}
    for key in ("P", "alpha", "theta", "k", "precision_bits", "column_cap", "b_bound",
                "primes", "trials", "exact_threshold", "qmax", "tmax", "grid"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


# subcommands ----------------------------------------------------------------

def cmd_count(args) -> tuple[dict, dict, list]:
    system = _load_system(args)
    box = _box(args, system.n_vars)
    results = []
    for P in _P_values(args):
        res = count_solutions(system, box, P, workers=args.workers)
        results.append({"P": P, "count": res.count, "points_enumerated": res.points_enumerated})
    if args.csv:
        write_series_csv(args.csv, ["P", "N"], [(str(r["P"]), r["count"]) for r in results])
    return ({"results": results}, {"count": ANCHORS["count"]}, [system, box])


def cmd_expsum(args):
    system = _load_system(args)
    box = _box(args, system.n_vars)
    alpha = _alpha(args, system.r)
    results = []
    for P in _P_values(args):
        S = exponential_sum(system, alpha, box, P, precision_bits=args.precision_bits)
        results.append({"P": P, "S": S, "abs_S": abs(S)})
    if args.csv:
        write_series_csv(args.csv, ["P", "re", "im", "abs"],
                         [(str(r["P"]), r["S"].real, r["S"].imag, r["abs_S"]) for r in results])
    return ({"alpha": alpha, "results": results}, {"S": ANCHORS["expsum"]}, [system, box])


def _check_outcome(system: FormSystem, alpha, theta, P, outcome, args) -> None:
    """Re-verify outcome certificates independently of how they were produced."""
    if isinstance(outcome, RankDeficient):
        psi = build_psi(system, alpha, theta, P, column_cap=args.column_cap,
                        precision_bits=args.precision_bits)
        if not left_kernel_check(outcome.b, psi.entries):
            raise AssertionError("rank-deficiency certificate b fails b^T psi = 0")
    if isinstance(outcome, MajorArc):
        if math.gcd(outcome.q, *outcome.a) != 1:
            raise AssertionError("major-arc output is not reduced")


def cmd_weyl(args):
    system = _load_system(args)
    box = _box(args, system.n_vars)
    alpha = _alpha(args, system.r)
    theta = parse_fraction(args.theta)
    if not 0 < theta <= 1:
        raise InputError("theta must lie in (0, 1]")
    runs = []
    for P in _P_values(args):
        if args.k is None:
            outcome = major_arc_approximation(system, alpha, theta, P,
                                              column_cap=args.column_cap,
                                              precision_bits=args.precision_bits)
            S = exponential_sum(system, alpha, box, P, precision_bits=args.precision_bits)
            run = {"P": P, "abs_S": abs(S), "alternatives": None, "outcome": outcome.to_dict()}
        else:
            rep = run_dichotomy(system, alpha, theta, box, P, parse_fraction(args.k),
                                column_cap=args.column_cap, precision_bits=args.precision_bits)
            outcome = rep.outcome
            run = {"P": P, **rep.to_dict()}
        _check_outcome(system, alpha, theta, P, outcome, args)
        runs.append(run)
    prov = {"alternatives": ANCHORS["weyl_alternatives"], "MajorArc": ANCHORS["weyl_major_arc"],
            "RankDeficient": ANCHORS["weyl_rank_deficient"],
            "MinorArcEvidence": ANCHORS["weyl_minor"], "abs_S": ANCHORS["expsum"]}
    return ({"alpha": alpha, "theta": theta, "runs": runs}, prov, [system, box])


def cmd_invariants(args):
    system = _load_system(args)
    rep = check_theorem_conditions(system, args.b_bound, _primes(args), trials=args.trials,
                                   exact_threshold=args.exact_threshold, seed=args.seed)
    prov = {"pencil_singularity": ANCHORS["invariants_pencil"],
            "h_invariant": ANCHORS["invariants_h"], "g_invariant": ANCHORS["invariants_g"],
            "dim_V_star": ANCHORS["invariants_v_star"]}
    if system.degree == 2:
        prov["quadratic_rank"] = ANCHORS["invariants_rank"]
    return (rep.to_dict(), prov, [system, None])


def cmd_predict(args):
    system = _load_system(args)
    box = _box(args, system.n_vars)
    rep = predict_and_verify(system, box, _P_values(args), args.qmax, args.tmax,
                             grid=args.grid, workers=args.workers)
    if args.csv:
        write_series_csv(args.csv, ["P", "N", "prediction", "ratio"],
                         [(str(P), N, pred, ratio) for P, N, pred, ratio in rep.rows])
    return (rep.to_dict(), {"prediction": ANCHORS["predict"], "N": ANCHORS["count"]},
            [system, box])


def cmd_corpus(args):
    fixtures = run_corpus(workers=args.workers, seed=args.seed)
    failed = [f["name"] for f in fixtures if not f["passed"]]
    payload = {"fixtures": fixtures, "passed": len(fixtures) - len(failed), "failed": failed}
    prov = {"count": ANCHORS["count"], "MajorArc": ANCHORS["weyl_major_arc"],
            "RankDeficient": ANCHORS["weyl_rank_deficient"],
            "dim_V_star": ANCHORS["invariants_v_star"],
            "pencil_singularity": ANCHORS["invariants_pencil"]}
    return (payload, prov, [None, None])


# regression corpus ----------------------------------------------------------

def _sys(*texts: str, n: int) -> FormSystem:
    return FormSystem([parse_form(t, n) for t in texts])


def _fixture(name, expected, observed):
    return {"name": name, "expected": _jsonable(expected), "observed": _jsonable(observed),
            "passed": _jsonable(expected) == _jsonable(observed)}


def _exponent_audit(outcome) -> bool:
    # log_P q <= r(d-1)theta + 1 and log_P err <= -d + r(d-1)theta + 1
    return outcome.c_q <= 1 and outcome.c_err <= 1


def corpus_weyl_cases():
    """(name, system, alpha, theta, P) used by the dichotomy regression checks."""
    return [
        ("x1^2 at 1/3", _sys("x1^2", n=1), ["1/3"], Fraction(1), 10),
        ("x1^2 at 2/7", _sys("x1^2", n=1), ["2/7"], Fraction(1), 20),
        ("ternary diagonal at 3/10", _sys("x1^2+x2^2+x3^2", n=3), ["3/10"], Fraction(1), 20),
        ("indefinite quinary at 1/4", _sys("x1^2+x2^2+x3^2+x4^2-x5^2", n=5), ["1/4"],
         Fraction(1), 12),
        ("Q(1,2) at 2/5", bilinear_family(1, 2), ["2/5"], Fraction(1), 10),
        ("Q(2,2) at (1/3,1/2)", bilinear_family(2, 2), ["1/3", "1/2"], Fraction(1, 2), 9),
        ("diagonal pair at (1/5,2/3)", _sys("x1^2+x2^2", "x3^2-x4^2", n=4), ["1/5", "2/3"],
         Fraction(1), 10),
        ("x1^2 at sqrt(2)", _sys("x1^2", n=1), ["sqrt(2)"], Fraction(1), 20),
        ("indefinite quinary at pi/7", _sys("x1^2+x2^2+x3^2+x4^2-x5^2", n=5), ["pi/7"],
         Fraction(1), 10),
        ("ternary diagonal at sqrt(3)-1", _sys("x1^2+x2^2+x3^2", n=3), ["sqrt(3)-1"],
         Fraction(1), 30),
    ]


def run_corpus(workers: int = 1, seed: int = 0) -> list[dict]:
    out = []
    unit = Box.unit
    out.append(_fixture("count x1^2+x2^2, P=10", 1,
                        count_solutions(_sys("x1^2+x2^2", n=2), unit(2), 10,
                                        workers=workers).count))
    out.append(_fixture("count x1^2-x2^2, P=2", 9,
                        count_solutions(_sys("x1^2-x2^2", n=2), unit(2), 2,
                                        workers=workers).count))
    out.append(_fixture("h bounds of x1^2-x2^2 (factorization example)", [1, 2],
                        list(h_invariant_bounds(parse_form("x1^2-x2^2", 2)))))
    for name, system, alpha, theta, P in corpus_weyl_cases():
        o = major_arc_approximation(system, alpha, theta, P)
        if not isinstance(o, MajorArc):
            out.append(_fixture(f"weyl {name}", "MajorArc", o.type))
            continue
        reduced = math.gcd(o.q, *o.a) == 1 and _exponent_audit(o)
        if all(nm.is_rational_text(a) for a in alpha):
            exact = [parse_fraction(a) for a in alpha]
            ok = reduced and all(o.q * x == a for x, a in zip(exact, o.a))
            out.append(_fixture(f"weyl {name}: q, exactness, exponent audit",
                                [math.lcm(*(x.denominator for x in exact)), True], [o.q, ok]))
        else:
            out.append(_fixture(f"weyl {name}: reduced, exponent audit", True, reduced))
    dep = _sys("x1^2+x2^2-x3^2", "2*x1^2+2*x2^2-2*x3^2", n=3)
    o = major_arc_approximation(dep, ["1/3", "1/7"], 1, 8)
    psi = build_psi(dep, ["1/3", "1/7"], 1, 8)
    out.append(_fixture("weyl dependent pencil f2 = 2 f1", ["RankDeficient", True],
                        [o.type, isinstance(o, RankDeficient)
                         and left_kernel_check(o.b, psi.entries)]))
    q12 = check_theorem_conditions(bilinear_family(1, 2), 3, seed=seed)
    out.append(_fixture("invariants Q(1,2): u, dim V*", [0, 0], [q12.u, q12.dim_V_star]))
    q22 = check_theorem_conditions(bilinear_family(2, 2), 3, seed=seed)
    out.append(_fixture("invariants Q(2,2): u, dim V*", [2, 3], [q22.u, q22.dim_V_star]))
    q27 = check_theorem_conditions(bilinear_family(2, 7), 2, seed=seed, compute_v_star=False)
    out.append(_fixture("invariants Q(2,7): pencil condition, margin", ["pass", 2],
                        [q27.verdicts["pencil_singularity"], q27.margins["pencil_singularity"]]))
    q25 = check_theorem_conditions(bilinear_family(2, 5), 2, seed=seed, compute_v_star=False)
    out.append(_fixture("invariants Q(2,5): pencil condition, margin", ["fail", -2],
                        [q25.verdicts["pencil_singularity"], q25.margins["pencil_singularity"]]))
    diag = _sys("x1^2+x2^2+x3^2+x4^2-x5^2", n=5)
    out.append(_fixture("singular series term q=1", 1.0, singular_series_term(diag, 1)))
    t3, t4, t12 = (singular_series_term(diag, q) for q in (3, 4, 12))
    out.append(_fixture("singular series multiplicativity A(12) = A(3)A(4)", True,
                        abs(t12 - t3 * t4) <= 1e-9))
    return out


# entry point ----------------------------------------------------------------

COMMANDS = {"count": cmd_count, "expsum": cmd_expsum, "weyl": cmd_weyl,
            "invariants": cmd_invariants, "predict": cmd_predict, "corpus": cmd_corpus}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weylforms", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--system", help="system file (header 'n= d= r=' then one form per line)")
        p.add_argument("--box", default="unit", help="unit | positive | lo:hi,lo:hi,...")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--timing", action="store_true",
                       help="add wall-clock timings (output is then not reproducible)")
        return p

    p = common(sub.add_parser("count", help="exact zero count N(P)"))
    p.add_argument("--P", action="append")
    p.add_argument("--csv")
    p = common(sub.add_parser("expsum", help="exponential sum S(alpha)"))
    p.add_argument("--P", action="append")
    p.add_argument("--alpha", action="append")
    p.add_argument("--precision-bits", type=int, default=128)
    p.add_argument("--csv")
    p = common(sub.add_parser("weyl", help="Weyl dichotomy outcome"))
    p.add_argument("--P", action="append")
    p.add_argument("--alpha", action="append")
    p.add_argument("--theta", default="1")
    p.add_argument("--k", default=None,
                   help="evaluate both alternatives with this k; without it, run the psi analysis")
    p.add_argument("--precision-bits", type=int, default=128)
    p.add_argument("--column-cap", type=int, default=10 ** 7)
    p = common(sub.add_parser("invariants", help="pencil invariants and hypothesis checks"))
    p.add_argument("--b-bound", type=int, default=5)
    p.add_argument("--primes", default=None, help="comma list, default 5,7,11,101")
    p.add_argument("--trials", type=int, default=2 * 10 ** 7)
    p.add_argument("--exact-threshold", type=int, default=10 ** 7)
    p = common(sub.add_parser("predict", help="truncated circle-method prediction vs counts"))
    p.add_argument("--P", action="append")
    p.add_argument("--qmax", type=int, default=50)
    p.add_argument("--tmax", type=float, default=8.0)
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--csv")
    common(sub.add_parser("corpus", help="run the bundled regression corpus"))
    return parser


def _validate_args(args) -> None:
    if args.workers < 1:
        raise InputError("--workers must be >= 1")
    for key, lo in (("precision_bits", 53), ("column_cap", 1), ("b_bound", 1), ("trials", 1),
                    ("exact_threshold", 1), ("qmax", 1), ("grid", 16)):
        v = getattr(args, key, None)
        if v is not None and v < lo:
            raise InputError(f"--{key.replace('_', '-')} must be >= {lo}")
    if getattr(args, "tmax", None) is not None and not args.tmax > 0:
        raise InputError("--tmax must be positive")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        _validate_args(args)
        payload, prov, (system, box) = COMMANDS[args.command](args)
        report = {"schema_version": 1, "command": args.command,
                  "config": _config(args, system, box), "payload": payload,
                  "provenance": prov}
        if args.timing:
            report["timing"] = {"total_seconds": time.perf_counter() - t0}
        report = _jsonable(report)
        validate_report(report)
    except (InputError, FormSyntaxError, ValueError, TypeError, OverflowError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except nm.PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (AssertionError, ArithmeticError, jsonschema.ValidationError) as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    sys.stdout.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    if args.command == "corpus" and report["payload"]["failed"]:
        return EXIT_ASSERTION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
