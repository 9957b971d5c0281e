"""Command-line front end.

Exit codes (all commands):

    0  success / YES
    1  NO (decide) or a failed criterion (selftest)
    2  INCONCLUSIVE (decide)
    3  internal error: decision disagrees with brute force
    4  invalid input, inapplicable method, or a size guard was hit
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from .core import RegularizationParams
from .io import (
    FormatError,
    RunReport,
    canonical_dumps,
    dumps_instance,
    read_instance,
    read_signal_csv,
    reduction_metadata,
    sidecar_path,
)
from .reduction import (
    Answer,
    SubsetSumInstance,
    brute_force_subset_sum,
    build_reduction,
    decide_subset_sum,
)
from .solvers import SolverConfig, solve_dp, solve_dp_identity, solve_exact_oracle, solve_local_icm

EXIT_OK = 0
EXIT_NO = 1
EXIT_INCONCLUSIVE = 2
EXIT_MISMATCH = 3
EXIT_INVALID = 4

CROSSCHECK_MAX_K = 20
_DECISION_EXIT = {Answer.YES: EXIT_OK, Answer.NO: EXIT_NO, Answer.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 1/12, got {text!r}")


def _write(path, text: str):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_reduce(args) -> int:
    ss = SubsetSumInstance(tuple(args.a), args.C)
    art = build_reduction(ss, epsilon=args.epsilon)
    _write(args.output, dumps_instance(art.instance))
    meta = canonical_dumps(reduction_metadata(art))
    if args.output is None or str(args.output) == "-":
        sys.stderr.write(meta)
    else:
        sidecar_path(args.output).write_text(meta)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    t0 = time.perf_counter()
    if args.method == "dp":
        res = solve_dp(inst)
    elif args.method == "exact":
        res = solve_exact_oracle(inst, prune=not args.exhaustive)
    else:
        res = solve_local_icm(inst, SolverConfig(starts=args.starts, seed=args.seed))
    elapsed = (time.perf_counter() - t0) * 1000.0
    report = RunReport.from_result(res, elapsed, args.seed)
    _write(args.output, report.dumps())
    return EXIT_OK


def run_decide(a, C, starts: int = 10, seed: int = 0, crosscheck: bool = True):
    """Decision plus exit code; shared by the CLI and the acceptance suite."""
    ss = SubsetSumInstance(tuple(a), C)
    dec = decide_subset_sum(ss, SolverConfig(starts=starts, seed=seed))
    code = _DECISION_EXIT[dec.answer]
    if dec.answer is Answer.YES and not (dec.certificate and dec.certificate.valid):
        code = EXIT_MISMATCH
    if crosscheck and ss.k <= CROSSCHECK_MAX_K and dec.answer is not Answer.INCONCLUSIVE:
        if brute_force_subset_sum(ss).answer is not dec.answer:
            code = EXIT_MISMATCH
    return dec, code


def cmd_decide(args) -> int:
    dec, code = run_decide(args.a, args.C, args.starts, args.seed, not args.no_crosscheck)
    if code == EXIT_MISMATCH:
        print(f"internal error: {dec.answer.value} disagrees with brute force", file=sys.stderr)
        return code
    line = dec.answer.value
    if dec.certificate is not None:
        S = ",".join(str(i) for i in dec.certificate.subset)
        line += f" S={{{S}}} sum={dec.certificate.sum}"
    print(line)
    return code


def cmd_denoise(args) -> int:
    y = read_signal_csv(args.signal)
    res = solve_dp_identity(y, RegularizationParams(args.alpha, args.beta))
    jumps = set(res.break_set)
    rows = ["x,jump"] + [f"{v:.17g},{int(i + 1 in jumps)}" for i, v in enumerate(res.minimizer)]
    _write(args.output, "\n".join(rows) + "\n")
    print(f"objective={res.objective:.17g}")
    print("jumps=" + ",".join(str(j) for j in res.break_set))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    results = run_all(quick=args.quick, stream=sys.stdout)
    return EXIT_OK if all(r.passed for r in results if r.blocking) else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tqreg", description="Truncated quadratic regularization toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("reduce", help="build the SUBSET-SUM gadget instance")
    r.add_argument("--a", type=_int_list, required=True, help="comma-separated nonzero integers")
    r.add_argument("--C", type=int, required=True, help="target sum")
    r.add_argument("--epsilon", type=_rational, default=None, help="override epsilon, e.g. 1/20")
    r.add_argument("-o", "--output", default=None, help="instance file (metadata goes to <name>.meta.json)")
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--method", choices=("dp", "exact", "icm"), default="exact")
    s.add_argument("--starts", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--exhaustive", action="store_true", help="exact: solve all 2^P quadratics, no pruning")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_solve)

    d = sub.add_parser("decide", help="decide SUBSET-SUM through the gadget")
    d.add_argument("--a", type=_int_list, required=True)
    d.add_argument("--C", type=int, required=True)
    d.add_argument("--starts", type=int, default=10)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--no-crosscheck", action="store_true", help="skip the brute-force comparison")
    d.set_defaults(func=cmd_decide)

    n = sub.add_parser("denoise", help="exact piecewise-smooth denoising of a 1-D signal")
    n.add_argument("signal", help="CSV, one sample per line")
    n.add_argument("--alpha", type=float, required=True)
    n.add_argument("--beta", type=float, required=True)
    n.add_argument("-o", "--output", default=None)
    n.set_defaults(func=cmd_denoise)

    t = sub.add_parser("selftest", help="run the acceptance suites")
    t.add_argument("--quick", action="store_true", help="smaller suites")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # usage errors and --help
        return EXIT_INVALID if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, FormatError, OSError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
