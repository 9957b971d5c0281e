"""Acceptance suites.

Each ``criterion_*`` function runs one suite and returns a
:class:`CriterionResult`; ``run_all`` prints one pass/fail line per
criterion.  Instance streams are seeded so every run checks the same cases.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .core import (
    Form,
    HardThreshold,
    ProblemInstance,
    TruncatedQuadratic,
    evaluate_objective,
)
from .diffop import lift_direct_to_difference, map_minimizer
from .reduction import (
    Answer,
    SubsetSumInstance,
    brute_force_subset_sum,
    build_reduction,
    gadget_value_exact,
    indicator_point,
)
from .solvers import SolverConfig, solve_dp_identity, solve_exact_oracle, solve_local_icm
from .sparsity import L0Params, eval_l0_objective, solve_l0_oracle

SEED = 20240917
GAP_TOL = 1e-6


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    blocking: bool = True

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if not self.blocking:
            status = "INFO"
        return f"[{status}] {self.number}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


@dataclass
class _Minimizers:
    """Exact-oracle solutions collected for the gap-property check."""

    items: list = field(default_factory=list)

    def add(self, suite: str, inst: ProblemInstance, res):
        self.items.append((suite, inst, res))


_collected = _Minimizers()


def _rel_close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def random_a(rng: np.random.Generator, k: int, bound: int = 12) -> tuple[int, ...]:
    mags = rng.integers(1, bound + 1, size=k)
    signs = rng.choice([-1, 1], size=k)
    return tuple(int(v) for v in mags * signs)


def random_yes_instance(rng, k_max: int, bound: int = 12) -> SubsetSumInstance:
    while True:
        k = int(rng.integers(1, k_max + 1))
        a = random_a(rng, k, bound)
        picks = rng.random(k) < 0.5
        if not picks.any():
            picks[int(rng.integers(k))] = True
        C = sum(v for v, p in zip(a, picks) if p)
        if C != 0:
            return SubsetSumInstance(a, C)


def random_no_instance(rng, k_max: int, bound: int = 12) -> SubsetSumInstance:
    while True:
        k = int(rng.integers(1, k_max + 1))
        a = random_a(rng, k, bound)
        s = sum(abs(v) for v in a)
        C = int(rng.integers(-s - 3, s + 4))
        if C == 0:
            continue
        ss = SubsetSumInstance(a, C)
        if brute_force_subset_sum(ss).answer is Answer.NO:
            return ss


# hand-picked NO cases: parity, just-out-of-reach targets, cancelling signs
ADVERSARIAL_NO = [
    ((2, 4), 3),
    ((2, 4, 6), 5),
    ((12, 12, 12), 35),
    ((1, 1, 1, 1, 1, 1), 7),
    ((3, -3, 6), 1),
    ((-5, -7), -13),
    ((12, -12, 12, -12, 12, -12), 13),
    ((4, 8, 12, 4, 8, 12), 2),
]
ADVERSARIAL_YES = [
    ((1, 2), 3),
    ((3, 5, 7), 12),
    ((1,), 1),
    ((-2, 5), 3),
    ((12, -12, 12, -12, 12, -11), -11),
    ((1, 1, 1, 1, 1, 1), 6),
]


def criterion_1(n: int = 200) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    exact_fail = 0
    for _ in range(n):
        ss = random_yes_instance(rng, 8)
        truth = brute_force_subset_sum(ss)
        assert truth.answer is Answer.YES
        art = build_reduction(ss)
        x = indicator_point(ss, truth.certificate.subset)
        worst = max(worst, abs(evaluate_objective(art.instance, x) - ss.k))
        if gadget_value_exact(art, [Fraction(int(v)) for v in x]) != ss.k:
            exact_fail += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and exact_fail == 0 and dt < 10
    return CriterionResult(1, "reduction forward direction", ok, f"{n} YES instances, max |f - k| = {worst:.2e}, exact mismatches {exact_fail}", dt)


def criterion_2(n_no: int = 200, n_yes: int = 100) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 2)
    cases = [SubsetSumInstance(a, C) for a, C in ADVERSARIAL_NO] + [random_no_instance(rng, 6) for _ in range(n_no)]
    yes = [SubsetSumInstance(a, C) for a, C in ADVERSARIAL_YES] + [random_yes_instance(rng, 6) for _ in range(n_yes)]
    bad = []
    inside = 0
    for ss, expect in [(s, Answer.NO) for s in cases] + [(s, Answer.YES) for s in yes]:
        assert brute_force_subset_sum(ss).answer is expect
        art = build_reduction(ss)
        res = solve_exact_oracle(art.instance)
        _collected.add("gap", art.instance, res)
        k = ss.k
        if k + GAP_TOL < res.objective < k + 0.25 - GAP_TOL:
            inside += 1
        if expect is Answer.NO and res.objective < k + 0.25 - GAP_TOL:
            bad.append((ss, res.objective))
        if expect is Answer.YES and res.objective > k + GAP_TOL:
            bad.append((ss, res.objective))
    dt = time.perf_counter() - t0
    ok = not bad and inside == 0 and dt < 120
    return CriterionResult(
        2, "reduction gap", ok, f"{len(cases)} NO + {len(yes)} YES gadgets, violations {len(bad)}, inside gap {inside}", dt
    )


def criterion_3(n: int = 500, k_max: int = 12) -> CriterionResult:
    from .cli import EXIT_MISMATCH, run_decide

    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    mismatches = 0
    counts = {a: 0 for a in Answer}
    for i in range(n):
        ss = random_yes_instance(rng, k_max) if i % 2 == 0 else random_no_instance(rng, k_max)
        dec, code = run_decide(ss.a, ss.C, starts=10, seed=i)
        counts[dec.answer] += 1
        truth = brute_force_subset_sum(ss).answer
        if code == EXIT_MISMATCH or dec.answer is not truth:
            mismatches += 1
        elif dec.answer is Answer.YES and not (dec.certificate.valid and sum(ss.a[j - 1] for j in dec.certificate.subset) == ss.C):
            mismatches += 1
        elif dec.answer is Answer.NO and not dec.oracle_ran:
            mismatches += 1
    dt = time.perf_counter() - t0
    detail = f"{n} instances (k <= {k_max}), YES {counts[Answer.YES]}, NO {counts[Answer.NO]}, INCONCLUSIVE {counts[Answer.INCONCLUSIVE]}, mismatches {mismatches}"
    return CriterionResult(3, "decision soundness", mismatches == 0, detail, dt)


def random_direct_instance(rng, n_max: int = 8) -> ProblemInstance:
    N = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, 7))
    T = rng.uniform(-3, 3, size=(m, N - 1))
    y = rng.uniform(-3, 3, size=m)
    reg = TruncatedQuadratic(float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 5)))
    return ProblemInstance(Form.DIRECT, T, y, reg, N)


def criterion_4(n: int = 100) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 4)
    bad_min = bad_map = 0
    for _ in range(n):
        inst = random_direct_instance(rng)
        lifted = lift_direct_to_difference(inst)
        rd = solve_exact_oracle(inst)
        rl = solve_exact_oracle(lifted)
        _collected.add("lift", inst, rd)
        _collected.add("lift", lifted, rl)
        if not _rel_close(rd.objective, rl.objective, 1e-9):
            bad_min += 1
        x_hat = map_minimizer("direct->difference", rd.minimizer)
        u_hat = map_minimizer("difference->direct", rl.minimizer)
        if not _rel_close(evaluate_objective(lifted, x_hat), rd.objective, 1e-9):
            bad_map += 1
        if not _rel_close(evaluate_objective(inst, u_hat), rl.objective, 1e-9):
            bad_map += 1
    dt = time.perf_counter() - t0
    ok = bad_min == 0 and bad_map == 0 and dt < 60
    return CriterionResult(4, "direct/difference equivalence", ok, f"{n} instances, minimum mismatches {bad_min}, map mismatches {bad_map}", dt)


def random_signal(rng, n_max: int = 12) -> np.ndarray:
    N = int(rng.integers(1, n_max + 1))
    levels = rng.uniform(-5, 5, size=int(rng.integers(1, 4)))
    cuts = np.sort(rng.integers(0, N + 1, size=levels.size - 1))
    base = np.concatenate([np.full(b - a, lv) for a, b, lv in zip(np.r_[0, cuts], np.r_[cuts, N], levels)])
    return base + rng.normal(scale=float(rng.uniform(0, 1)), size=N)


def criterion_5(n: int = 300) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 5)
    bad_obj = bad_breaks = 0
    for _ in range(n):
        y = random_signal(rng)
        reg = TruncatedQuadratic(float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 5)))
        inst = ProblemInstance(Form.DIFFERENCE, np.eye(y.size), y, reg, y.size)
        dp = solve_dp_identity(y, reg)
        ex = solve_exact_oracle(inst)
        _collected.add("dp", inst, ex)
        if not _rel_close(dp.objective, ex.objective, 1e-9):
            bad_obj += 1
        if dp.break_set != ex.break_set:
            bad_breaks += 1
    dt = time.perf_counter() - t0
    ok = bad_obj == 0 and bad_breaks == 0 and dt < 60
    return CriterionResult(5, "DP correctness", ok, f"{n} identity instances, objective mismatches {bad_obj}, break-set mismatches {bad_breaks}", dt)


def gap_violations(inst: ProblemInstance, res) -> int:
    reg = inst.regularizer
    thr = math.sqrt(reg.beta) if isinstance(reg, (TruncatedQuadratic, HardThreshold)) else reg.threshold
    u = np.abs(inst.penalized(res.minimizer))
    broken = np.zeros(u.size, dtype=bool)
    broken[[j - 1 for j in res.break_set]] = True
    return int(np.sum(u[broken] < thr - GAP_TOL) + np.sum(u[~broken] > thr + GAP_TOL))


def criterion_6() -> CriterionResult:
    t0 = time.perf_counter()
    if not _collected.items:
        criterion_2()
        criterion_4()
        criterion_5()
    suites = sorted({s for s, _, _ in _collected.items})
    violations = sum(gap_violations(inst, res) for _, inst, res in _collected.items)
    dt = time.perf_counter() - t0
    detail = f"{len(_collected.items)} oracle minimizers from suites {', '.join(suites)}, violations {violations}"
    return CriterionResult(6, "gap-property invariant", violations == 0 and len(suites) == 3, detail, dt)


def _l0_cases(rng) -> list:
    cases = [
        (np.eye(2), np.array([1.0, 0.0]), 10.0),
        (np.eye(2), np.array([1.0, 0.0]), 0.5),
        (np.eye(2), np.zeros(2), 1.0),
        (np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]), np.array([1.0, 1.0]), 0.3),
    ]
    while len(cases) < 50:
        if len(cases) % 2:
            n = int(rng.integers(1, 4))
            T = np.eye(n)
        else:
            T = rng.integers(-2, 3, size=(2, 3)).astype(float)
        y = rng.integers(-3, 4, size=T.shape[0]).astype(float)
        gamma = float(rng.choice([0.25, 0.5, 1.0, 2.0, 5.0, 20.0]))
        cases.append((T, y, gamma))
    return cases


def _l0_reference(T, y, gamma) -> float:
    """Best of per-support least squares and a lattice grid, all via eval_l0_objective."""
    n = T.shape[1]
    params = L0Params(gamma)
    best = math.inf
    for mask in product([False, True], repeat=n):
        mk = np.array(mask)
        u = np.zeros(n)
        if mk.any():
            u[mk] = np.linalg.lstsq(T[:, mk], y, rcond=None)[0]
        best = min(best, eval_l0_objective(T, y, params, u))
    grid = np.linspace(-3, 3, 25)
    for u in product(grid, repeat=n):
        best = min(best, eval_l0_objective(T, y, params, np.array(u)))
    return best


def criterion_7(n_cases: int = 50, n_relax: int = 100) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 7)
    bad = implication = implication_bad = 0
    for T, y, gamma in _l0_cases(rng)[:n_cases]:
        res = solve_l0_oracle(T, y, L0Params(gamma))
        ref = _l0_reference(T, y, gamma)
        if not (res.objective <= ref + 1e-9 and _rel_close(res.objective, ref, 1e-9)):
            bad += 1
        if gamma > float(y @ y):
            implication += 1
            if np.any(res.minimizer != 0):
                implication_bad += 1
    relax_bad = 0
    for _ in range(n_relax):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        T = rng.uniform(-3, 3, size=(m, n))
        y = rng.uniform(-3, 3, size=m)
        eps = float(rng.uniform(0.05, 2.0))
        ht = solve_exact_oracle(ProblemInstance(Form.DIRECT, T, y, HardThreshold(eps), n + 1))
        l0 = solve_l0_oracle(T, y, L0Params(1.0))
        if ht.objective > l0.objective + 1e-9 * max(1.0, l0.objective):
            relax_bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and implication_bad == 0 and implication > 0 and relax_bad == 0
    detail = (
        f"{n_cases} hand-checkable cases (mismatches {bad}), gamma > ||y||^2 cases {implication} "
        f"(nonzero solutions {implication_bad}), relaxation violations {relax_bad}/{n_relax}"
    )
    return CriterionResult(7, "l0 module", ok, detail, dt)


def criterion_8(per_k: int = 4, ks=range(10, 15), starts: int = 50) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 8)
    no_side = no_total = found = yes_total = 0
    for k in ks:
        for i in range(per_k):
            a = random_a(rng, k)
            s = sum(abs(v) for v in a)
            no = SubsetSumInstance(a, s + 1)  # out of reach, certainly NO
            yes = random_yes_instance(rng, k)
            while yes.k != k:
                yes = random_yes_instance(rng, k)
            cfg = SolverConfig(starts=starts, seed=i)
            for ss, is_yes in ((no, False), (yes, True)):
                art = build_reduction(ss)
                res = solve_local_icm(art.instance, cfg)
                below = res.objective <= float(art.threshold)
                if is_yes:
                    yes_total += 1
                    found += below
                else:
                    no_total += 1
                    no_side += not below
    dt = time.perf_counter() - t0
    detail = (
        f"k={min(ks)}..{max(ks)}: NO gadgets with ICM value >= k+1/8: {no_side}/{no_total}; "
        f"YES gadgets where ICM reached <= k+1/8: {found}/{yes_total} ({found / max(yes_total, 1):.0%})"
    )
    return CriterionResult(8, "hardness phenomenology", no_side == no_total, detail, dt, blocking=False)


def run_all(quick: bool = False, stream=sys.stdout) -> list[CriterionResult]:
    _collected.items.clear()
    scale = 0.2 if quick else 1.0

    def sz(n):
        return max(1, int(n * scale))

    runs = [
        lambda: criterion_1(sz(200)),
        lambda: criterion_2(sz(200), sz(100)),
        lambda: criterion_3(sz(500), 10 if quick else 12),
        lambda: criterion_4(sz(100)),
        lambda: criterion_5(sz(300)),
        criterion_6,
        lambda: criterion_7(50, sz(100)),
        lambda: criterion_8(1 if quick else 4),
    ]
    results = []
    for run in runs:
        r = run()
        results.append(r)
        if stream is not None:
            print(r.line(), file=stream, flush=True)
    return results
