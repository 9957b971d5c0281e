"""SUBSET-SUM hardness gadget.

For nonzero integers ``a_1..a_k`` and ``C`` the gadget is the direct-form
problem over ``x`` in R^(2k)

    f(x) = (C - sum_i a_i x_i)^2 + P * sum_i (1 - x_i - x_{i+k})^2
           + sum_{i=1}^{2k} min(1, x_i^2 / eps^2)

whose minimum is at most ``k`` when some subset of the ``a_i`` sums to
``C`` and at least ``k + 1/4`` otherwise.

Floating-point error budget: ``eps`` and ``P`` are kept as exact rationals
and only ``sqrt(P)`` enters the matrix as a double (relative error below
1e-15).  At a point with ``|x_i| <= 2`` this perturbs ``f`` by roughly
``4 * P * k * 1e-15``, far below the 1/8 margin that separates the decision
threshold ``k + 1/8`` from both ends of the gap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import Form, HardThreshold, ProblemInstance, Regularizer
from .solvers import EXACT_GUARD, GuardError, SolverConfig, solve_exact_oracle, solve_local_icm

BRUTE_FORCE_GUARD = 24


class InvalidInstanceError(ValueError):
    """Raised for SUBSET-SUM instances outside the gadget's hypotheses."""


@dataclass(frozen=True)
class SubsetSumInstance:
    a: tuple[int, ...]
    C: int

    def __post_init__(self):
        a = tuple(self.a)
        if len(a) < 1:
            raise InvalidInstanceError("need at least one integer (k >= 1)")
        for v in a + (self.C,):
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise InvalidInstanceError(f"integers required, got {v!r}")
        if any(v == 0 for v in a) or self.C == 0:
            raise InvalidInstanceError("nonzero integers required")
        object.__setattr__(self, "a", tuple(int(v) for v in a))
        object.__setattr__(self, "C", int(self.C))

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def abs_sum(self) -> int:
        return sum(abs(v) for v in self.a)

    @property
    def epsilon_bound(self) -> Fraction:
        return Fraction(1, 4 * self.abs_sum)


@dataclass(frozen=True)
class Certificate:
    """A subset (1-based indices) with its exact integer sum."""

    subset: tuple[int, ...]
    sum: int
    target: int

    @property
    def valid(self) -> bool:
        return self.sum == self.target


@dataclass(frozen=True, eq=False)
class ReductionArtifact:
    instance: ProblemInstance
    subset_sum: SubsetSumInstance
    epsilon: Fraction
    P: Fraction
    k: int
    gap_low: Fraction
    gap_high: Fraction
    metadata: dict = field(default_factory=dict)

    @property
    def threshold(self) -> Fraction:
        """Decision threshold, the midpoint of the forbidden interval."""
        return (self.gap_low + self.gap_high) / 2

    def satisfies_bounds(self) -> bool:
        """Both gadget hypotheses, compared exactly."""
        return 0 < self.epsilon <= self.subset_sum.epsilon_bound and self.P >= 2 * self.k / self.epsilon**2


class Answer(str, enum.Enum):
    YES = "YES"
    NO = "NO"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Decision:
    answer: Answer
    certificate: Certificate | None = None
    objective: float | None = None
    oracle_ran: bool = False


def gadget_matrix(ss: SubsetSumInstance, P: Fraction) -> tuple[np.ndarray, np.ndarray]:
    k = ss.k
    sqrt_p = math.sqrt(P)
    T = np.zeros((k + 1, 2 * k))
    T[0, :k] = ss.a
    for i in range(k):
        T[i + 1, i] = T[i + 1, i + k] = sqrt_p
    y = np.concatenate([[float(ss.C)], np.full(k, sqrt_p)])
    return T, y


def build_reduction(ss: SubsetSumInstance, epsilon: Fraction | None = None, regularizer: Regularizer | None = None) -> ReductionArtifact:
    """Gadget with ``eps = 1/(4 sum|a_i|)`` and ``P = 2k/eps^2`` unless ``epsilon`` is given.

    ``epsilon`` overrides must satisfy ``0 < eps <= 1/(4 sum|a_i|)``.
    """
    bound = ss.epsilon_bound
    eps = bound if epsilon is None else Fraction(epsilon)
    if not 0 < eps <= bound:
        raise InvalidInstanceError(f"epsilon {eps} violates 0 < epsilon <= 1/(4*sum|a_i|) = {bound}")
    P = 2 * ss.k / eps**2
    T, y = gadget_matrix(ss, P)
    reg = HardThreshold(eps) if regularizer is None else regularizer
    inst = ProblemInstance(Form.DIRECT, T, y, reg, 2 * ss.k + 1)
    return ReductionArtifact(inst, ss, eps, P, ss.k, Fraction(ss.k), ss.k + Fraction(1, 4))


def gadget_value_exact(art: ReductionArtifact, x: Sequence) -> Fraction:
    """``f(x)`` in exact rational arithmetic (HardThreshold gadgets only)."""
    if not isinstance(art.instance.regularizer, HardThreshold):
        raise ValueError("exact evaluation needs the HardThreshold gadget")
    ss, k = art.subset_sum, art.k
    x = [Fraction(v) for v in x]
    if len(x) != 2 * k:
        raise ValueError(f"expected {2 * k} coordinates, got {len(x)}")
    fit = (ss.C - sum(a * xi for a, xi in zip(ss.a, x))) ** 2
    pair = art.P * sum((1 - x[i] - x[i + k]) ** 2 for i in range(k))
    eps2 = art.epsilon**2
    pen = sum(min(Fraction(1), xi**2 / eps2) for xi in x)
    return fit + pair + pen


def _check_subset(ss: SubsetSumInstance, S: Iterable[int]) -> tuple[int, ...]:
    S = tuple(sorted(set(int(i) for i in S)))
    if S and (S[0] < 1 or S[-1] > ss.k):
        raise IndexError(f"subset indices must lie in [1, {ss.k}], got {S}")
    return S


def indicator_point(ss: SubsetSumInstance, S: Iterable[int]) -> np.ndarray:
    """``x_i = [i in S]`` and ``x_{i+k} = [i not in S]``."""
    S = _check_subset(ss, S)
    first = np.zeros(ss.k)
    first[[i - 1 for i in S]] = 1.0
    return np.concatenate([first, 1.0 - first])


def round_to_indicator(x: Sequence[float]) -> np.ndarray:
    """Nearest of {0, 1} per coordinate; exactly 1/2 rounds to 0."""
    return (np.asarray(x, dtype=float) > 0.5).astype(int)


def extract_certificate(ss: SubsetSumInstance, x: Sequence[float]) -> Certificate:
    bits = round_to_indicator(x)[: ss.k]
    S = tuple(int(i) + 1 for i in np.flatnonzero(bits))
    return Certificate(S, sum(ss.a[i - 1] for i in S), ss.C)


def brute_force_subset_sum(ss: SubsetSumInstance) -> Decision:
    """Ground truth by trying all ``2**k`` subsets in exact integers.

    The reported subset is the smallest one, ties broken lexicographically.
    """
    k = ss.k
    if k > BRUTE_FORCE_GUARD:
        raise GuardError(f"brute force guard: k={k} exceeds k <= {BRUTE_FORCE_GUARD}")
    if ss.abs_sum < 2**62:
        sums = np.zeros(1, dtype=np.int64)
        for v in ss.a:
            sums = np.concatenate([sums, sums + v])
        hits = np.flatnonzero(sums == ss.C)
    else:
        sums = [0]
        for v in ss.a:
            sums = sums + [s + v for s in sums]
        hits = [m for m, s in enumerate(sums) if s == ss.C]
    if len(hits) == 0:
        return Decision(Answer.NO)
    subsets = [tuple(i + 1 for i in range(k) if int(m) >> i & 1) for m in hits]
    S = min(subsets, key=lambda s: (len(s), s))
    return Decision(Answer.YES, Certificate(S, sum(ss.a[i - 1] for i in S), ss.C))


def decide_subset_sum(ss: SubsetSumInstance, cfg: SolverConfig = SolverConfig(), use_oracle: bool = True) -> Decision:
    """Decide SUBSET-SUM through the gadget.

    Local search runs first; a point below ``k + 1/8`` is rounded to a
    subset that is then checked in exact integers.  Without such a
    certificate the exact oracle runs (when ``2k`` is within its guard) and
    a minimum above ``k + 1/8`` means NO.  Otherwise the answer is
    INCONCLUSIVE.
    """
    art = build_reduction(ss)
    threshold = float(art.threshold)
    local = solve_local_icm(art.instance, cfg)
    if local.objective <= threshold:
        cert = extract_certificate(ss, local.minimizer)
        if cert.valid:
            return Decision(Answer.YES, cert, local.objective, False)
    if not use_oracle or art.instance.n_penalties > EXACT_GUARD:
        return Decision(Answer.INCONCLUSIVE, None, local.objective, False)
    exact = solve_exact_oracle(art.instance, cutoff=threshold)
    if exact is None:
        return Decision(Answer.NO, None, local.objective, True)
    cert = extract_certificate(ss, exact.minimizer)
    if cert.valid:
        return Decision(Answer.YES, cert, exact.objective, True)
    # the gap argument rules this out; refuse to answer rather than guess
    return Decision(Answer.INCONCLUSIVE, None, exact.objective, True)
