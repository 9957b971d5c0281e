"""l0-regularized least squares and the gadget with other admissible penalties."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    DimensionError,
    Form,
    InvalidRegularizerError,
    ProblemInstance,
    Regularizer,
    SolveResult,
)
from .reduction import ReductionArtifact, SubsetSumInstance, build_reduction
from .solvers import RCOND, GuardError, tie_tolerance

L0_GUARD = 20
# slack for alpha * beta == 1 evaluated in floating point
_ROUNDING = 1e-12


@dataclass(frozen=True)
class L0Params:
    gamma: float

    def __post_init__(self):
        if not float(self.gamma) > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")


def _check_dims(T, y, u=None):
    T = np.atleast_2d(np.asarray(T, dtype=float))
    y = np.asarray(y, dtype=float)
    if y.shape != (T.shape[0],):
        raise DimensionError(f"y has shape {y.shape}, expected ({T.shape[0]},)")
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape != (T.shape[1],):
            raise DimensionError(f"u has shape {u.shape}, expected ({T.shape[1]},)")
    return T, y, u


def eval_l0_objective(T, y, params: L0Params, u) -> float:
    """``||T u - y||^2 + gamma * #{j : u_j != 0}``; only exact zeros are free."""
    T, y, u = _check_dims(T, y, u)
    r = T @ u - y
    return float(r @ r + params.gamma * np.count_nonzero(u))


def solve_l0_oracle(T, y, params: L0Params) -> SolveResult:
    """Exact minimizer by trying every support.

    Each support gets the minimum-norm least-squares fit on its columns;
    entries off the support are exactly zero.  Ties go to the smaller
    support, then the lexicographically smaller one (1-based indices in
    ``break_set``).
    """
    T, y, _ = _check_dims(T, y)
    m, n = T.shape
    if n > L0_GUARD:
        raise GuardError(f"l0 oracle guard: {n} columns exceeds {L0_GUARD}")
    codes = np.arange(1 << n)
    masks = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    values = np.empty(len(codes))
    step = max(1, 2_000_000 // (m * n + 1))
    for s in range(0, len(codes), step):
        mk = masks[s : s + step]
        Ts = T[None] * mk[:, None, :]
        U = np.einsum("kij,j->ki", np.linalg.pinv(Ts, rcond=RCOND), y) * mk
        r = U @ T.T - y
        values[s : s + step] = np.einsum("ki,ki->k", r, r) + params.gamma * mk.sum(axis=1)
    best = values.min()
    cand = np.flatnonzero(values <= best + tie_tolerance(best))
    i = min(cand, key=lambda c: (int(masks[c].sum()), tuple(np.flatnonzero(masks[c]))))
    mk = masks[i]
    u = np.zeros(n)
    if mk.any():
        u[mk] = np.linalg.pinv(T[:, mk], rcond=RCOND) @ y
    support = tuple(int(j) + 1 for j in np.flatnonzero(mk))
    return SolveResult(u, eval_l0_objective(T, y, params, u), support, "ExactOracle")


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of the sampled admissibility check for a penalty."""

    epsilon: Fraction
    grid_step: float
    n_samples: int
    zero_at_zero: bool
    bounded: bool
    saturated: bool

    @property
    def ok(self) -> bool:
        return self.zero_at_zero and self.bounded and self.saturated


def check_penalty_conditions(r: Regularizer, epsilon: Fraction) -> ConditionCheck:
    """Sample ``r`` for: value 0 at 0, values in [0, 1], value 1 for ``|x| >= epsilon``.

    Grid: step ``epsilon/100`` on ``[-2 eps, 2 eps]`` plus magnitudes up to
    ``10 eps``; ``+-eps`` are always included.
    """
    eps = float(epsilon)
    step = eps / 100
    inner = np.linspace(-2 * eps, 2 * eps, 401)
    outer = np.linspace(2 * eps, 10 * eps, 801)
    grid = np.unique(np.concatenate([inner, outer, -outer, [0.0, eps, -eps]]))
    vals = np.asarray(r.value(grid), dtype=float)
    zero_ok = float(r.value(0.0)) == 0.0
    bounded = bool(np.all((vals >= 0.0) & (vals <= 1.0 + _ROUNDING)))
    far = np.abs(grid) >= eps
    saturated = bool(np.all(np.abs(vals[far] - 1.0) <= _ROUNDING))
    return ConditionCheck(Fraction(epsilon), step, int(grid.size), zero_ok, bounded, saturated)


def build_generalized_reduction(ss: SubsetSumInstance, r: Regularizer) -> ReductionArtifact:
    """Gadget with the same matrix, observation and ``P`` but penalty ``r``.

    ``r`` must pass :func:`check_penalty_conditions` at
    ``eps = 1/(4 sum|a_i|)``.
    """
    check = check_penalty_conditions(r, ss.epsilon_bound)
    if not check.ok:
        failed = [
            name
            for name, ok in (("zero at zero", check.zero_at_zero), ("bounded in [0, 1]", check.bounded), ("equal to 1 beyond epsilon", check.saturated))
            if not ok
        ]
        raise InvalidRegularizerError(f"{r!r} is not admissible: fails {', '.join(failed)}")
    art = build_reduction(ss, regularizer=r)
    art.metadata["condition_check"] = check
    return art


def direct_instance(T, y, r: Regularizer) -> ProblemInstance:
    T, y, _ = _check_dims(T, y)
    return ProblemInstance(Form.DIRECT, T, y, r, T.shape[1] + 1)
