"""Exact and local solvers for truncated quadratic problems.

Every solver works through the same observation: with a break set ``B``
fixed, the objective becomes the quadratic

    J_B(v) = ||M v - y||^2 + cap * |B| + weight * sum_{j not in B} u_j^2

and ``J(v) = min_B J_B(v)``.  Minimizing over ``v`` for each ``B`` and then
over ``B`` gives the global minimum.  Rank-deficient quadratics are resolved
by the minimum-norm rule throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import solveh_banded

from .core import (
    DimensionError,
    Form,
    ProblemInstance,
    RegularizationParams,
    Regularizer,
    SolveResult,
    UnsupportedRegularizerError,
    classify_breaks,
    evaluate_objective,
    fixed_break_objective,
)

EXACT_GUARD = 24
TIE_RTOL = 1e-9
# relative singular-value cutoff for the minimum-norm solves
RCOND = 1e-12
_CHUNK_FLOATS = 4_000_000


class GuardError(ValueError):
    """Raised when an exhaustive method is asked to enumerate too much."""


@dataclass(frozen=True)
class SolverConfig:
    starts: int = 10
    seed: int = 0
    tol: float = 1e-12
    max_iters: int = 100

    def __post_init__(self):
        if int(self.starts) < 1:
            raise ValueError("starts must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def tie_tolerance(best: float) -> float:
    return TIE_RTOL * max(1.0, abs(best))


def _break_key(mask) -> tuple:
    idx = tuple(int(j) + 1 for j in np.flatnonzero(mask))
    return (len(idx), idx)


def _normalize_break_set(inst: ProblemInstance, B: Iterable[int]) -> tuple[int, ...]:
    B = tuple(sorted(set(int(j) for j in B)))
    if B and (B[0] < 1 or B[-1] > inst.n_penalties):
        raise DimensionError(f"break indices must lie in [1, {inst.n_penalties}], got {B}")
    return B


def _weight(inst: ProblemInstance) -> float:
    w = inst.regularizer.weight
    if w is None:
        raise UnsupportedRegularizerError(
            f"{type(inst.regularizer).__name__} penalties cannot be minimized exactly by these solvers"
        )
    return w


# ---------------------------------------------------------------------------
# batched quadratic solves
# ---------------------------------------------------------------------------


def _feasible_basis(inst: ProblemInstance, smooth: np.ndarray) -> np.ndarray:
    """Orthonormal bases of ``{v : u_j = 0 for smooth j}``, one per mask row."""
    k, n = smooth.shape[0], inst.n_vars
    if inst.form is Form.DIRECT:
        return np.eye(n)[None, :, :] * (~smooth)[:, None, :]
    # samples joined by a smooth (zero) difference share one segment value
    labels = np.concatenate([np.zeros((k, 1), dtype=int), np.cumsum(~smooth, axis=1)], axis=1)
    onehot = (labels[:, :, None] == np.arange(n)[None, None, :]).astype(float)
    sizes = onehot.sum(axis=1)
    return onehot / np.sqrt(np.maximum(sizes, 1.0))[:, None, :]


def _lstsq_batch(M: np.ndarray, y: np.ndarray, floor: float) -> np.ndarray:
    """Minimum-norm least squares for a stack of matrices.

    Singular values below ``RCOND * s_max`` or below ``floor`` count as zero;
    the absolute floor keeps columns that vanish up to rounding from being
    inverted on their own.
    """
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    cut = np.maximum(RCOND * s[:, :1], floor)
    inv = np.where(s > cut, 1.0 / np.where(s > cut, s, 1.0), 0.0)
    return np.einsum("kji,kj->ki", Vt, inv * np.einsum("kij,i->kj", U, y))


def _solve_masks(inst: ProblemInstance, smooth: np.ndarray) -> np.ndarray:
    """Minimum-norm minimizers of ``||Mv - y||^2 + weight * sum_{smooth} u_j^2``.

    ``smooth`` is a (K, P) boolean array; returns a (K, n) array.  Terms not
    marked smooth carry no quadratic cost (they are broken or undecided).
    """
    smooth = np.asarray(smooth, dtype=bool)
    smooth = smooth.reshape(smooth.shape[0] if smooth.ndim == 2 else -1, inst.n_penalties)
    A, y = inst.matrix, inst.observation
    m, n = A.shape
    P = inst.n_penalties
    w = _weight(inst)
    K = smooth.shape[0]
    out = np.empty((K, n))
    step = max(1, _CHUNK_FLOATS // ((m + P + n) * n))
    if math.isinf(w):
        floor = RCOND * float(np.linalg.norm(A, 2))
        for s in range(0, K, step):
            Z = _feasible_basis(inst, smooth[s : s + step])
            z = _lstsq_batch(A @ Z, y, floor)
            out[s : s + step] = np.einsum("kij,kj->ki", Z, z)
        return out
    R = np.sqrt(w) * inst.penalty_operator()
    b = np.concatenate([y, np.zeros(P)])
    for s in range(0, K, step):
        sm = smooth[s : s + step]
        M = np.concatenate([np.broadcast_to(A, (sm.shape[0], m, n)), sm[:, :, None] * R[None]], axis=1)
        out[s : s + step] = np.einsum("kij,j->ki", np.linalg.pinv(M, rcond=RCOND), b)
    return out


def _penalized_batch(inst: ProblemInstance, X: np.ndarray) -> np.ndarray:
    return np.diff(X, axis=1) if inst.form is Form.DIFFERENCE else X


def _residual_batch(inst: ProblemInstance, X: np.ndarray) -> np.ndarray:
    r = X @ inst.matrix.T - inst.observation
    return np.einsum("ki,ki->k", r, r)


def _quadratic_values(inst, X, smooth, n_broken) -> np.ndarray:
    """``J_B`` restricted to decided terms; undecided terms contribute 0."""
    w = _weight(inst)
    val = _residual_batch(inst, X) + inst.regularizer.cap * n_broken
    if not math.isinf(w):
        U = _penalized_batch(inst, X)
        val = val + w * np.einsum("ki,ki->k", smooth * U, U)
    return val


def _objective_batch(inst, X) -> np.ndarray:
    return _residual_batch(inst, X) + inst.regularizer.value(_penalized_batch(inst, X)).sum(axis=1)


def _pick(broken: np.ndarray, values: np.ndarray) -> int:
    """Row of the minimum; near-ties go to fewer breaks, then lexicographic."""
    best = values.min()
    cand = np.flatnonzero(values <= best + tie_tolerance(best))
    return int(min(cand, key=lambda i: _break_key(broken[i])))


# ---------------------------------------------------------------------------
# public solvers
# ---------------------------------------------------------------------------


def solve_fixed_breaks(inst: ProblemInstance, B: Iterable[int]) -> SolveResult:
    """Minimize the quadratic ``J_B`` for a fixed break set ``B`` (1-based).

    The reported objective is ``J_B`` at the minimizer, which upper-bounds
    the true objective there.
    """
    B = _normalize_break_set(inst, B)
    smooth = np.ones(inst.n_penalties, dtype=bool)
    smooth[[j - 1 for j in B]] = False
    x = _solve_masks(inst, smooth[None])[0]
    return SolveResult(x, fixed_break_objective(inst, x, B), B, "FixedBreaks")


def _exhaustive(inst: ProblemInstance):
    P = inst.n_penalties
    total = 1 << P
    step = max(1, _CHUNK_FLOATS // ((inst.matrix.shape[0] + P + inst.n_vars) * inst.n_vars))
    values = np.empty(total)
    bits = np.arange(P)
    for s in range(0, total, step):
        codes = np.arange(s, min(total, s + step))
        broken = ((codes[:, None] >> bits) & 1).astype(bool)
        X = _solve_masks(inst, ~broken)
        values[s : s + len(codes)] = _quadratic_values(inst, X, ~broken, broken.sum(axis=1))
    best = values.min()
    codes = np.flatnonzero(values <= best + tie_tolerance(best))
    broken = ((codes[:, None] >> bits) & 1).astype(bool)
    i = _pick(broken, values[codes])
    return broken[i], _solve_masks(inst, ~broken[i][None])[0]


def _term_matrix(inst: ProblemInstance) -> tuple[np.ndarray, int]:
    """Columns acting on the penalized quantities, plus always-free columns.

    A difference-form signal is written ``x = D^+ u + c * 1``, so its matrix
    becomes ``[A D^+, A 1]`` over ``(u, c)``; ``c`` is never penalized.
    """
    if inst.form is Form.DIRECT:
        return inst.matrix, 0
    n = inst.dimension
    pinv_cols = [np.concatenate(([0.0], np.cumsum(e))) for e in np.eye(n - 1)]
    Dp = np.array([c - c.mean() for c in pinv_cols]).T if pinv_cols else np.zeros((n, 0))
    return np.column_stack([inst.matrix @ Dp, inst.matrix.sum(axis=1)]), 1


def _relaxed_values(E: np.ndarray, extra: int, y: np.ndarray, w: float, smooth: np.ndarray) -> np.ndarray:
    """Minimum of ``||E z - y||^2 + w * sum_{smooth} z_j^2`` for each mask row.

    Smooth columns are eliminated in closed form through
    ``G = I + E_S E_S^T / w`` (or pinned to zero when ``w`` is infinite);
    the remaining columns are free, so the minimum is the part of
    ``L^-1 y`` orthogonal to the span of ``L^-1 E_free`` with ``G = L L^T``.
    Only m x m matrices are factorized.
    """
    K, P = smooth.shape
    m = E.shape[0]
    free = np.concatenate([~smooth, np.ones((K, extra), dtype=bool)], axis=1)
    if math.isinf(w):
        yt = np.broadcast_to(y, (K, m))
        Et = E[None] * free[:, None, :]
    else:
        Es = E[:, :P]
        G = np.eye(m) + (Es[None] * (smooth / w)[:, None, :]) @ Es.T
        Linv = np.linalg.inv(np.linalg.cholesky(G))
        yt = Linv @ y
        Et = Linv @ (E[None] * free[:, None, :])
    lam, V = np.linalg.eigh(Et @ np.swapaxes(Et, 1, 2))
    # relative cutoff for eigh noise, plus an absolute floor so that a column
    # that is zero up to rounding (A 1 when A kills constants) is not a direction
    floor = RCOND**2 * max(float(np.sum(E * E)), 1e-300)
    keep = lam > np.maximum(1e-13 * lam[:, -1:], floor)
    proj = (yt[:, None, :] @ V)[:, 0, :]
    return np.einsum("ki,ki->k", yt, yt) - np.einsum("kj,kj->k", keep * proj, proj)


def _branch_order(E: np.ndarray, P: int) -> list[int]:
    """Decide terms row by row, sparsest rows first, so rows close early."""
    cols = E[:, :P] != 0
    order: list[int] = []
    seen = np.zeros(P, dtype=bool)
    for i in sorted(range(E.shape[0]), key=lambda i: (int(cols[i].sum()), i)):
        for j in np.flatnonzero(cols[i] & ~seen):
            order.append(int(j))
            seen[j] = True
    order.extend(int(j) for j in np.flatnonzero(~seen))
    return order


def _branch_and_bound(inst: ProblemInstance, cutoff: float | None = None, probes: int = 4):
    """Breadth-first enumeration of break sets with exact pruning.

    A node fixes some terms as broken or smooth.  Dropping the (nonnegative)
    penalties of undecided terms gives a lower bound on ``J_B`` for every
    completion.  The minimizers of the few most promising nodes per level
    give upper bounds on the global minimum.  Nodes whose bound exceeds the
    best upper bound (or ``cutoff``) by more than the tie tolerance cannot
    hold a minimizer.  Returns None when everything was pruned, which only
    happens when the minimum exceeds ``cutoff``.
    """
    P = inst.n_penalties
    w = _weight(inst)
    cap = inst.regularizer.cap
    E, extra = _term_matrix(inst)
    y = inst.observation
    broken = np.zeros((1, P), dtype=bool)
    smooth = np.zeros((1, P), dtype=bool)
    # a broken term is as free as an undecided one, so a broken child's
    # relaxation equals its parent's and only smooth children need solving
    relaxed = _relaxed_values(E, extra, y, w, smooth)
    incumbent = math.inf if cutoff is None else float(cutoff)
    step = max(1, _CHUNK_FLOATS // (E.shape[0] * (E.shape[0] + E.shape[1])))
    for level in _branch_order(E, P):
        smooth_child = smooth.copy()
        smooth_child[:, level] = True
        smooth_relaxed = np.concatenate(
            [_relaxed_values(E, extra, y, w, smooth_child[s : s + step]) for s in range(0, len(smooth), step)]
        )
        broken_child = broken.copy()
        broken_child[:, level] = True
        broken = np.concatenate([broken_child, broken])
        smooth = np.concatenate([smooth, smooth_child])
        relaxed = np.concatenate([relaxed, smooth_relaxed])
        bound = relaxed + cap * broken.sum(axis=1)
        best = np.argsort(bound, kind="stable")[:probes]
        X = _solve_masks(inst, smooth[best])
        incumbent = min(incumbent, float(_objective_batch(inst, X).min()))
        keep = bound <= incumbent + tie_tolerance(incumbent)
        broken, smooth, relaxed, bound = broken[keep], smooth[keep], relaxed[keep], bound[keep]
        if not len(bound):
            return None
    # survivors are leaves; rank them by J_B at their actual minimizers
    X = _solve_masks(inst, ~broken)
    i = _pick(broken, _quadratic_values(inst, X, ~broken, broken.sum(axis=1)))
    return broken[i], X[i]


def solve_exact_oracle(inst: ProblemInstance, prune: bool = True, cutoff: float | None = None) -> SolveResult | None:
    """Global minimizer by enumerating break sets.

    With ``prune=False`` all ``2**P`` quadratics are solved; the default
    discards subtrees that provably cannot hold a minimizer.  Both return
    the same break set under the tie rule (fewest breaks, then
    lexicographically smallest).

    ``cutoff`` turns the pruned search into a decision: subtrees whose bound
    exceeds it are dropped too, and None is returned when the minimum is
    proven to lie above ``cutoff``.
    """
    P = inst.n_penalties
    if P > EXACT_GUARD:
        raise GuardError(f"exact oracle guard: {P} penalty terms exceeds P <= {EXACT_GUARD}")
    _weight(inst)
    if P == 0:
        found = np.zeros(0, dtype=bool), _solve_masks(inst, np.zeros((1, 0), dtype=bool))[0]
    elif prune:
        found = _branch_and_bound(inst, cutoff)
    else:
        found = _exhaustive(inst)
    if found is None:
        return None
    mask, x = found
    obj = evaluate_objective(inst, x)
    if cutoff is not None and obj > cutoff + tie_tolerance(cutoff):
        return None
    B = tuple(int(j) + 1 for j in np.flatnonzero(mask))
    return SolveResult(x, obj, B, "ExactOracle")


def _segment_fit(y: np.ndarray, w: float) -> np.ndarray:
    """Minimizer of ``sum (x - y)^2 + w * sum (x[t+1] - x[t])^2``."""
    L = y.size
    if L == 1:
        return y.copy()
    if math.isinf(w):
        return np.full(L, y.mean())
    deg = np.full(L, 2.0)
    deg[0] = deg[-1] = 1.0
    ab = np.empty((2, L))
    ab[0, 0] = 0.0
    ab[0, 1:] = -w
    ab[1] = 1.0 + w * deg
    return solveh_banded(ab, y)


def _segment_cost(y: np.ndarray, x: np.ndarray, w: float) -> float:
    r = x - y
    c = float(r @ r)
    if not math.isinf(w) and x.size > 1:
        d = np.diff(x)
        c += w * float(d @ d)
    return c


def solve_dp_identity(y: Sequence[float], params: RegularizationParams | Regularizer) -> SolveResult:
    """Exact minimizer of the identity-matrix (denoising) problem.

    Dynamic program over the position of the last break:
    ``E(j) = min_{i<j} E(i) + cap * [i > 0] + SegCost(i+1, j)``, with every
    segment cost obtained from its own tridiagonal solve.
    """
    reg = params.regularizer() if isinstance(params, RegularizationParams) else params
    w = reg.weight
    if w is None:
        raise UnsupportedRegularizerError(f"{type(reg).__name__} is not supported by the DP")
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 1:
        raise DimensionError("y must be a non-empty vector")
    N = y.size
    cap = reg.cap
    seg_cost = {}
    for a in range(N):
        for b in range(a + 1, N + 1):
            x = _segment_fit(y[a:b], w)
            seg_cost[a, b] = (_segment_cost(y[a:b], x, w), x)

    # E[j] = (value, breaks) for the prefix y[:j]; break i sits between samples i and i+1 (1-based)
    E: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    for j in range(1, N + 1):
        best = None
        for i in range(j):
            v = E[i][0] + (cap if i > 0 else 0.0) + seg_cost[i, j][0]
            cand = (v, E[i][1] + ((i,) if i > 0 else ()))
            if best is None or _dp_better(cand, best):
                best = cand
        E.append(best)

    breaks = E[N][1]
    edges = (0,) + breaks + (N,)
    x = np.concatenate([seg_cost[a, b][1] for a, b in zip(edges, edges[1:])])
    obj = float(np.sum((x - y) ** 2) + np.sum(reg.value(np.diff(x))))
    return SolveResult(x, obj, breaks, "DP")


def _dp_better(cand, best) -> bool:
    tol = tie_tolerance(min(cand[0], best[0]))
    if cand[0] < best[0] - tol:
        return True
    if cand[0] > best[0] + tol:
        return False
    return (len(cand[1]), cand[1]) < (len(best[1]), best[1])


def is_identity_instance(inst: ProblemInstance) -> bool:
    A = inst.matrix
    return inst.form is Form.DIFFERENCE and A.shape[0] == A.shape[1] and np.array_equal(A, np.eye(A.shape[0]))


def solve_dp(inst: ProblemInstance) -> SolveResult:
    if not is_identity_instance(inst):
        raise ValueError("the DP solver requires a difference-form instance with the identity matrix")
    return solve_dp_identity(inst.observation, inst.regularizer)


def icm_descent(
    inst: ProblemInstance, initial_breaks: Iterable[int] = (), max_iters: int = 100, tol: float = 1e-12
) -> SolveResult:
    """One local descent: alternate quadratic solve and break classification.

    Stops at a fixpoint of the break set, when the objective stops
    decreasing by at least ``tol``, or after ``max_iters`` solves.  The best
    iterate is returned; ``history`` holds the objective after every solve.
    """
    B = _normalize_break_set(inst, initial_breaks)
    history = []
    best_x, best_obj = None, math.inf
    for _ in range(max_iters):
        x = solve_fixed_breaks(inst, B).minimizer
        obj = evaluate_objective(inst, x)
        if obj < best_obj:
            best_x, best_obj = x, obj
        stalled = bool(history) and history[-1] - obj < tol
        history.append(obj)
        new_B = classify_breaks(inst, x)
        if new_B == B or stalled:
            break
        B = new_B
    return SolveResult(best_x, best_obj, classify_breaks(inst, best_x), "LocalICM", tuple(history))


def solve_local_icm(inst: ProblemInstance, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Multistart local descent.

    The first start has no breaks; the others draw each term broken with
    probability 1/2 from ``numpy.random.default_rng(cfg.seed)`` (PCG64).
    """
    _weight(inst)
    rng = np.random.default_rng(cfg.seed)
    P = inst.n_penalties
    results = []
    for s in range(cfg.starts):
        B0 = () if s == 0 else tuple(int(j) + 1 for j in np.flatnonzero(rng.random(P) < 0.5))
        results.append(icm_descent(inst, B0, cfg.max_iters, cfg.tol))
    values = np.array([r.objective for r in results])
    best = values.min()
    cand = [r for r, v in zip(results, values) if v <= best + tie_tolerance(best)]
    return min(cand, key=lambda r: (len(r.break_set), r.break_set))
