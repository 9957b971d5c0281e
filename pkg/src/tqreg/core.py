"""Domain types, per-coordinate regularizers and objective evaluation.

Penalty terms are indexed from 1, matching the way break positions are
reported everywhere else in the package: term ``j`` penalizes
``x[j+1] - x[j]`` (1-based) in the difference form, or coordinate ``u[j]``
in the direct form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

Number = Union[float, int, Fraction]


class DimensionError(ValueError):
    """Raised when vector or matrix shapes do not fit together."""


class InvalidRegularizerError(ValueError):
    """Raised for malformed or inadmissible regularizers."""


class UnsupportedRegularizerError(ValueError):
    """Raised when a solver cannot handle a regularizer kind exactly."""


# ---------------------------------------------------------------------------
# Regularizers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularizationParams:
    """Penalty scale ``alpha`` and truncation level ``beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        _check_positive("alpha", self.alpha)
        _check_positive("beta", self.beta)
        if not math.isfinite(math.sqrt(float(self.beta))):
            raise InvalidRegularizerError("sqrt(beta) is not representable")

    @property
    def threshold(self) -> float:
        return math.sqrt(float(self.beta))

    def regularizer(self) -> "TruncatedQuadratic":
        return TruncatedQuadratic(self.alpha, self.beta)


def _check_positive(name, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise InvalidRegularizerError(f"{name} must be a real number, got {value!r}")
    if not (v > 0 and math.isfinite(v)):
        raise InvalidRegularizerError(f"{name} must be positive and finite, got {value!r}")


class Regularizer:
    """Base class for the per-coordinate penalty family.

    Subclasses describe how a single penalty term behaves:

    ``cap``
        value of the term in its saturated ("broken") regime.
    ``weight``
        quadratic weight of the unbroken regime, ``math.inf`` when unbroken
        terms are forced to exactly zero (l0), or ``None`` when the penalty is
        not a truncated quadratic at all.  Solvers rely on this.
    """

    cap: float = 1.0

    @property
    def weight(self) -> float | None:
        return None

    def value(self, u):
        raise NotImplementedError

    def is_broken(self, u):
        raise NotImplementedError


@dataclass(frozen=True)
class TruncatedQuadratic(Regularizer):
    """``alpha * min(u**2, beta)``."""

    alpha: float
    beta: float

    def __post_init__(self):
        RegularizationParams(self.alpha, self.beta)

    @property
    def params(self) -> RegularizationParams:
        return RegularizationParams(self.alpha, self.beta)

    @property
    def weight(self) -> float:
        return float(self.alpha)

    @property
    def cap(self) -> float:
        return float(self.alpha) * float(self.beta)

    @property
    def threshold(self) -> float:
        return math.sqrt(float(self.beta))

    def value(self, u):
        a, b = float(self.alpha), float(self.beta)
        return a * np.minimum(np.square(u), b)

    def is_broken(self, u):
        # ties (u**2 == beta) count as broken
        return np.square(u) >= float(self.beta)


@dataclass(frozen=True)
class HardThreshold(Regularizer):
    """``min(1, u**2 / epsilon**2)``.

    Same family as :class:`TruncatedQuadratic` with ``alpha = 1/epsilon**2``
    and ``beta = epsilon**2``; ``epsilon`` may be a :class:`Fraction` so that
    reduction gadgets keep an exact form of it.
    """

    epsilon: Number

    def __post_init__(self):
        _check_positive("epsilon", self.epsilon)

    @property
    def alpha(self) -> float:
        return float(1 / Fraction(self.epsilon) ** 2)

    @property
    def beta(self) -> float:
        return float(Fraction(self.epsilon) ** 2)

    @property
    def weight(self) -> float:
        return self.alpha

    cap = 1.0

    @property
    def threshold(self) -> float:
        return float(self.epsilon)

    def value(self, u):
        eps = float(self.epsilon)
        return np.minimum(1.0, np.square(np.asarray(u, dtype=float) / eps))

    def is_broken(self, u):
        return np.abs(u) >= float(self.epsilon)

    def exact_value(self, u: Fraction) -> Fraction:
        return min(Fraction(1), Fraction(u) ** 2 / Fraction(self.epsilon) ** 2)


@dataclass(frozen=True)
class L0Indicator(Regularizer):
    """``|u|_0``: 0 at exactly zero, 1 elsewhere."""

    cap = 1.0

    @property
    def weight(self) -> float:
        return math.inf

    @property
    def threshold(self) -> float:
        return 0.0

    def value(self, u):
        return (np.asarray(u) != 0).astype(float)

    def is_broken(self, u):
        return np.asarray(u) != 0


@dataclass(frozen=True)
class Generalized(Regularizer):
    """Even, piecewise-linear penalty given by a table over ``|u|``.

    ``knots`` are increasing magnitudes starting at 0 and ``values`` the
    penalty there; beyond the last knot the last value is held.  A term is
    broken once ``|u|`` reaches the last knot.
    """

    knots: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        if len(knots) != len(values) or len(knots) < 2:
            raise InvalidRegularizerError("need at least two (knot, value) pairs of equal length")
        if knots[0] != 0.0 or values[0] != 0.0:
            raise InvalidRegularizerError("table must start at (0, 0)")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise InvalidRegularizerError("knots must be strictly increasing")
        if not all(math.isfinite(k) for k in knots):
            raise InvalidRegularizerError("knots must be finite")
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise InvalidRegularizerError("table values must lie in [0, 1]")

    @property
    def cap(self) -> float:
        return self.values[-1]

    @property
    def threshold(self) -> float:
        return self.knots[-1]

    def value(self, u):
        return np.interp(np.abs(np.asarray(u, dtype=float)), self.knots, self.values)

    def is_broken(self, u):
        return np.abs(u) >= self.knots[-1]


def eval_regularizer(r: Regularizer, u: float) -> float:
    """Penalty of a single term."""
    return float(r.value(u))


# ---------------------------------------------------------------------------
# Problem instances
# ---------------------------------------------------------------------------


class Form(str, enum.Enum):
    DIFFERENCE = "difference"  # ||A x - y||^2 + sum Q(x[j+1] - x[j])
    DIRECT = "direct"  # ||T u - y||^2 + sum Q(u[j])


def _frozen_array(a, ndim):
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A truncated-quadratic-type problem.

    ``dimension`` is the signal length N.  A difference-form matrix acts on
    ``x`` in R^N; a direct-form matrix acts on ``u`` in R^(N-1).  Both forms
    have N - 1 penalty terms.
    """

    form: Form
    matrix: np.ndarray
    observation: np.ndarray
    regularizer: Regularizer
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, 2))
        object.__setattr__(self, "observation", _frozen_array(self.observation, 1))
        if not isinstance(self.regularizer, Regularizer):
            raise InvalidRegularizerError(f"not a regularizer: {self.regularizer!r}")
        n = int(self.dimension)
        if n < 1 or (self.form is Form.DIRECT and n < 2):
            raise DimensionError(f"invalid dimension {n} for {self.form.value} form")
        object.__setattr__(self, "dimension", n)
        if self.matrix.shape[1] != self.n_vars:
            raise DimensionError(
                f"{self.form.value} form with N={n} needs {self.n_vars} columns, "
                f"matrix has {self.matrix.shape[1]}"
            )
        if self.matrix.shape[0] < 1:
            raise DimensionError("matrix needs at least one row")
        if self.observation.shape[0] != self.matrix.shape[0]:
            raise DimensionError(
                f"observation length {self.observation.shape[0]} != matrix rows {self.matrix.shape[0]}"
            )

    @classmethod
    def difference(cls, A, y, regularizer: Regularizer) -> "ProblemInstance":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return cls(Form.DIFFERENCE, A, y, regularizer, A.shape[1])

    @classmethod
    def direct(cls, T, y, regularizer: Regularizer) -> "ProblemInstance":
        T = np.atleast_2d(np.asarray(T, dtype=float))
        return cls(Form.DIRECT, T, y, regularizer, T.shape[1] + 1)

    @property
    def n_vars(self) -> int:
        return self.dimension if self.form is Form.DIFFERENCE else self.dimension - 1

    @property
    def n_penalties(self) -> int:
        return self.dimension - 1

    def penalty_operator(self) -> np.ndarray:
        """Matrix mapping the unknown to the penalized quantities."""
        if self.form is Form.DIRECT:
            return np.eye(self.n_vars)
        return np.diff(np.eye(self.dimension), axis=0)

    def penalized(self, v) -> np.ndarray:
        v = self._check_vector(v)
        return np.diff(v) if self.form is Form.DIFFERENCE else v

    def residual(self, v) -> np.ndarray:
        v = self._check_vector(v)
        return self.matrix @ v - self.observation

    def _check_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_vars,):
            raise DimensionError(
                f"expected vector of length {self.n_vars} for {self.form.value} form, got shape {v.shape}"
            )
        return v


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Minimizer, its objective value and break set (1-based term indices)."""

    minimizer: np.ndarray
    objective: float
    break_set: tuple[int, ...]
    solver: str
    history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "minimizer", _frozen_array(self.minimizer, 1))
        object.__setattr__(self, "objective", float(self.objective))
        object.__setattr__(self, "break_set", tuple(sorted(int(j) for j in self.break_set)))

    def same_as(self, other: "SolveResult") -> bool:
        """Bitwise equality, used for determinism checks."""
        return (
            self.solver == other.solver
            and self.break_set == other.break_set
            and self.objective == other.objective
            and self.history == other.history
            and np.array_equal(self.minimizer, other.minimizer)
        )


def evaluate_objective(inst: ProblemInstance, v: Sequence[float]) -> float:
    """``||M v - y||^2`` plus the penalty summed over all terms."""
    r = inst.residual(v)
    terms = inst.regularizer.value(inst.penalized(v))
    return float(r @ r + np.sum(terms))


def classify_breaks(inst: ProblemInstance, v: Sequence[float]) -> tuple[int, ...]:
    """1-based indices of penalty terms in their truncated regime."""
    broken = np.atleast_1d(inst.regularizer.is_broken(inst.penalized(v)))
    return tuple(int(j) + 1 for j in np.flatnonzero(broken))


def fixed_break_objective(inst: ProblemInstance, v, break_set) -> float:
    """Value of the quadratic member ``J_B`` at ``v``.

    Broken terms pay the cap, unbroken terms pay ``weight * u**2`` (or are
    infinite unless exactly zero for the l0 penalty).
    """
    w = inst.regularizer.weight
    if w is None:
        raise UnsupportedRegularizerError(f"{type(inst.regularizer).__name__} has no quadratic branch")
    r = inst.residual(v)
    u = inst.penalized(v)
    broken = np.zeros(inst.n_penalties, dtype=bool)
    broken[[j - 1 for j in break_set]] = True
    smooth = u[~broken]
    if math.isinf(w):
        pen = 0.0 if not np.any(smooth) else math.inf
    else:
        pen = w * float(smooth @ smooth)
    return float(r @ r + pen + inst.regularizer.cap * int(broken.sum()))

