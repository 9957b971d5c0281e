"""Discrete difference operator, its pseudo-inverse, and the maps between
the direct and difference forms of the problem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, Form, ProblemInstance


@dataclass(frozen=True)
class DifferenceOperator:
    """``D: R^n -> R^(n-1)``, ``(Dx)_j = x[j+1] - x[j]``."""

    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise DimensionError(f"signal length must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def matrix(self) -> np.ndarray:
        return np.diff(np.eye(self.n), axis=0)

    def pinv_matrix(self) -> np.ndarray:
        cols = [apply_D_pinv(self, e) for e in np.eye(self.n - 1)]
        return np.array(cols).T if cols else np.zeros((self.n, 0))


def _check(v, length, what):
    v = np.asarray(v, dtype=float)
    if v.shape != (length,):
        raise DimensionError(f"{what}: expected length {length}, got shape {v.shape}")
    return v


def apply_D(op: DifferenceOperator, x) -> np.ndarray:
    x = _check(x, op.n, "apply_D")
    return np.diff(x)


def apply_D_pinv(op: DifferenceOperator, u) -> np.ndarray:
    """Zero-mean preimage of ``u`` under D.

    The cumulative sum gives a preimage starting at 0; subtracting its mean
    projects out the constants, which is exactly the minimum-norm one.
    """
    u = _check(u, op.n - 1, "apply_D_pinv")
    x = np.concatenate(([0.0], np.cumsum(u)))
    return x - x.mean()


def lift_direct_to_difference(inst: ProblemInstance) -> ProblemInstance:
    """Rewrite ``||T u - y||^2 + sum Q(u_j)`` as a difference-form problem with matrix ``T D``."""
    if inst.form is not Form.DIRECT:
        raise ValueError("lift_direct_to_difference expects a direct-form instance")
    D = DifferenceOperator(inst.dimension).matrix()
    return ProblemInstance(Form.DIFFERENCE, inst.matrix @ D, inst.observation, inst.regularizer, inst.dimension)


def map_minimizer(direction: str, v) -> np.ndarray:
    """Carry a minimizer between forms.

    ``direction`` is ``"direct->difference"`` (returns ``D^+ v``) or
    ``"difference->direct"`` (returns ``D v``).
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if direction == "direct->difference":
        return apply_D_pinv(DifferenceOperator(v.size + 1), v)
    if direction == "difference->direct":
        if v.size < 1:
            raise DimensionError("empty signal")
        return apply_D(DifferenceOperator(v.size), v)
    raise ValueError(f"unknown direction {direction!r}")
