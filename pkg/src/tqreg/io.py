"""Canonical JSON for instances, reduction metadata and run reports.

Canonical text: sorted keys, no whitespace, doubles as ``%.17g``, exact
rationals as ``{"num": int, "den": int}``, trailing newline.  Parsing and
re-serializing a canonical file reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .core import (
    Form,
    Generalized,
    HardThreshold,
    L0Indicator,
    ProblemInstance,
    Regularizer,
    SolveResult,
    TruncatedQuadratic,
)
from .reduction import Decision, ReductionArtifact

SCHEMA_VERSION = 1


class FormatError(ValueError):
    """Raised for files that do not follow the instance or report schema."""


def _dump(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return _dump({"num": obj.numerator, "den": obj.denominator})
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise FormatError(f"non-finite number {x} cannot be serialized")
        if x == 0:
            x = 0.0  # drop the sign of negative zero
        return "%.17g" % x
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + _dump(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_dump(v) for v in obj) + "]"
    raise FormatError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(obj: Any) -> str:
    return _dump(obj) + "\n"


def number(v) -> float | Fraction:
    """Inverse of the rational encoding; plain numbers pass through."""
    if isinstance(v, dict):
        if set(v) != {"num", "den"}:
            raise FormatError(f"rational must have exactly num and den, got {sorted(v)}")
        return Fraction(int(v["num"]), int(v["den"]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"expected a number, got {v!r}")
    return v


def _exact_or_float(v):
    return v if isinstance(v, Fraction) else float(v)


def regularizer_to_dict(r: Regularizer) -> dict:
    if isinstance(r, TruncatedQuadratic):
        return {"kind": "truncated_quadratic", "alpha": _exact_or_float(r.alpha), "beta": _exact_or_float(r.beta)}
    if isinstance(r, HardThreshold):
        return {"kind": "hard_threshold", "epsilon": _exact_or_float(r.epsilon)}
    if isinstance(r, L0Indicator):
        return {"kind": "l0"}
    if isinstance(r, Generalized):
        return {"kind": "generalized", "knots": list(r.knots), "values": list(r.values)}
    raise FormatError(f"unknown regularizer {r!r}")


def regularizer_from_dict(d: dict) -> Regularizer:
    kind = d.get("kind")
    try:
        if kind == "truncated_quadratic":
            return TruncatedQuadratic(number(d["alpha"]), number(d["beta"]))
        if kind == "hard_threshold":
            return HardThreshold(number(d["epsilon"]))
        if kind == "l0":
            return L0Indicator()
        if kind == "generalized":
            return Generalized(tuple(d["knots"]), tuple(d["values"]))
    except KeyError as e:
        raise FormatError(f"regularizer {kind!r} is missing {e}") from None
    raise FormatError(f"unknown regularizer kind {kind!r}")


def instance_to_dict(inst: ProblemInstance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "form": inst.form.value,
        "matrix": inst.matrix.tolist(),
        "observation": inst.observation.tolist(),
        "regularizer": regularizer_to_dict(inst.regularizer),
        "dimension": inst.dimension,
    }


def instance_from_dict(d: dict) -> ProblemInstance:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"unsupported schema_version {d.get('schema_version')!r}")
    try:
        return ProblemInstance(
            Form(d["form"]),
            np.array(d["matrix"], dtype=float),
            np.array(d["observation"], dtype=float),
            regularizer_from_dict(d["regularizer"]),
            int(d["dimension"]),
        )
    except KeyError as e:
        raise FormatError(f"instance file is missing {e}") from None


def dumps_instance(inst: ProblemInstance) -> str:
    return canonical_dumps(instance_to_dict(inst))


def loads_instance(text: str) -> ProblemInstance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from None
    if not isinstance(d, dict):
        raise FormatError("instance file must hold a JSON object")
    return instance_from_dict(d)


def read_instance(path) -> ProblemInstance:
    return loads_instance(Path(path).read_text())


def reduction_metadata(art: ReductionArtifact) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "a": list(art.subset_sum.a),
        "C": art.subset_sum.C,
        "k": art.k,
        "epsilon": art.epsilon,
        "P": art.P,
        "gap_low": art.gap_low,
        "gap_high": art.gap_high,
        "threshold": art.threshold,
    }


def sidecar_path(path) -> Path:
    p = Path(path)
    stem = p.name[: -len(p.suffix)] if p.suffix else p.name
    return p.with_name(stem + ".meta.json")


@dataclass
class RunReport:
    objective: float
    minimizer: list
    break_set: list
    solver: str
    wall_time_ms: float
    seed: int
    decision: dict | None = field(default=None)

    @classmethod
    def from_result(cls, res: SolveResult, wall_time_ms: float, seed: int, decision: Decision | None = None):
        return cls(
            res.objective,
            res.minimizer.tolist(),
            list(res.break_set),
            res.solver,
            wall_time_ms,
            seed,
            None if decision is None else decision_to_dict(decision),
        )

    def to_dict(self) -> dict:
        d = {
            "objective": float(self.objective),
            "minimizer": [float(v) for v in self.minimizer],
            "break_set": list(self.break_set),
            "solver": self.solver,
            "wall_time_ms": float(self.wall_time_ms),
            "seed": int(self.seed),
        }
        if self.decision is not None:
            d["decision"] = self.decision
        return d

    def dumps(self) -> str:
        return canonical_dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "RunReport":
        d = json.loads(text)
        return cls(
            d["objective"], d["minimizer"], d["break_set"], d["solver"], d["wall_time_ms"], d["seed"], d.get("decision")
        )


def decision_to_dict(dec: Decision) -> dict:
    cert = None
    if dec.certificate is not None:
        c = dec.certificate
        cert = {"subset": list(c.subset), "sum": c.sum, "target": c.target}
    return {"answer": dec.answer.value, "certificate": cert}


def read_signal_csv(path) -> np.ndarray:
    """One number per line; a non-numeric first line is taken as a header."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if lines:
        try:
            float(lines[0].split(",")[0])
        except ValueError:
            lines = lines[1:]
    try:
        values = [float(ln.split(",")[0]) for ln in lines]
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from None
    if not values:
        raise FormatError(f"{path}: no samples")
    return np.array(values)
