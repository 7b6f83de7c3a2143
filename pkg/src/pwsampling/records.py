"""Verification records and JSON serialisation helpers."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

# Relative slack allowed when checking an inequality lhs <= rhs numerically.
REL_TOL = 1e-9


def jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses / numpy values into JSON-safe data.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return jsonable(obj.to_dict())
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any, indent: int | None = 2) -> str:
    return json.dumps(jsonable(obj), indent=indent, allow_nan=False)


@dataclass
class VerificationRecord:
    """Numerical check of an inequality ``lhs <= rhs``.

    ``slack = rhs - lhs``; the check passes when
    ``slack >= -REL_TOL * max(1, |rhs|)``.
    """

    name: str
    lhs: float
    rhs: float
    constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return float(self.rhs - self.lhs)

    @property
    def passed(self) -> bool:
        return passes(self.lhs, self.rhs)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "passed": self.passed,
            "constants": self.constants,
            "details": self.details,
        }


def passes(lhs: float, rhs: float, rel: float = REL_TOL) -> bool:
    if math.isinf(rhs) and rhs > 0:
        return True
    return bool(rhs - lhs >= -rel * max(1.0, abs(rhs)))


@dataclass
class SandwichRecord:
    """Numerical check of ``lower <= value <= upper``."""

    name: str
    lower: float
    value: float
    upper: float
    constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return passes(self.lower, self.value) and passes(self.value, self.upper)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lower": self.lower,
            "value": self.value,
            "upper": self.upper,
            "slack_lower": self.value - self.lower,
            "slack_upper": self.upper - self.value,
            "passed": self.passed,
            "constants": self.constants,
            "details": self.details,
        }
