"""Shared helpers: error-tracked numeric values and verification reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Approx:
    """A numeric value together with an absolute error bound.

    The bound is a best-effort estimate of truncation error (series tails,
    quadrature refinement deltas), not a rigorous enclosure.
    """

    value: float
    err: float = 0.0

    def __add__(self, other: "Approx | float | int") -> "Approx":
        if isinstance(other, Approx):
            return Approx(self.value + other.value, self.err + other.err)
        return Approx(self.value + other, self.err)

    __radd__ = __add__

    def __sub__(self, other: "Approx | float | int") -> "Approx":
        if isinstance(other, Approx):
            return Approx(self.value - other.value, self.err + other.err)
        return Approx(self.value - other, self.err)

    def __mul__(self, scalar: float | int) -> "Approx":
        return Approx(self.value * scalar, self.err * abs(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Approx":
        return Approx(-self.value, self.err)

    def agrees_with(self, target: float, tol: float) -> bool:
        """True when |value - target| <= tol + err."""
        return abs(self.value - target) <= tol + self.err


def _jsonable(x: Any) -> Any:
    # floats and arbitrary-precision values go out as decimal strings so the
    # JSON round-trips without binary-float surprises
    if isinstance(x, bool) or isinstance(x, int):
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, complex):
        return {"re": repr(x.real), "im": repr(x.imag)}
    if isinstance(x, Approx):
        return {"value": _jsonable(x.value), "err": _jsonable(x.err)}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if x is None or isinstance(x, str):
        return x
    return str(x)


@dataclass
class VerificationReport:
    """Outcome of checking one identity instance at a stated tolerance."""

    name: str
    params: dict = field(default_factory=dict)
    lhs: Any = None
    rhs: Any = None
    abs_diff: float = 0.0
    tol: float = 0.0
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": _jsonable(self.params),
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "abs_diff": _jsonable(self.abs_diff),
            "tol": _jsonable(self.tol),
            "passed": self.passed,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name} {self.params}: "
            f"|lhs-rhs| = {self.abs_diff:.3e} (tol {self.tol:.1e})"
        )
