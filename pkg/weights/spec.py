"""
Weight families w(n) for the self-interacting walk, their validation, and the
urn weight sequences (b, r) derived from them.

JSON form (field names are fixed):
    {"family": "constant"}
    {"family": "power_law", "p": 0.5, "B": 0.2}
    {"family": "once_reinforced", "gamma0": 0.5}
    {"family": "tabulated", "table": [2.0, 1.5, 1.2]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import lru_cache
from pathlib import Path

import numpy as np

import schemas


class Family(str, Enum):
    CONSTANT = "constant"
    POWER_LAW = "power_law"
    ONCE_REINFORCED = "once_reinforced"
    TABULATED = "tabulated"


class SiteSign(IntEnum):
    """Sign of a site; ordered Negative < Zero < Positive."""

    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1

    @classmethod
    def of(cls, y: int) -> "SiteSign":
        return cls((y > 0) - (y < 0))

    @classmethod
    def parse(cls, name: str) -> "SiteSign":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown site sign {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


# ----------------------------
# Errors / reports
# ----------------------------
@dataclass(frozen=True)
class Violation:
    prop: str            # "positivity" | "monotonicity" | "limit" | "range"
    n: int | None        # offending index, None when not index-specific
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"property": v.prop, "n": v.n, "message": v.message}
                for v in self.violations
            ],
        }


class SpecViolationError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        details = "; ".join(v.message for v in report.violations)
        super().__init__(f"invalid weight spec: {details}")


# ----------------------------
# WeightSpec
# ----------------------------
@dataclass(frozen=True)
class WeightSpec:
    family: Family
    p: float = 0.0
    B: float = 0.0
    gamma0: float = 0.0
    table: tuple[float, ...] = field(default=())

    @classmethod
    def constant(cls) -> "WeightSpec":
        return cls(Family.CONSTANT)

    @classmethod
    def power_law(cls, p: float, B: float) -> "WeightSpec":
        return cls(Family.POWER_LAW, p=float(p), B=float(B))

    @classmethod
    def once_reinforced(cls, gamma0: float) -> "WeightSpec":
        return cls(Family.ONCE_REINFORCED, gamma0=float(gamma0))

    @classmethod
    def tabulated(cls, table) -> "WeightSpec":
        return cls(Family.TABULATED, table=tuple(float(v) for v in table))

    @property
    def coef(self) -> float:
        """2^p * B, the PowerLaw amplitude."""
        return 2.0 ** self.p * self.B

    def to_dict(self) -> dict:
        out: dict = {"family": self.family.value}
        if self.family is Family.POWER_LAW:
            out["p"] = self.p
            out["B"] = self.B
        elif self.family is Family.ONCE_REINFORCED:
            out["gamma0"] = self.gamma0
        elif self.family is Family.TABULATED:
            out["table"] = list(self.table)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "WeightSpec":
        errors = schemas.check("WEIGHT_SPEC", data)
        if errors:
            report = ValidationReport(tuple(
                Violation("schema", None, e) for e in errors))
            raise SpecViolationError(report)
        family = Family(data["family"])
        if family is Family.POWER_LAW:
            return cls.power_law(data["p"], data["B"])
        if family is Family.ONCE_REINFORCED:
            return cls.once_reinforced(data["gamma0"])
        if family is Family.TABULATED:
            return cls.tabulated(data["table"])
        return cls.constant()

    def label(self) -> str:
        if self.family is Family.POWER_LAW:
            return f"power_law(p={self.p:g},B={self.B:g})"
        if self.family is Family.ONCE_REINFORCED:
            return f"once_reinforced(gamma0={self.gamma0:g})"
        if self.family is Family.TABULATED:
            return f"tabulated({','.join(f'{v:g}' for v in self.table)})"
        return "constant"


def load_spec(path: str | Path) -> WeightSpec:
    with open(path) as f:
        return WeightSpec.from_dict(json.load(f))


def dump_spec(spec: WeightSpec, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(spec.to_dict(), f, indent=2)


# ----------------------------
# Validation
# ----------------------------
def _monotone_break(seq: list[float]) -> int | None:
    """Index of the first entry that breaks monotonicity, or None."""
    direction = 0
    for i in range(1, len(seq)):
        step = (seq[i] > seq[i - 1]) - (seq[i] < seq[i - 1])
        if step == 0:
            continue
        if direction == 0:
            direction = step
        elif step != direction:
            return i
    return None


def validate(spec: WeightSpec) -> ValidationReport:
    """Check positivity, monotonicity and the limit w(n) -> 1."""
    found: list[Violation] = []
    fam = spec.family

    if fam is Family.POWER_LAW:
        if not (math.isfinite(spec.p) and 0.0 < spec.p <= 1.0):
            found.append(Violation("range", None, f"p={spec.p} outside (0, 1]"))
        if not math.isfinite(spec.B):
            found.append(Violation("range", None, f"B={spec.B} is not finite"))
        elif math.isfinite(spec.p) and 1.0 + spec.coef <= 0.0:
            # (n+1)^-p is largest at n=0, so n=0 is the binding index
            found.append(Violation(
                "positivity", 0,
                f"1 + 2^p*B*(n+1)^-p = {1.0 + spec.coef:g} <= 0 at n=0"))

    elif fam is Family.ONCE_REINFORCED:
        if not (math.isfinite(spec.gamma0) and spec.gamma0 < 1.0):
            found.append(Violation(
                "positivity", 0, f"gamma0={spec.gamma0} must be < 1"))

    elif fam is Family.TABULATED:
        for i, v in enumerate(spec.table):
            if not (math.isfinite(v) and v > 0.0):
                found.append(Violation("positivity", i, f"table[{i}]={v} is not positive"))
        if not found:
            brk = _monotone_break(list(spec.table) + [1.0])
            if brk is not None:
                found.append(Violation(
                    "monotonicity", brk,
                    f"table with tail 1 changes direction at n={brk}"))

    return ValidationReport(tuple(found))


@lru_cache(maxsize=256)
def ensure_valid(spec: WeightSpec) -> WeightSpec:
    report = validate(spec)
    if not report.ok:
        raise SpecViolationError(report)
    return spec


# ----------------------------
# Evaluation
# ----------------------------
def eval_w(spec: WeightSpec, n: int) -> float:
    ensure_valid(spec)
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    fam = spec.family
    if fam is Family.POWER_LAW:
        return 1.0 / (1.0 + spec.coef * (n + 1.0) ** (-spec.p))
    if fam is Family.ONCE_REINFORCED:
        return 1.0 / (1.0 - spec.gamma0) if n == 0 else 1.0
    if fam is Family.TABULATED:
        return spec.table[n] if n < len(spec.table) else 1.0
    return 1.0


def w_values(spec: WeightSpec, n) -> np.ndarray:
    """Vectorised eval_w over an integer array."""
    ensure_valid(spec)
    n = np.asarray(n, dtype=np.int64)
    if np.any(n < 0):
        raise ValueError("n must be non-negative")
    fam = spec.family
    if fam is Family.POWER_LAW:
        return 1.0 / (1.0 + spec.coef * (n + 1.0) ** (-spec.p))
    out = np.ones(n.shape, dtype=np.float64)
    if fam is Family.ONCE_REINFORCED:
        out[n == 0] = 1.0 / (1.0 - spec.gamma0)
    elif fam is Family.TABULATED and spec.table:
        table = np.asarray(spec.table, dtype=np.float64)
        inside = n < table.size
        out[inside] = table[n[inside]]
    return out


def urn_weights(spec: WeightSpec, sign: SiteSign, k: int) -> tuple[float, float]:
    """(b(k), r(k)) for the urn at a site of the given sign."""
    if sign is SiteSign.POSITIVE:
        return eval_w(spec, 2 * k + 1), eval_w(spec, 2 * k)
    if sign is SiteSign.NEGATIVE:
        return eval_w(spec, 2 * k), eval_w(spec, 2 * k + 1)
    w = eval_w(spec, 2 * k)
    return w, w


def weight_bounds(spec: WeightSpec) -> tuple[float, float]:
    """(inf_n w(n), sup_n w(n)); monotone with limit 1 so only w(0) and 1 matter."""
    ensure_valid(spec)
    if spec.family is Family.TABULATED:
        vals = list(spec.table) + [1.0]
        return min(vals), max(vals)
    w0 = eval_w(spec, 0)
    return min(w0, 1.0), max(w0, 1.0)
