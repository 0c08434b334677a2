from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np


class EmptySampleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Sample:
    values: np.ndarray
    weight: np.ndarray | None = None

    @classmethod
    def of(cls, values, weight=None) -> "Sample":
        if isinstance(values, Sample):
            return values
        vals = np.asarray(values, dtype=np.float64).ravel()
        if vals.size == 0:
            raise EmptySampleError("sample is empty")
        if weight is None:
            return cls(vals)
        w = np.asarray(weight, dtype=np.float64).ravel()
        if w.shape != vals.shape:
            raise ValueError(f"weight shape {w.shape} != values shape {vals.shape}")
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weights must be non-negative with positive total")
        return cls(vals, w)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def effective_size(self) -> float:
        if self.weight is None:
            return float(self.values.size)
        return float(self.weight.sum() ** 2 / np.square(self.weight).sum())


@dataclass(frozen=True)
class TestResult:
    """Outcome of a two-sample test; p_value decreases as statistic grows."""

    __test__ = False  # keep pytest from collecting this class

    method: str
    statistic: float
    p_value: float
    n1: int
    n2: int
    dof: int | None = None

    def passed(self, threshold: float) -> bool:
        return self.p_value > threshold

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        if self.dof is None:
            out.pop("dof")
        return out
