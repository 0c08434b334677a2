from __future__ import annotations

import math

import numpy as np


class RunningSummary:
    """Running count/mean/variance/extrema; partial summaries merge associatively."""

    def __init__(self, label: str = ""):
        self.label = label
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.min = math.inf
        self.max = -math.inf

    def record(self, value: float):
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)
        if value < self.min:
            self.min = value
        if value > self.max:
            self.max = value

    def record_many(self, values):
        x = np.asarray(values, dtype=np.float64).ravel()
        if x.size == 0:
            return
        other = RunningSummary()
        other.count = int(x.size)
        other.mean = float(x.mean())
        other.m2 = float(np.square(x - other.mean).sum())
        other.min = float(x.min())
        other.max = float(x.max())
        self.merge(other)

    def merge(self, other: "RunningSummary") -> "RunningSummary":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            self.min, self.max = other.min, other.max
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean = (self.count * self.mean + other.count * other.mean) / n
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.count = n
        self.min = min(self.min, other.min)
        self.max = max(self.max, other.max)
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def se(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else 0.0

    def to_dict(self) -> dict:
        return {
            "label": self.label, "count": self.count, "mean": self.mean,
            "se": self.se, "min": self.min if self.count else None,
            "max": self.max if self.count else None,
        }

    def dump(self):
        print("=" * 60, flush=True)
        print(f"  SUMMARY {self.label}".rstrip(), flush=True)
        print("=" * 60, flush=True)
        print(f"  count: {self.count}", flush=True)
        if self.count:
            print(f"  mean:  {self.mean:.6g}  (se {self.se:.3g})", flush=True)
            print(f"  range: [{self.min:.6g}, {self.max:.6g}]", flush=True)
        print("=" * 60, flush=True)
