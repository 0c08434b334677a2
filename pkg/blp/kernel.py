"""
Branching-like processes: the directed edge local time profile at a return
time lambda_{x,m}, read site by site away from x.

Forward   zeta~_k = E_{x+k,+}: homogeneous; zeta~_{k+1} is the red count of a
          positive-site urn at its zeta~_k-th blue.
Backward  zeta_k  = E_{x-k,-}: the blue count of an urn stopped at a red time,
          the urn's sign and target depending on where k sits relative to x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from experiments.defaults import MAX_DRAWS
from urn import draw_until
from weights import SiteSign, WeightSpec, WeightTable, weight_table


class Variant(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class BlpKernel:
    spec: WeightSpec
    variant: Variant
    anchor: int = 0
    max_draws: int = MAX_DRAWS

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.anchor < 0:
            raise ValueError(f"anchor must be >= 0, got {self.anchor}")

    @property
    def table(self) -> WeightTable:
        return weight_table(self.spec)

    def backward_regime(self, k: int) -> tuple[SiteSign, int]:
        """(urn sign, red target offset) for the step k -> k+1 of the backward chain."""
        x = self.anchor
        if k < x - 1:
            return SiteSign.POSITIVE, 1
        if k == x - 1:
            return SiteSign.ZERO, 1
        return SiteSign.NEGATIVE, 0


@dataclass(frozen=True)
class Extracted:
    x: int
    m: int


@dataclass(frozen=True)
class Simulated:
    seed: int | None


@dataclass(frozen=True, eq=False)
class BlpTrace:
    values: np.ndarray
    origin: Extracted | Simulated
    variant: Variant = Variant.FORWARD
    truncated: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.values.size)

    def first_zero(self) -> int | None:
        hits = np.flatnonzero(self.values == 0)
        return int(hits[0]) if hits.size else None

    def absorption_holds(self) -> bool:
        """Once 0, always 0."""
        k = self.first_zero()
        return k is None or not np.any(self.values[k:])


def step_forward(kernel: BlpKernel, i: int, rng: np.random.Generator) -> int:
    """Reds drawn by a positive-site urn before its i-th blue."""
    if kernel.variant is not Variant.FORWARD:
        raise ValueError("step_forward needs a Forward kernel")
    if i < 0:
        raise ValueError(f"i must be non-negative, got {i}")
    if i == 0:
        return 0
    counts = np.zeros(2, dtype=np.int64)
    draw_until(kernel.table, SiteSign.POSITIVE, counts, i, True, rng, kernel.max_draws)
    return int(counts[1])


def step_backward(kernel: BlpKernel, k: int, i: int, rng: np.random.Generator) -> int:
    """Blues drawn by the urn of step k before its (i + offset)-th red."""
    if kernel.variant is not Variant.BACKWARD:
        raise ValueError("step_backward needs a Backward kernel")
    if i < 0 or k < 0:
        raise ValueError(f"k and i must be non-negative, got k={k}, i={i}")
    sign, offset = kernel.backward_regime(k)
    target = i + offset
    if target == 0:
        return 0
    counts = np.zeros(2, dtype=np.int64)
    draw_until(kernel.table, sign, counts, target, False, rng, kernel.max_draws)
    return int(counts[0])


def simulate(kernel: BlpKernel, start: int, steps: int, rng=None) -> BlpTrace:
    """zeta_0 = start, then `steps` transitions."""
    if start < 0 or steps < 0:
        raise ValueError(f"start and steps must be non-negative, got {start}, {steps}")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    values = np.zeros(steps + 1, dtype=np.int64)
    values[0] = start
    forward = kernel.variant is Variant.FORWARD
    for k in range(steps):
        i = int(values[k])
        if forward:
            if i == 0:
                break
            values[k + 1] = step_forward(kernel, i, rng)
        else:
            values[k + 1] = step_backward(kernel, k, i, rng)
    values.flags.writeable = False
    return BlpTrace(values, Simulated(seed), kernel.variant)
