"""
The self-interacting random walk: from X_k with undirected edge local times
l = l_x^k (edge {x-1, x}) and r = r_x^k (edge {x, x+1}) the walk jumps right
with probability w(r) / (w(l) + w(r)). Its drift increment
(w(r) - w(l)) / (w(l) + w(r)) is accumulated into Gamma_k, so that
X_k = M_k + Gamma_k with M a martingale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from experiments.defaults import CHUNK_STEPS, MAX_RECORDED_STEPS
from walk.kernel import advance_walk
from weights import WeightSpec, WeightTable, gamma, weight_table

INITIAL_CAPACITY = 1024


class MemoryBudgetError(RuntimeError):
    pass


class MissingReturnTime(LookupError):
    pass


# ----------------------------
# State
# ----------------------------
class WalkState:
    """Offset-indexed dense counters over an interval containing the range."""

    def __init__(self, gamma_value: float = 0.0, capacity: int = INITIAL_CAPACITY):
        capacity = max(int(capacity), 8)
        self.offset = capacity // 2
        self.up = np.zeros(capacity, dtype=np.int64)
        self.down = np.zeros(capacity, dtype=np.int64)
        self.visits = np.zeros(capacity, dtype=np.int64)
        self.site_drift = np.zeros(capacity, dtype=np.float64)
        self.visits[self.offset] = 1
        self.ints = np.zeros(4, dtype=np.int64)
        self.floats = np.zeros(5, dtype=np.float64)
        self.floats[4] = gamma_value

    # -- scalar views --
    @property
    def pos(self) -> int:
        return int(self.ints[0])

    @property
    def smax(self) -> int:
        return int(self.ints[1])

    @property
    def imin(self) -> int:
        return int(self.ints[2])

    @property
    def step(self) -> int:
        return int(self.ints[3])

    @property
    def drift_acc(self) -> float:
        return float(self.floats[0])

    @property
    def qv_sum(self) -> float:
        return float(self.floats[2])

    @property
    def sup_drift_dev(self) -> float:
        return float(self.floats[3])

    @property
    def gamma_value(self) -> float:
        return float(self.floats[4])

    # -- site lookups --
    def _at(self, arr: np.ndarray, x: int):
        i = x + self.offset
        if 0 <= i < arr.size:
            return arr[i]
        return 0

    def directed(self, x: int, direction: int) -> int:
        """Jumps x -> x+direction so far."""
        return int(self._at(self.up if direction > 0 else self.down, x))

    def edge_l(self, x: int) -> int:
        return int(self._at(self.down, x) + self._at(self.up, x - 1))

    def edge_r(self, x: int) -> int:
        return int(self._at(self.up, x) + self._at(self.down, x + 1))

    def site_visits(self, x: int) -> int:
        return int(self._at(self.visits, x))

    def local_drift_at(self, x: int) -> float:
        return float(self._at(self.site_drift, x))

    def sites(self) -> np.ndarray:
        return np.arange(self.imin, self.smax + 1)

    def range_view(self, arr: np.ndarray) -> np.ndarray:
        """Slice of a per-site array over [imin, smax]."""
        return arr[self.imin + self.offset: self.smax + self.offset + 1]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(edge_l, edge_r) over [imin, smax]."""
        lo, hi = self.imin + self.offset, self.smax + self.offset
        edge_l = self.down[lo:hi + 1] + self.up[lo - 1:hi]
        edge_r = self.up[lo:hi + 1] + self.down[lo + 1:hi + 2]
        return edge_l, edge_r

    # -- maintenance --
    def grow(self):
        size = self.up.size
        shift = size // 2
        for name in ("up", "down", "visits", "site_drift"):
            old = getattr(self, name)
            new = np.zeros(2 * size, dtype=old.dtype)
            new[shift:shift + size] = old
            setattr(self, name, new)
        self.offset += shift

    def freeze(self) -> "WalkState":
        for arr in (self.up, self.down, self.visits, self.site_drift, self.ints, self.floats):
            arr.flags.writeable = False
        return self

    def consistency_errors(self) -> list[str]:
        errors = []
        k = self.step
        if int(self.visits.sum()) != k + 1:
            errors.append(f"sum of site visits {int(self.visits.sum())} != k+1 = {k + 1}")
        if int(self.up.sum() + self.down.sum()) != k:
            errors.append("directed jump counts do not sum to k")
        if not self.imin <= self.pos <= self.smax:
            errors.append(f"position {self.pos} outside [{self.imin}, {self.smax}]")
        if self.imin > 0 or self.smax < 0:
            errors.append("range does not contain 0")
        return errors


@dataclass(frozen=True)
class RecordOptions:
    positions: bool = False
    increments: bool = False
    checkpoints: tuple[int, ...] = ()
    max_steps: int = MAX_RECORDED_STEPS

    @classmethod
    def full(cls, checkpoints: tuple[int, ...] = ()) -> "RecordOptions":
        return cls(positions=True, increments=True, checkpoints=checkpoints)


@dataclass(frozen=True, eq=False)
class StepRecord:
    moved_right: bool
    increment: float
    p_right: float


@dataclass(frozen=True, eq=False)
class WalkTrace:
    spec: WeightSpec
    n_steps: int
    seed: int | None
    gamma_value: float
    state: WalkState
    positions: np.ndarray | None = None
    increments: np.ndarray | None = None
    checkpoints: dict[int, int] = field(default_factory=dict)

    @property
    def final_position(self) -> int:
        return self.state.pos

    @property
    def drift_acc(self) -> float:
        return self.state.drift_acc

    @property
    def martingale(self) -> float:
        return self.state.pos - self.state.drift_acc

    def drift_path(self) -> np.ndarray:
        """Gamma_k for k = 0..n (plain cumulative sum)."""
        if self.increments is None:
            raise ValueError("increments were not recorded")
        return np.concatenate(([0.0], np.cumsum(self.increments)))

    def martingale_path(self) -> np.ndarray:
        if self.positions is None:
            raise ValueError("positions were not recorded")
        return self.positions - self.drift_path()

    def step_directions(self) -> np.ndarray:
        """1 for a right step, 0 for a left step."""
        if self.positions is None:
            raise ValueError("positions were not recorded")
        return (np.diff(self.positions) > 0).astype(np.uint8)


# ----------------------------
# Simulation
# ----------------------------
def _as_table(spec: WeightSpec | WeightTable) -> WeightTable:
    return spec if isinstance(spec, WeightTable) else weight_table(spec)


def _advance(state: WalkState, table: WeightTable, uniforms: np.ndarray,
             positions: np.ndarray, increments: np.ndarray, out0: int,
             record_pos: bool, record_inc: bool,
             stop_site: int = 0, stop_count: int = 0) -> int:
    """Run the kernel over `uniforms`, growing the arrays as needed.

    Returns the number of uniforms used (fewer than given only when the
    stop condition fired).
    """
    memo, power, p, coef = table.kernel_args()
    j = 0
    while j < uniforms.size:
        used = advance_walk(uniforms[j:], state.up, state.down, state.visits,
                            state.site_drift, state.offset, state.ints, state.floats,
                            memo, power, p, coef, positions, increments,
                            out0 + j, record_pos, record_inc, stop_site, stop_count)
        j += used
        if stop_count > 0 and state.pos == stop_site and state.site_visits(stop_site) >= stop_count:
            break
        if j < uniforms.size:
            state.grow()
    return j


def step(state: WalkState, spec: WeightSpec | WeightTable,
         rng: np.random.Generator) -> StepRecord:
    """One step of the walk, mutating `state`."""
    table = _as_table(spec)
    x = state.pos
    wl = table.w(state.edge_l(x))
    wr = table.w(state.edge_r(x))
    pos_buf = np.zeros(2, dtype=np.int64)
    inc_buf = np.zeros(1, dtype=np.float64)
    u = np.array([rng.random()])
    _advance(state, table, u, pos_buf, inc_buf, 0, True, True)
    return StepRecord(bool(pos_buf[1] > x), float(inc_buf[0]), wr / (wl + wr))


def run(spec: WeightSpec, n_steps: int, record: RecordOptions | None = None,
        rng=None, gamma_value: float | None = None,
        chunk: int = CHUNK_STEPS) -> WalkTrace:
    """Simulate n_steps of the walk.

    `rng` is a numpy Generator or an integer seed; the trace is a
    deterministic function of (spec, n_steps, seed).
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    record = record or RecordOptions()
    if (record.positions or record.increments) and n_steps > record.max_steps:
        raise MemoryBudgetError(
            f"recording {n_steps} steps exceeds the cap of {record.max_steps}")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    table = weight_table(spec)
    gam = gamma(spec) if gamma_value is None else float(gamma_value)

    state = WalkState(gamma_value=gam)
    positions = np.zeros(n_steps + 1 if record.positions else 0, dtype=np.int64)
    increments = np.zeros(n_steps if record.increments else 0, dtype=np.float64)

    marks = sorted({int(c) for c in record.checkpoints if 0 <= c <= n_steps})
    captured: dict[int, int] = {}
    if marks and marks[0] == 0:
        captured[0] = 0
    pending = [c for c in marks if c > 0]

    done = 0
    while done < n_steps:
        stop = min(done + chunk, n_steps)
        if pending and pending[0] < stop:
            stop = pending[0]
        uniforms = rng.random(stop - done)
        _advance(state, table, uniforms, positions, increments, done,
                 record.positions, record.increments)
        done = stop
        if pending and pending[0] == done:
            captured[pending.pop(0)] = state.pos

    if record.positions:
        positions.flags.writeable = False
    if record.increments:
        increments.flags.writeable = False
    return WalkTrace(
        spec=spec,
        n_steps=n_steps,
        seed=seed,
        gamma_value=gam,
        state=state.freeze(),
        positions=positions if record.positions else None,
        increments=increments if record.increments else None,
        checkpoints=captured,
    )


def run_until_return(spec: WeightSpec, x: int, m: int, rng=None,
                     max_steps: int = MAX_RECORDED_STEPS,
                     gamma_value: float | None = None) -> WalkTrace:
    """Simulate until lambda_{x,m}, the (m+1)-th visit to x, with full recording.

    The trace ends exactly at lambda_{x,m}. Raises MissingReturnTime if
    it is not reached within max_steps.
    """
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    table = weight_table(spec)
    gam = gamma(spec) if gamma_value is None else float(gamma_value)
    state = WalkState(gamma_value=gam)
    target = m + 1
    pos_chunks = [np.zeros(1, dtype=np.int64)]
    inc_chunks = []
    chunk = INITIAL_CAPACITY
    done = 0
    while state.site_visits(x) < target:
        if done >= max_steps:
            raise MissingReturnTime(
                f"lambda_({x},{m}) not reached within {max_steps} steps")
        size = min(chunk, max_steps - done)
        uniforms = rng.random(size)
        positions = np.zeros(size + 1, dtype=np.int64)
        increments = np.zeros(size, dtype=np.float64)
        used = _advance(state, table, uniforms, positions, increments, 0, True, True,
                        stop_site=x, stop_count=target)
        pos_chunks.append(positions[1:used + 1])
        inc_chunks.append(increments[:used])
        done += used
        chunk *= 2
    positions = np.concatenate(pos_chunks)
    increments = np.concatenate(inc_chunks) if inc_chunks else np.zeros(0)
    positions.flags.writeable = False
    increments.flags.writeable = False
    return WalkTrace(spec=spec, n_steps=done, seed=seed, gamma_value=gam,
                     state=state.freeze(), positions=positions, increments=increments)
