"""
Observables read off a WalkTrace: return times lambda_{x,m}, directed edge
local times E^{(x,m)}_{y,+-}, accumulated local drifts Delta_y^{(x,m)}, the
quadratic-variation monitor and the drift-versus-range deviation.

lambda_{x,m} is the time of the (m+1)-th visit to x; everything indexed by
(x, m) counts steps i < lambda_{x,m}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from walk.state import MissingReturnTime, WalkTrace


class PositionsNotRecorded(ValueError):
    pass


class IncrementsNotRecorded(ValueError):
    pass


def _positions(trace: WalkTrace) -> np.ndarray:
    if trace.positions is None:
        raise PositionsNotRecorded("trace was run without position recording")
    return trace.positions


def _increments(trace: WalkTrace) -> np.ndarray:
    if trace.increments is None:
        raise IncrementsNotRecorded("trace was run without increment recording")
    return trace.increments


# ----------------------------
# Return times
# ----------------------------
@dataclass(frozen=True, eq=False)
class ReturnTimeIndex:
    x: int
    times: np.ndarray

    def __len__(self) -> int:
        return int(self.times.size)

    def __getitem__(self, m: int) -> int:
        return int(self.times[m])


def return_times(trace: WalkTrace, x: int) -> ReturnTimeIndex:
    pos = _positions(trace)
    return ReturnTimeIndex(x, np.flatnonzero(pos == x))


def return_time(trace: WalkTrace, x: int, m: int) -> int:
    """lambda_{x,m}."""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    times = return_times(trace, x).times
    if m >= times.size:
        raise MissingReturnTime(f"site {x} has only {times.size} visits; no lambda_({x},{m})")
    return int(times[m])


# ----------------------------
# Directed local times
# ----------------------------
@dataclass(frozen=True, eq=False)
class DirectedProfile:
    """E^{(x,m)}_{y,+} and E^{(x,m)}_{y,-} for y in [lo, lo + len)."""

    x: int
    m: int
    lam: int
    lo: int
    up: np.ndarray
    down: np.ndarray

    def _at(self, arr: np.ndarray, y: int) -> int:
        i = y - self.lo
        return int(arr[i]) if 0 <= i < arr.size else 0

    def plus(self, y: int) -> int:
        return self._at(self.up, y)

    def minus(self, y: int) -> int:
        return self._at(self.down, y)

    @property
    def hi(self) -> int:
        return self.lo + self.up.size - 1


def directed_profile(trace: WalkTrace, x: int, m: int) -> DirectedProfile:
    pos = _positions(trace)
    lam = return_time(trace, x, m)
    lo, hi = trace.state.imin, trace.state.smax
    size = hi - lo + 1
    here = pos[:lam]
    right = pos[1:lam + 1] > here
    up = np.bincount(here[right] - lo, minlength=size)
    down = np.bincount(here[~right] - lo, minlength=size)
    return DirectedProfile(x, m, lam, lo, up, down)


def directed_local_time(trace: WalkTrace, x: int, m: int, y: int, direction: int) -> int:
    """#{i < lambda_{x,m}: X_i = y, X_{i+1} = y + direction}."""
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    prof = directed_profile(trace, x, m)
    return prof.plus(y) if direction > 0 else prof.minus(y)


# ----------------------------
# Local drifts
# ----------------------------
@dataclass(frozen=True, eq=False)
class DriftProfile:
    x: int
    m: int
    lam: int
    lo: int
    values: np.ndarray

    def at(self, y: int) -> float:
        i = y - self.lo
        return float(self.values[i]) if 0 <= i < self.values.size else 0.0

    def total(self) -> float:
        """Sum over y, left to right."""
        acc = 0.0
        for v in self.values:
            acc += float(v)
        return acc


def local_drift_profile(trace: WalkTrace, x: int, m: int) -> DriftProfile:
    pos = _positions(trace)
    inc = _increments(trace)
    lam = return_time(trace, x, m)
    lo = trace.state.imin
    size = trace.state.smax - lo + 1
    values = np.bincount(pos[:lam] - lo, weights=inc[:lam], minlength=size)
    return DriftProfile(x, m, lam, lo, values)


def local_drift(trace: WalkTrace, x: int, m: int, y: int) -> float:
    """Delta_y^{(x,m)}: drift increments collected while standing at y before lambda_{x,m}."""
    return local_drift_profile(trace, x, m).at(y)


def drift_at(trace: WalkTrace, k: int) -> float:
    """Gamma_k, summed exactly from the recorded increments."""
    if k == trace.n_steps:
        return trace.drift_acc
    return math.fsum(_increments(trace)[:k])


@dataclass(frozen=True)
class DriftSplit:
    positive: float
    zero: float
    negative: float
    predicted_positive: float   # gamma * S_k
    predicted_negative: float   # gamma * I_k


def drift_split(trace: WalkTrace, k: int | None = None) -> DriftSplit:
    """Gamma_k split over positive, zero and negative sites."""
    st = trace.state
    if k is None or k == trace.n_steps:
        per_site = st.range_view(st.site_drift)
        lo, smax, imin = st.imin, st.smax, st.imin
    else:
        if not 0 <= k <= trace.n_steps:
            raise ValueError(f"k={k} outside [0, {trace.n_steps}]")
        pos = _positions(trace)
        inc = _increments(trace)
        lo = int(pos[:k + 1].min())
        per_site = np.bincount(pos[:k] - lo, weights=inc[:k], minlength=int(pos[:k + 1].max()) - lo + 1)
        smax, imin = int(pos[:k + 1].max()), lo
    sites = np.arange(lo, lo + per_site.size)
    gam = trace.gamma_value
    return DriftSplit(
        positive=math.fsum(per_site[sites > 0]),
        zero=math.fsum(per_site[sites == 0]),
        negative=math.fsum(per_site[sites < 0]),
        predicted_positive=gam * smax,
        predicted_negative=gam * imin,
    )


# ----------------------------
# Monitors
# ----------------------------
def qv_monitor(trace: WalkTrace, N: int) -> float:
    """(1/N) * sum_{k<N} (drift increment)^2."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > trace.n_steps:
        raise ValueError(f"N={N} exceeds trace length {trace.n_steps}")
    if trace.increments is None:
        if N == trace.n_steps:
            return trace.state.qv_sum / N
        raise IncrementsNotRecorded("qv_monitor before the final step needs recorded increments")
    head = trace.increments[:N]
    return float(np.dot(head, head)) / N


def drift_vs_range(trace: WalkTrace, k: int) -> float:
    """|Gamma_k - gamma * (S_k + I_k)|."""
    if not 0 <= k <= trace.n_steps:
        raise ValueError(f"k={k} outside [0, {trace.n_steps}]")
    if k == 0:
        return 0.0
    gam = trace.gamma_value
    if k == trace.n_steps:
        st = trace.state
        return abs(st.drift_acc - gam * (st.smax + st.imin))
    pos = _positions(trace)[:k + 1]
    return abs(drift_at(trace, k) - gam * (int(pos.max()) + int(pos.min())))


def sup_drift_vs_range(trace: WalkTrace, upto: int | None = None) -> float:
    """sup_{k <= upto} |Gamma_k - gamma * (S_k + I_k)|."""
    if upto is None or upto == trace.n_steps:
        return trace.state.sup_drift_dev
    if not 0 <= upto <= trace.n_steps:
        raise ValueError(f"upto={upto} outside [0, {trace.n_steps}]")
    pos = _positions(trace)[:upto + 1]
    drift = trace.drift_path()[:upto + 1]
    s = np.maximum.accumulate(pos)
    i = np.minimum.accumulate(pos)
    return float(np.max(np.abs(drift - trace.gamma_value * (s + i))))


def local_time_sup(trace: WalkTrace, k: int | None = None) -> int:
    """sup_y L(y, k)."""
    if k is None or k == trace.n_steps:
        return int(trace.state.visits.max())
    return int(np.bincount(_positions(trace)[:k + 1] - trace.state.imin).max())


def rarely_visited(trace: WalkTrace, M: int, k: int | None = None) -> int:
    """#{y in [I_k, S_k]: L(y, k) <= M}."""
    st = trace.state
    if k is None or k == trace.n_steps:
        return int(np.count_nonzero(st.range_view(st.visits) <= M))
    pos = _positions(trace)[:k + 1]
    lo = int(pos.min())
    counts = np.bincount(pos - lo)
    return int(np.count_nonzero(counts <= M))


# ----------------------------
# Per-site departure sequences
# ----------------------------
def departures(trace: WalkTrace, y: int) -> np.ndarray:
    """Departure colours at successive visits to y: 1 = left (blue), 0 = right (red)."""
    pos = _positions(trace)
    here = np.flatnonzero(pos[:-1] == y)
    return (pos[here + 1] < y).astype(np.uint8)


def all_departures(trace: WalkTrace) -> dict[int, np.ndarray]:
    """departures() for every visited site in one pass."""
    pos = _positions(trace)
    if pos.size < 2:
        return {}
    src = pos[:-1]
    left = (pos[1:] < src).astype(np.uint8)
    order = np.argsort(src, kind="stable")
    sites_sorted = src[order]
    cuts = np.flatnonzero(np.diff(sites_sorted)) + 1
    out = {}
    for chunk in np.split(np.arange(order.size), cuts):
        if chunk.size:
            out[int(sites_sorted[chunk[0]])] = left[order[chunk]]
    return out
