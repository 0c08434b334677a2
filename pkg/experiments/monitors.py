"""
Diagnostics evaluated on walk replicas: the four clauses of the good event
G_{n,K,t} and the size of the local drifts Delta_y^{(x,m)} on it.

Each replica is reduced to a handful of levels (GoodEventLevels) so a whole
K grid is answered from one walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from experiments.defaults import GOOD_EVENT_K_GRID, LIPSCHITZ_K
from urn import extract_all_urns
from walk import MissingReturnTime, RecordOptions, WalkTrace, local_drift_profile, local_time_sup, run
from weights import Family, WeightSpec

CLAUSES = ("extrema", "local_time", "urn_tau", "urn_gap")


@dataclass(frozen=True)
class GoodEventLevels:
    """Smallest K*sqrt(n) at which each clause fails (inf when it never does).

    extrema     sup_k |X_k|
    local_time  sup_y L(y, n_steps)
    urn_tau     min over (y, i) with |tau_{i,y} - 2i| >= sqrt(i) log^2 n of max(|y|, i)
    urn_gap     min over (y, i) with tau_{i+1,y} - tau_{i,y} >= log^2 n of max(|y|, i)
    """

    extrema: float
    local_time: float
    urn_tau: float
    urn_gap: float

    def holds(self, K: float, n: int) -> tuple[bool, bool, bool, bool]:
        level = K * math.sqrt(n)
        return (self.extrema < level, self.local_time < level,
                level < self.urn_tau, level < self.urn_gap)


def _urn_levels(trace: WalkTrace, n: int) -> tuple[float, float]:
    # Only blue times the walk actually reached are checked.
    log2n = math.log(n) ** 2 if n > 1 else 0.0
    tau_level = math.inf
    gap_level = math.inf
    for y, urn in extract_all_urns(trace).items():
        bt = urn.blue_times()
        if bt.size == 0:
            continue
        i = np.arange(1, bt.size + 1)
        bad = np.flatnonzero(np.abs(bt - 2 * i) >= np.sqrt(i) * log2n)
        if bad.size:
            tau_level = min(tau_level, max(abs(y), int(i[bad[0]])))
        gaps = np.diff(np.concatenate(([0], bt)))
        bad = np.flatnonzero(gaps >= log2n)
        if bad.size:
            gap_level = min(gap_level, max(abs(y), int(bad[0])))
    return float(tau_level), float(gap_level)


def good_event_levels(trace: WalkTrace, n: int) -> GoodEventLevels:
    if trace.positions is None:
        raise ValueError("good event clauses need position recording")
    st = trace.state
    tau_level, gap_level = _urn_levels(trace, n)
    return GoodEventLevels(float(max(st.smax, -st.imin)), float(local_time_sup(trace)),
                           tau_level, gap_level)


@dataclass(frozen=True)
class GoodEventReport:
    n: int
    t: float
    reps: int
    k_grid: tuple[float, ...]
    freqs: np.ndarray       # (len(k_grid), 4) clause frequencies
    joint: np.ndarray       # (len(k_grid),) frequency of all four clauses

    def rows(self) -> list[dict]:
        out = []
        for j, K in enumerate(self.k_grid):
            row = {"n": self.n, "t": self.t, "reps": self.reps, "K": K}
            for c, name in enumerate(CLAUSES):
                row[name] = float(self.freqs[j, c])
            row["all"] = float(self.joint[j])
            out.append(row)
        return out


def good_event_report(levels: list[GoodEventLevels], n: int, t: float,
                      k_grid=GOOD_EVENT_K_GRID) -> GoodEventReport:
    if not levels:
        raise ValueError("no replicas to summarise")
    k_grid = tuple(float(K) for K in k_grid)
    hits = np.array([[lv.holds(K, n) for lv in levels] for K in k_grid], dtype=bool)
    freqs = hits.mean(axis=1)
    joint = hits.all(axis=2).mean(axis=1)
    return GoodEventReport(n, t, len(levels), k_grid, freqs, joint)


def goodevent_replica(spec: WeightSpec, n: int, t: float, rng) -> GoodEventLevels:
    trace = run(spec, int(math.floor(n * t)), RecordOptions(positions=True), rng=rng)
    return good_event_levels(trace, n)


# ----------------------------
# Local drift size on the good event
# ----------------------------
@dataclass(frozen=True)
class LipschitzSample:
    levels: GoodEventLevels
    max_delta: float | None     # None when lambda_{x,m} falls after the last step


def lipschitz_replica(spec: WeightSpec, n: int, t: float, x: int, m: int, rng) -> LipschitzSample:
    """max_{y > x} |Delta_y^{(x,m)}| on one walk of floor(nt) steps."""
    trace = run(spec, int(math.floor(n * t)), RecordOptions.full(), rng=rng)
    levels = good_event_levels(trace, n)
    try:
        prof = local_drift_profile(trace, x, m)
    except MissingReturnTime:
        return LipschitzSample(levels, None)
    right = prof.values[x + 1 - prof.lo:]
    return LipschitzSample(levels, float(np.max(np.abs(right))) if right.size else 0.0)


def predicted_exponent(spec: WeightSpec) -> tuple[float | None, int]:
    """(exponent of n, power of log n) in the bound on |Delta| for PowerLaw p <= 1/2."""
    if spec.family is not Family.POWER_LAW or spec.p > 0.5:
        return None, 4
    if spec.p == 0.5:
        return 0.0, 5
    return 0.25 - 0.5 * spec.p, 4


def fit_exponent(ns, values, log_power: int = 0) -> float | None:
    """Slope of log(value) - log_power * log(log n) against log n; None with < 2 positive points."""
    pts = [(n, v) for n, v in zip(ns, values) if v is not None and v > 0 and n > 1]
    if len(pts) < 2:
        return None
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts]) - log_power * np.log(x)
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass(frozen=True)
class LipschitzReport:
    spec: WeightSpec
    K: float
    rows: list[dict]
    exponent: float | None
    raw_exponent: float | None
    predicted: float | None
    flag: str | None = None


def lipschitz_monitor(spec: WeightSpec, samples_by_n: dict[int, list[LipschitzSample]],
                      K: float = LIPSCHITZ_K) -> LipschitzReport:
    """Median over good replicas of max_{y>x} |Delta_y|, per n, and its fitted growth exponent."""
    predicted, log_power = predicted_exponent(spec)
    rows = []
    medians = []
    empty = False
    for n in sorted(samples_by_n):
        samples = samples_by_n[n]
        good = [s.max_delta for s in samples
                if s.max_delta is not None and all(s.levels.holds(K, n))]
        med = float(np.median(good)) if good else None
        empty = empty or not good
        bound = n ** predicted * math.log(n) ** log_power if predicted is not None else None
        rows.append({"n": n, "reps": len(samples), "good": len(good),
                     "median_max_delta": med,
                     "max_max_delta": float(max(good)) if good else None,
                     "bound_shape": bound})
        medians.append(med)
    ns = [r["n"] for r in rows]
    return LipschitzReport(
        spec, K, rows,
        exponent=fit_exponent(ns, medians, log_power),
        raw_exponent=fit_exponent(ns, medians, 0),
        predicted=predicted,
        flag="NO_GOOD_REPLICA" if empty else None,
    )
