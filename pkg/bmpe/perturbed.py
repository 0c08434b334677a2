"""
W = B + theta_plus * sup W + theta_minus * inf W, solved exactly on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bmpe.kernel import solve_path
from experiments.defaults import BMPE_DT


class ThetaOutOfRange(ValueError):
    pass


def _check_theta(theta_plus: float, theta_minus: float):
    for name, th in (("theta_plus", theta_plus), ("theta_minus", theta_minus)):
        if not th < 1.0:
            raise ThetaOutOfRange(f"{name} must be < 1, got {th}")


@dataclass(frozen=True, eq=False)
class BmpePath:
    theta_plus: float
    theta_minus: float
    dt: float
    brownian: np.ndarray     # B_k, B_0 = 0
    values: np.ndarray       # W_k
    run_max: np.ndarray      # S_k
    run_min: np.ndarray      # I_k

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.brownian)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)

    def residual(self) -> float:
        """max_k |W_k - B_k - theta_plus*S_k - theta_minus*I_k|."""
        r = self.values - self.brownian - self.theta_plus * self.run_max \
            - self.theta_minus * self.run_min
        return float(np.max(np.abs(r)))


def solve_bmpe(increments, theta_plus: float, theta_minus: float,
               dt: float = BMPE_DT) -> BmpePath:
    _check_theta(theta_plus, theta_minus)
    inc = np.ascontiguousarray(increments, dtype=np.float64)
    n = inc.size
    brownian = np.empty(n + 1)
    values = np.empty(n + 1)
    run_max = np.empty(n + 1)
    run_min = np.empty(n + 1)
    solve_path(inc, float(theta_plus), float(theta_minus), brownian, values, run_max, run_min)
    return BmpePath(float(theta_plus), float(theta_minus), float(dt),
                    brownian, values, run_max, run_min)


def brownian_increments(n: int, dt: float, rng) -> np.ndarray:
    return math.sqrt(dt) * np.random.default_rng(rng).standard_normal(n)


def _grid_steps(t: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not dt <= t:
        raise ValueError(f"dt={dt} must not exceed t={t}")
    return max(1, int(round(t / dt)))


def sample_bmpe_marginal(theta_plus: float, theta_minus: float, t, dt: float = BMPE_DT,
                         reps: int = 1000, rng=None) -> np.ndarray:
    """W_t over `reps` independent paths.

    `t` may be a scalar (returns shape (reps,)) or a sequence of times, in
    which case all times are read off the same paths (shape (len(t), reps)).
    The update is the one solve_bmpe applies, vectorised over replicas.
    """
    _check_theta(theta_plus, theta_minus)
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=np.float64))
    marks = np.array([_grid_steps(float(x), dt) for x in times])
    rng = np.random.default_rng(rng)
    sd = math.sqrt(dt)

    b = np.zeros(reps)
    s = np.zeros(reps)
    i = np.zeros(reps)
    w = np.zeros(reps)
    out = np.empty((times.size, reps))
    last = int(marks.max())
    for k in range(1, last + 1):
        b += sd * rng.standard_normal(reps)
        cand = b + (theta_plus * s + theta_minus * i)
        up = cand > s
        down = cand < i
        w = np.where(up, (b + theta_minus * i) / (1.0 - theta_plus),
                     np.where(down, (b + theta_plus * s) / (1.0 - theta_minus), cand))
        s = np.where(up, w, s)
        i = np.where(down, w, i)
        for j in np.flatnonzero(marks == k):
            out[j] = w
    return out[0] if scalar else out


def path_rows(path: BmpePath) -> list[dict]:
    """CSV rows (t, W, S, I)."""
    return [
        {"t": repr(float(t)), "W": repr(float(w)), "S": repr(float(s)), "I": repr(float(i))}
        for t, w, s, i in zip(path.times, path.values, path.run_max, path.run_min)
    ]
