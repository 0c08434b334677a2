"""
Exact and Monte Carlo oracles for the urn observed at its blue times.

The DP runs over the state graph (blue < m, red <= cap). Mass that would push
red past the cap is tallied per blue row; its contribution is bounded using
the uniform geometric domination of the reds drawn before each further blue:
once red has passed the cap, the next draw is blue with probability at least
q = inf b / (inf b + sup_{j > cap} r(j)). Weights are monotone with limit 1,
so that supremum is max(r(cap + 1), 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from experiments.defaults import (
    CONFIDENCE_LEVEL,
    DP_MAX_RED_CAP,
    DP_SQRT_FACTOR,
    DP_TOL,
    MAX_DRAWS,
)
from stats import mean_se, wilson_interval
from urn.kernel import dp_sweep
from urn.process import sample_reds_at_tau_blue
from weights import SiteSign, WeightSpec, WeightTable, weight_table


class TruncationError(RuntimeError):
    code = "TRUNCATION"


@dataclass(frozen=True)
class DpOracleResult:
    value: float
    truncation_error_bound: float
    states_visited: int


@dataclass(frozen=True, eq=False)
class _Sweep:
    m: int
    cap: int
    q: float
    row_means: np.ndarray
    escaped: np.ndarray
    final: np.ndarray

    @property
    def states(self) -> int:
        return self.m * (self.cap + 1)


# ----------------------------
# DP core
# ----------------------------
def _red_tail(table: WeightTable, sign: SiteSign, cap: int) -> tuple[float, float]:
    """(inf, sup) of r(j) over j > cap."""
    r = table.urn(sign, 0, cap + 1)[1]
    return min(r, 1.0), max(r, 1.0)


def _blue_floor(table: WeightTable, sign: SiteSign, cap: int = -1) -> float:
    """Lower bound on P(blue) from any state with red > cap."""
    inf_b = table.urn_bounds(sign)[0]
    sup_r = table.urn_bounds(sign)[3] if cap < 0 else _red_tail(table, sign, cap)[1]
    return inf_b / (inf_b + sup_r)


def initial_red_cap(m: int, q: float, tol: float, a: float = DP_SQRT_FACTOR) -> int:
    """Mean of the dominating negative binomial, a*sqrt(m) spread, geometric tail for tol."""
    geo = math.log(1.0 / tol) / math.log(1.0 / (1.0 - q)) if q < 1.0 else 0.0
    return int(math.ceil(m * (1.0 - q) / q + a * math.sqrt(m) + geo))


def _sweep(table: WeightTable, sign: SiteSign, m: int, cap: int, q: float) -> _Sweep:
    memo, power, p, coef = table.kernel_args()
    row_means = np.zeros(m + 1)
    escaped = np.zeros(m)
    final = np.zeros(cap + 1)
    dp_sweep(m, cap, int(sign), memo, power, p, coef, row_means, escaped, final)
    return _Sweep(m, cap, q, row_means, escaped, final)


def _certified(spec: WeightSpec, sign: SiteSign, m: int, tol: float,
               bound: Callable[[_Sweep], float], max_cap: int) -> tuple[_Sweep, float]:
    """Double the red cap until bound(sweep) <= tol."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    table = weight_table(spec)
    cap = min(initial_red_cap(m, _blue_floor(table, sign), tol), max_cap)
    while True:
        sw = _sweep(table, sign, m, cap, _blue_floor(table, sign, cap))
        err = bound(sw)
        if err <= tol:
            return sw, err
        if cap >= max_cap:
            raise TruncationError(
                f"red cap {cap} exhausted with truncation bound {err:.3e} > tol {tol:.1e}")
        cap = min(2 * cap, max_cap)


def _expected_D_bound(sw: _Sweep, k: int) -> float:
    """Bound on E[|D at tau_k|; escaped] for the first k rows."""
    if k == 0:
        return 0.0
    i = np.arange(k)
    extra = (k - i) * (1.0 - sw.q) / sw.q
    return float(np.dot(sw.escaped[:k], sw.cap + 1 + extra + k))


def _expected_D_values(sw: _Sweep) -> np.ndarray:
    k = np.arange(sw.m + 1)
    kept = 1.0 - np.concatenate(([0.0], np.cumsum(sw.escaped)))
    return sw.row_means - k * kept


@dataclass(frozen=True, eq=False)
class DProfile:
    """E[D at tau_k^B] and certified truncation bounds for k = 0..m_max."""

    spec: WeightSpec
    sign: SiteSign
    values: np.ndarray
    bounds: np.ndarray
    states_visited: int

    def at(self, k: int) -> DpOracleResult:
        return DpOracleResult(float(self.values[k]), float(self.bounds[k]), self.states_visited)


def expected_D_profile(spec: WeightSpec, sign: SiteSign, m_max: int, tol: float = DP_TOL,
                       max_cap: int = DP_MAX_RED_CAP) -> DProfile:
    """All of E[D at tau_k^B], k <= m_max, from one DP sweep."""
    sign = SiteSign(sign)
    if m_max == 0:
        return DProfile(spec, sign, np.zeros(1), np.zeros(1), 0)
    sw, _ = _certified(spec, sign, m_max, tol, lambda s: _expected_D_bound(s, s.m), max_cap)
    bounds = np.array([_expected_D_bound(sw, k) for k in range(m_max + 1)])
    return DProfile(spec, sign, _expected_D_values(sw), bounds, sw.states)


def mu_distribution(spec: WeightSpec, sign: SiteSign, m: int, tol: float = DP_TOL,
                    max_cap: int = DP_MAX_RED_CAP) -> tuple[np.ndarray, float]:
    """P(mu(m) = j) for j <= cap and the escaped mass (<= tol)."""
    sign = SiteSign(sign)
    sw, err = _certified(spec, sign, m, tol, lambda s: float(s.escaped.sum()), max_cap)
    return sw.final.copy(), err


# ----------------------------
# E[D at tau_m^B]
# ----------------------------
@dataclass(frozen=True)
class UrnEstimate:
    spec: WeightSpec
    sign: SiteSign
    m: int
    method: str
    value: float
    error: float          # truncation bound (dp) or standard error (mc)
    reps: int | None = None
    tol: float | None = None
    states_visited: int | None = None

    def to_record(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "sign": self.sign.label,
            "m": self.m,
            "method": self.method,
            "value": self.value,
            "error": self.error,
        }
        if self.reps is not None:
            out["reps"] = self.reps
        if self.tol is not None:
            out["tol"] = self.tol
        return out


def expected_D_at_tau(spec: WeightSpec, sign: SiteSign, m: int, method: str = "dp",
                      tol: float = DP_TOL, reps: int = 10_000, rng=None,
                      max_draws: int = MAX_DRAWS) -> UrnEstimate:
    sign = SiteSign(sign)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if method == "dp":
        res = expected_D_profile(spec, sign, m, tol).at(m)
        return UrnEstimate(spec, sign, m, "dp", res.value, res.truncation_error_bound,
                           tol=tol, states_visited=res.states_visited)
    if method == "mc":
        if reps < 1:
            raise ValueError(f"reps must be >= 1, got {reps}")
        reds = sample_reds_at_tau_blue(spec, sign, m, reps, rng, max_draws=max_draws)
        mean, se = mean_se(reds - m)
        return UrnEstimate(spec, sign, m, "mc", mean, se, reps=reps)
    raise ValueError(f"unknown method {method!r}; expected 'dp' or 'mc'")


@dataclass(frozen=True)
class LimitCheck:
    """E[D at tau_m^B] against its large-m target with an extrapolated tail."""

    m: int
    value: float
    target: float
    dp_bound: float
    tail_estimate: float
    rate: float | None      # empirical exponent alpha in |E_m - E_{m/2}| ~ m^-alpha
    gap: float

    def ok(self, mult: float) -> bool:
        return self.gap <= mult * (self.dp_bound + self.tail_estimate)


def limit_check(spec: WeightSpec, sign: SiteSign, m: int, target: float,
                tol: float = DP_TOL) -> LimitCheck:
    """Compare E_m with `target`, estimating the remaining distance from E_m, E_{m/2}, E_{m/4}."""
    if m < 4:
        raise ValueError(f"m must be >= 4, got {m}")
    prof = expected_D_profile(spec, sign, m, tol)
    e1, e2, e4 = (float(prof.values[k]) for k in (m, m // 2, m // 4))
    d1, d2 = e1 - e2, e2 - e4
    ratio = d1 / d2 if d2 != 0.0 else 0.0
    if 0.0 < ratio < 1.0:
        tail = abs(d1) * ratio / (1.0 - ratio)
        rate = -math.log2(ratio)
    else:
        tail = abs(d1)
        rate = None
    bound = float(prof.bounds[m])
    return LimitCheck(m, e1, target, bound, tail, rate, abs(e1 - target))


# ----------------------------
# Toth's identity
# ----------------------------
@dataclass(frozen=True)
class TothResult:
    lhs: float
    rhs: float
    gap: float
    truncation_error_bound: float


def _red_weights(table: WeightTable, sign: SiteSign, size: int) -> np.ndarray:
    zero = np.zeros(size, dtype=np.int64)
    return table.urn_arrays(sign, zero, np.arange(size))[1]


def _blue_weights(table: WeightTable, sign: SiteSign, size: int) -> np.ndarray:
    zero = np.zeros(size, dtype=np.int64)
    return table.urn_arrays(sign, np.arange(size), zero)[0]


def toth_check(spec: WeightSpec, sign: SiteSign, m: int, lam: float, tol: float = DP_TOL,
               max_cap: int = DP_MAX_RED_CAP) -> TothResult:
    """E[prod_{j<mu(m)} (1 + lambda/r(j))] against prod_{j<m} (1 - lambda/b(j))^-1."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    sign = SiteSign(sign)
    table = weight_table(spec)
    b = _blue_weights(table, sign, m)
    if not lam < float(b.min()):
        raise ValueError(f"lambda={lam} must be below min b(j), j < {m}: {float(b.min())}")
    rhs = float(np.prod(1.0 / (1.0 - lam / b)))
    if lam == 0.0:
        return TothResult(1.0, 1.0, abs(1.0 - rhs), 0.0)

    inf_b = table.urn_bounds(sign)[0]
    if (1.0 / (1.0 + inf_b)) * max(1.0, abs(1.0 + lam)) >= 1.0:
        raise TruncationError(f"lambda={lam} too large for a geometric tail bound")

    def bound(sw: _Sweep) -> float:
        lo_r, hi_r = _red_tail(table, sign, sw.cap)
        ratio = (1.0 - sw.q) * max(1.0, abs(1.0 + lam / lo_r), abs(1.0 + lam / hi_r))
        if ratio >= 1.0:
            return math.inf
        per_blue = sw.q / (1.0 - ratio)
        log_f_cap = float(np.sum(np.log(np.abs(1.0 + lam / _red_weights(table, sign, sw.cap + 1)))))
        with np.errstate(divide="ignore"):
            logs = np.log(sw.escaped) + log_f_cap + (sw.m - np.arange(sw.m)) * math.log(per_blue)
        return float(np.exp(logs).sum())

    sw, err = _certified(spec, sign, m, tol, bound, max_cap)
    factors = 1.0 + lam / _red_weights(table, sign, sw.cap)
    log_f = np.concatenate(([0.0], np.cumsum(np.log(np.abs(factors)))))
    sign_f = np.concatenate(([1.0], np.cumprod(np.sign(factors))))
    with np.errstate(divide="ignore"):
        lhs = float(np.sum(sign_f * np.exp(log_f + np.log(sw.final))))
    return TothResult(lhs, rhs, abs(lhs - rhs), err)


def toth_linear_check(spec: WeightSpec, sign: SiteSign, m: int, tol: float = DP_TOL,
                      max_cap: int = DP_MAX_RED_CAP) -> TothResult:
    """E[sum_{j<mu(m)} 1/r(j)] against sum_{j<m} 1/b(j)."""
    sign = SiteSign(sign)
    table = weight_table(spec)
    rhs = float(np.sum(1.0 / _blue_weights(table, sign, m)))

    def bound(sw: _Sweep) -> float:
        h_cap = float(np.sum(1.0 / _red_weights(table, sign, sw.cap + 1)))
        extra = (sw.m - np.arange(sw.m)) * (1.0 - sw.q) / sw.q / _red_tail(table, sign, sw.cap)[0]
        return float(np.dot(sw.escaped, h_cap + extra))

    sw, err = _certified(spec, sign, m, tol, bound, max_cap)
    h = np.concatenate(([0.0], np.cumsum(1.0 / _red_weights(table, sign, sw.cap))))
    lhs = float(np.dot(sw.final, h))
    return TothResult(lhs, rhs, abs(lhs - rhs), err)


# ----------------------------
# Concentration of D at tau_k^B
# ----------------------------
@dataclass(frozen=True)
class TailEstimate:
    k: int
    m: int
    reps: int
    hits: int
    freq: float
    lo: float
    hi: float

    @property
    def upper_only(self) -> bool:
        """No event observed: only the upper end of the interval is informative."""
        return self.hits == 0

    def to_dict(self) -> dict:
        return {"k": self.k, "m": self.m, "reps": self.reps, "hits": self.hits,
                "freq": self.freq, "lo": self.lo, "hi": self.hi,
                "upper_only": self.upper_only}


def sample_D_at_tau(spec: WeightSpec, sign: SiteSign, k: int, reps: int, rng=None,
                    max_draws: int = MAX_DRAWS) -> np.ndarray:
    return sample_reds_at_tau_blue(spec, SiteSign(sign), k, reps, rng, max_draws) - k


def tails_from_sample(D: np.ndarray, k: int, ms,
                      level: float = CONFIDENCE_LEVEL) -> list[TailEstimate]:
    absd = np.abs(np.asarray(D))
    out = []
    for m in ms:
        hits = int(np.count_nonzero(absd >= m))
        lo, hi = wilson_interval(hits, absd.size, level)
        out.append(TailEstimate(k, int(m), int(absd.size), hits, hits / absd.size, lo, hi))
    return out


def concentration_tail(spec: WeightSpec, sign: SiteSign, k: int, m: int, reps: int,
                       rng=None, level: float = CONFIDENCE_LEVEL) -> TailEstimate:
    """Empirical P(|D at tau_k^B| >= m) with a Wilson interval."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if m <= 0:
        lo, hi = wilson_interval(reps, reps, level)
        return TailEstimate(k, m, reps, reps, 1.0, lo, hi)
    D = sample_D_at_tau(spec, sign, k, reps, rng)
    return tails_from_sample(D, k, [m], level)[0]


def fit_concentration(tails: list[TailEstimate]) -> tuple[float, float]:
    """Least-squares (C, c) in log P(|D| >= m) = log C - c * m^2 / max(m, k).

    Points with no observed event are skipped.
    """
    pts = [t for t in tails if t.hits > 0 and t.m > 0]
    if len(pts) < 2:
        raise ValueError(f"need at least 2 tail points with events, got {len(pts)}")
    x = np.array([t.m * t.m / max(t.m, t.k) for t in pts], dtype=np.float64)
    y = np.log([t.freq for t in pts])
    A = np.column_stack([np.ones_like(x), -x])
    (logC, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(math.exp(logC)), float(c)
