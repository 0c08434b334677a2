from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from experiments.defaults import DP_TOL
from urn.oracle import expected_D_profile
from walk import WalkTrace, directed_profile, local_drift_profile
from weights import SiteSign


@dataclass(frozen=True, eq=False)
class RhoReport:
    """Per-site conditional means rho_y = E[D at tau_k^B], k = E^{(x,m)}_{y,-}, for y > x."""

    x: int
    m: int
    sites: np.ndarray
    k: np.ndarray
    rho: np.ndarray
    delta: np.ndarray
    gamma_value: float
    dp_bound: float

    @property
    def rho_minus_gamma(self) -> float:
        """sum_{y>x} (rho_y - gamma * sgn y)."""
        return math.fsum(self.rho - self.gamma_value * np.sign(self.sites))

    @property
    def delta_minus_rho(self) -> float:
        """sum_{y>x} (Delta_y - rho_y)."""
        return math.fsum(self.delta - self.rho)

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "m": self.m,
            "sites": int(self.sites.size),
            "rho_minus_gamma": self.rho_minus_gamma,
            "delta_minus_rho": self.delta_minus_rho,
            "dp_bound": self.dp_bound,
        }


def rho_monitor(trace: WalkTrace, x: int, m: int, tol: float = DP_TOL) -> RhoReport:
    prof = directed_profile(trace, x, m)
    drift = local_drift_profile(trace, x, m)
    sites = np.arange(x + 1, prof.hi + 1)
    k = np.array([prof.minus(int(y)) for y in sites], dtype=np.int64)
    delta = np.array([drift.at(int(y)) for y in sites])
    rho = np.zeros(sites.size)
    bound = 0.0
    for sign in (SiteSign.NEGATIVE, SiteSign.ZERO, SiteSign.POSITIVE):
        mask = np.sign(sites) == int(sign)
        if not np.any(mask):
            continue
        profile = expected_D_profile(trace.spec, sign, int(k[mask].max()), tol)
        rho[mask] = profile.values[k[mask]]
        bound += float(profile.bounds[k[mask]].sum())
    return RhoReport(x, m, sites, k, rho, delta, trace.gamma_value, bound)
