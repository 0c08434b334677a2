"""
Diffusion approximation of the branching-like processes.

With zeta_0 = floor(y0 * n), zeta_{floor(nt)} / n is close in law to Z_t where
2Z is a squared Bessel process started from 2*y0:
  Backward (k < x - 1 throughout):  dimension 2 - 2*gamma
  Forward:                          dimension 2*gamma, stopped at its first zero
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from blp.kernel import BlpKernel, Variant, simulate
from bmpe import BesqLaw, besq_paths, sample_besq_marginal
from experiments.defaults import BESQ_DT, MIN_KS_REPS
from experiments.seeding import replica_rng, stream_seed
from stats import TestResult, ks_two_sample
from weights import WeightSpec, gamma

EXPERIMENT = "rayknight"


class LowResolution(UserWarning):
    code = "LOW_RESOLUTION"


def limit_law(spec: WeightSpec, variant: Variant, y0: float) -> BesqLaw:
    g = gamma(spec)
    dim = 2.0 - 2.0 * g if Variant(variant) is Variant.BACKWARD else 2.0 * g
    if dim < 0:
        raise ValueError(f"limit dimension {dim:.4f} < 0 (gamma={g:.4f}) is not supported")
    return BesqLaw(dim, 2.0 * y0)


def rayknight_replica(spec: WeightSpec, n: int, y0: float, t: float, variant: Variant,
                      seed: int, replica: int) -> tuple[float, float]:
    """One chain: (2 * zeta_{floor(nt)} / n, min(sigma_0 / n, t))."""
    steps = int(math.floor(n * t))
    start = int(math.floor(y0 * n))
    anchor = steps + 2 if Variant(variant) is Variant.BACKWARD else 0
    kernel = BlpKernel(spec, variant, anchor)
    tr = simulate(kernel, start, steps, replica_rng(seed, EXPERIMENT, replica))
    k0 = tr.first_zero()
    sigma = t if k0 is None else min(k0 / n, t)
    return 2.0 * float(tr.values[-1]) / n, sigma


@dataclass(frozen=True, eq=False)
class RayKnightResult:
    spec: WeightSpec
    variant: Variant
    n: int
    y0: float
    t: float
    reps: int
    seed: int
    law: BesqLaw
    ks: TestResult
    sigma0: TestResult | None
    sigma0_coarse: TestResult | None
    chain_values: np.ndarray
    oracle_values: np.ndarray
    warning: str | None = None

    def to_record(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "variant": self.variant.value,
            "n": self.n,
            "y0": self.y0,
            "t": self.t,
            "reps": self.reps,
            "ks": self.ks.statistic,
            "p_value": self.ks.p_value,
            "seed": self.seed,
            "dim": self.law.dim,
        }
        if self.sigma0 is not None:
            out["sigma0_ks"] = self.sigma0.statistic
            out["sigma0_p_value"] = self.sigma0.p_value
        if self.sigma0_coarse is not None:
            # same chain against oracle paths on a grid twice as coarse
            out["sigma0_ks_coarse"] = self.sigma0_coarse.statistic
            out["sigma0_grid_shift"] = self.sigma0_coarse.statistic - self.sigma0.statistic
        if self.warning:
            out["code"] = LowResolution.code
            out["warning"] = self.warning
        return out


def rayknight_experiment(spec: WeightSpec, n: int, y0: float, t: float, reps: int,
                         variant: Variant | str, seed: int = 0,
                         runner: Callable | None = None, dt: float = BESQ_DT) -> RayKnightResult:
    """Chain marginal at floor(nt) against the squared Bessel marginal, by two-sample KS.

    `runner(fn, reps)` maps replica indices to results in order; sequential by
    default. The Forward variant also compares the scaled hitting time of 0,
    both capped at t, on the Euler grid dt and on 2*dt so the sensitivity of
    the first-zero time to the grid can be read off the record.
    """
    variant = Variant(variant)
    if n < 1 or reps < 1:
        raise ValueError(f"n and reps must be >= 1, got n={n}, reps={reps}")
    if not t > 0 or y0 < 0:
        raise ValueError(f"need t > 0 and y0 >= 0, got t={t}, y0={y0}")
    law = limit_law(spec, variant, y0)

    fn = partial(rayknight_replica, spec, n, y0, t, variant, seed)
    rows = runner(fn, reps) if runner is not None else [fn(i) for i in range(reps)]
    chain = np.array([r[0] for r in rows])
    chain_sigma = np.array([r[1] for r in rows])

    oracle_rng = np.random.default_rng(stream_seed(seed, "oracle", 0))
    sigma_test = sigma_coarse = None
    if variant is Variant.BACKWARD:
        oracle = sample_besq_marginal(law, t, oracle_rng, size=reps)
    else:
        oracle, hit = besq_paths(law, t, dt, absorb_at_zero=True, reps=reps, rng=oracle_rng)
        sigma_test = ks_two_sample(chain_sigma, np.minimum(hit, t))
        coarse_rng = np.random.default_rng(stream_seed(seed, "oracle", 1))
        _, hit_coarse = besq_paths(law, t, 2.0 * dt, absorb_at_zero=True, reps=reps, rng=coarse_rng)
        sigma_coarse = ks_two_sample(chain_sigma, np.minimum(hit_coarse, t))

    warning = None
    if reps < MIN_KS_REPS:
        warning = f"reps={reps} below {MIN_KS_REPS}; KS resolution is coarse"
    return RayKnightResult(spec, variant, n, y0, t, reps, seed, law,
                           ks_two_sample(chain, oracle), sigma_test, sigma_coarse,
                           chain, oracle, warning)
