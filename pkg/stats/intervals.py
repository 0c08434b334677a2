from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm

from experiments.defaults import CONFIDENCE_LEVEL, MIN_BATCHES
from stats.samples import EmptySampleError


class TooFewBatches(ValueError):
    pass


def _z(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    return float(norm.ppf(0.5 + level / 2.0))


def mean_se(values) -> tuple[float, float]:
    """Sample mean and its standard error (0 for a single value)."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptySampleError("sample is empty")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def batch_mean_ci(values, batch: int, level: float = CONFIDENCE_LEVEL,
                  min_batches: int = MIN_BATCHES) -> tuple[float, float]:
    """Batch-means normal interval (mean, half-width); trailing partial batch dropped."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    n_batches = x.size // batch
    if n_batches < min_batches:
        raise TooFewBatches(f"{n_batches} batches of size {batch}; need >= {min_batches}")
    means = x[: n_batches * batch].reshape(n_batches, batch).mean(axis=1)
    half = _z(level) * float(means.std(ddof=1)) / math.sqrt(n_batches)
    return float(means.mean()), half


def wilson_interval(successes: int, trials: int,
                    level: float = CONFIDENCE_LEVEL) -> tuple[float, float]:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes={successes} outside [0, {trials}]")
    z = _z(level)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi
