"""
Two-sample tests used by every experiment.

KS p-values are asymptotic (Kolmogorov distribution with the Stephens
small-sample correction). Chi-square bins are merged left to right until both
pooled expectations reach the minimum; whatever is left at the right end is
folded into the last closed bin.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import chi2, kstwobign

from experiments.defaults import MIN_EXPECTED_COUNT
from stats.samples import EmptySampleError, Sample, TestResult


class ChiSquareDegenerate(ValueError):
    pass


def _ecdf(sample: Sample, grid: np.ndarray) -> np.ndarray:
    order = np.argsort(sample.values, kind="stable")
    xs = sample.values[order]
    idx = np.searchsorted(xs, grid, side="right")
    if sample.weight is None:
        return idx / xs.size
    cum = np.concatenate(([0.0], np.cumsum(sample.weight[order])))
    return cum[idx] / cum[-1]


def ks_two_sample(a, b) -> TestResult:
    sa, sb = Sample.of(a), Sample.of(b)
    grid = np.concatenate((sa.values, sb.values))
    d = float(np.max(np.abs(_ecdf(sa, grid) - _ecdf(sb, grid))))
    n1, n2 = sa.effective_size, sb.effective_size
    en = math.sqrt(n1 * n2 / (n1 + n2))
    p = float(kstwobign.sf((en + 0.12 + 0.11 / en) * d)) if d > 0 else 1.0
    return TestResult("ks_two_sample", d, min(max(p, 0.0), 1.0), len(sa), len(sb))


def merge_bins(a: np.ndarray, b: np.ndarray,
               min_expected: float = MIN_EXPECTED_COUNT) -> list[tuple[int, int]]:
    """Half-open index ranges [start, stop) of merged bins."""
    na, nb = a.sum(), b.sum()
    total = na + nb
    groups: list[tuple[int, int]] = []
    start = 0
    acc = 0.0
    for i in range(a.size):
        acc += a[i] + b[i]
        if acc * na / total >= min_expected and acc * nb / total >= min_expected:
            groups.append((start, i + 1))
            start = i + 1
            acc = 0.0
    if start < a.size:
        if groups:
            groups[-1] = (groups[-1][0], a.size)
        else:
            groups.append((0, a.size))
    return groups


def chi_square_two_sample(a_counts, b_counts, bins=None,
                          min_expected: float = MIN_EXPECTED_COUNT) -> TestResult:
    """Pooled two-sample chi-square over aligned count vectors.

    `bins` is an optional label per count, only used in error messages.
    """
    a = np.asarray(a_counts, dtype=np.float64).ravel()
    b = np.asarray(b_counts, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"count vectors differ in length: {a.size} vs {b.size}")
    if a.sum() <= 0 or b.sum() <= 0:
        raise EmptySampleError("both count vectors need positive totals")
    groups = merge_bins(a, b, min_expected)
    if len(groups) < 2:
        where = f" (bins {bins[0]}..{bins[-1]})" if bins is not None and len(bins) else ""
        raise ChiSquareDegenerate(f"all mass falls in one merged bin{where}")

    ga = np.array([a[s:e].sum() for s, e in groups])
    gb = np.array([b[s:e].sum() for s, e in groups])
    na, nb = ga.sum(), gb.sum()
    pooled = (ga + gb) / (na + nb)
    ea, eb = pooled * na, pooled * nb
    stat = float(np.sum((ga - ea) ** 2 / ea) + np.sum((gb - eb) ** 2 / eb))
    dof = len(groups) - 1
    p = float(chi2.sf(stat, dof))
    return TestResult("chi_square_two_sample", stat, p, int(na), int(nb), dof)


def chi_square_from_samples(a_values, b_values,
                            min_expected: float = MIN_EXPECTED_COUNT) -> TestResult:
    """Bin two integer-valued samples on their joint range and run the chi-square test."""
    a = np.asarray(a_values, dtype=np.int64).ravel()
    b = np.asarray(b_values, dtype=np.int64).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("sample is empty")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    size = int(hi - lo + 1)
    ca = np.bincount(a - lo, minlength=size)
    cb = np.bincount(b - lo, minlength=size)
    return chi_square_two_sample(ca, cb, bins=np.arange(lo, hi + 1), min_expected=min_expected)
