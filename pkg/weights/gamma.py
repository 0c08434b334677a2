"""
gamma = sum_{j>=0} (1/w(2j+1) - 1/w(2j)).

Finite families are summed exactly. For PowerLaw the j-th term is
-2^p*B*g(j) with g(j) = (2j+1)^-p - (2j+2)^-p, a completely monotone
sequence; the partial sum over j < J is extended by an Euler-Maclaurin tail
whose remainder is bounded by the first omitted correction term. J doubles
until that bound (plus rounding) is within tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from experiments.defaults import GAMMA_MAX_TERMS, GAMMA_TOL
from weights.spec import Family, WeightSpec, ensure_valid, w_values

# B_2, B_4, B_6, B_8
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)
_START_TERMS = 64
_EPS = np.finfo(np.float64).eps


class GammaNotCertified(RuntimeError):
    pass


@dataclass(frozen=True)
class GammaSeries:
    value: float
    error_bound: float
    terms: int


def _g_terms(p: float, count: int) -> np.ndarray:
    a = 2.0 * np.arange(count, dtype=np.float64) + 1.0
    return a ** (-p) * -np.expm1(-p * np.log1p(1.0 / a))


def _g_derivative(p: float, order: int, x: float) -> float:
    """order-th derivative of g at x."""
    rising = 1.0
    for i in range(order):
        rising *= p + i
    sign = -1.0 if order % 2 else 1.0
    e = -p - order
    return sign * 2.0 ** order * rising * ((2 * x + 1.0) ** e - (2 * x + 2.0) ** e)


def _g_integral(p: float, x: float) -> float:
    """integral of g over [x, inf)."""
    a = 2.0 * x + 1.0
    if p == 1.0:
        return 0.5 * math.log1p(1.0 / a)
    q = 1.0 - p
    return a ** q * math.expm1(q * math.log1p(1.0 / a)) / (2.0 * q)


def _g_tail(p: float, start: int) -> tuple[float, float]:
    """(estimate, bound) of sum_{j>=start} g(j)."""
    x = float(start)
    est = _g_integral(p, x) + 0.5 * _g_derivative(p, 0, x)
    fact = 1.0
    for k, bern in enumerate(_BERNOULLI[:-1], start=1):
        fact *= (2 * k - 1) * (2 * k)
        est -= bern / fact * _g_derivative(p, 2 * k - 1, x)
    k = len(_BERNOULLI)
    fact *= (2 * k - 1) * (2 * k)
    bound = abs(_BERNOULLI[-1] / fact * _g_derivative(p, 2 * k - 1, x))
    return est, bound


def _power_law_series(spec: WeightSpec, tol: float, max_terms: int) -> GammaSeries:
    p, coef = spec.p, spec.coef
    if coef == 0.0:
        return GammaSeries(0.0, 0.0, 0)
    terms = _START_TERMS
    while True:
        g = _g_terms(p, terms)
        partial = math.fsum(g)
        tail, tail_bound = _g_tail(p, terms)
        # each g(j) carries a few ulps; fsum itself is exact
        rounding = 8.0 * _EPS * (partial + abs(tail))
        bound = abs(coef) * (tail_bound + rounding)
        if bound <= tol:
            return GammaSeries(-coef * (partial + tail), bound, terms)
        if terms * 2 > max_terms:
            raise GammaNotCertified(
                f"gamma for {spec.label()} not certified to {tol:g} within "
                f"{max_terms} terms (bound {bound:g})")
        terms *= 2


@lru_cache(maxsize=128)
def gamma_series(spec: WeightSpec, tol: float = GAMMA_TOL,
                 max_terms: int = GAMMA_MAX_TERMS) -> GammaSeries:
    ensure_valid(spec)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    fam = spec.family
    if fam is Family.CONSTANT:
        return GammaSeries(0.0, 0.0, 0)
    if fam is Family.ONCE_REINFORCED:
        # single surviving term 1/w(1) - 1/w(0) = 1 - (1 - gamma0)
        return GammaSeries(float(spec.gamma0), 0.0, 1)
    if fam is Family.TABULATED:
        table = spec.table
        inv = [1.0 / v for v in table]
        n_terms = (len(table) + 1) // 2
        parts = []
        for j in range(n_terms):
            odd = inv[2 * j + 1] if 2 * j + 1 < len(table) else 1.0
            parts.append(odd - inv[2 * j])
        return GammaSeries(math.fsum(parts), 0.0, n_terms)
    return _power_law_series(spec, tol, max_terms)


def gamma(spec: WeightSpec, tol: float = GAMMA_TOL,
          max_terms: int = GAMMA_MAX_TERMS) -> float:
    return gamma_series(spec, tol, max_terms).value


def gamma_terms(spec: WeightSpec, count: int) -> np.ndarray:
    """First `count` series terms 1/w(2j+1) - 1/w(2j), for sign scans."""
    ensure_valid(spec)
    j = np.arange(count, dtype=np.int64)
    if spec.family is Family.POWER_LAW:
        return -spec.coef * _g_terms(spec.p, count)
    return 1.0 / w_values(spec, 2 * j + 1) - 1.0 / w_values(spec, 2 * j)
