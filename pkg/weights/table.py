from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from experiments.defaults import N_MEMO
from weights.kernels import urn_pair, w_lookup
from weights.spec import Family, SiteSign, WeightSpec, ensure_valid, w_values


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Memo of w(0..n_memo-1) plus the closed-form tail the kernels fall back to."""

    spec: WeightSpec
    memo: np.ndarray
    power: bool
    p: float
    coef: float

    def w(self, n: int) -> float:
        return float(w_lookup(n, self.memo, self.power, self.p, self.coef))

    def urn(self, sign: SiteSign, blue: int, red: int) -> tuple[float, float]:
        b, r = urn_pair(int(sign), blue, red, self.memo, self.power, self.p, self.coef)
        return float(b), float(r)

    def w_array(self, n) -> np.ndarray:
        """Vectorised lookup with the same memo and fallback as the kernels."""
        n = np.asarray(n, dtype=np.int64)
        size = self.memo.size
        out = self.memo[np.minimum(n, size - 1)]
        beyond = n >= size
        if np.any(beyond):
            out = out.copy()
            out[beyond] = (1.0 / (1.0 + self.coef * (n[beyond] + 1.0) ** (-self.p))
                           if self.power else 1.0)
        return out

    def urn_arrays(self, sign: SiteSign, blue, red) -> tuple[np.ndarray, np.ndarray]:
        """(b(blue), r(red)) elementwise."""
        blue = np.asarray(blue, dtype=np.int64)
        red = np.asarray(red, dtype=np.int64)
        if sign == SiteSign.POSITIVE:
            return self.w_array(2 * blue + 1), self.w_array(2 * red)
        if sign == SiteSign.NEGATIVE:
            return self.w_array(2 * blue), self.w_array(2 * red + 1)
        return self.w_array(2 * blue), self.w_array(2 * red)

    def urn_bounds(self, sign: SiteSign) -> tuple[float, float, float, float]:
        """(inf b, sup b, inf r, sup r); monotone sequences, so b(0), r(0) and the limit 1 suffice."""
        if self.spec.family is Family.TABULATED:
            k = np.arange(len(self.spec.table) // 2 + 2)
            b, r = self.urn_arrays(sign, k, k)
            b, r = np.append(b, 1.0), np.append(r, 1.0)
        else:
            b0, r0 = self.urn(sign, 0, 0)
            b, r = np.array([b0, 1.0]), np.array([r0, 1.0])
        return float(b.min()), float(b.max()), float(r.min()), float(r.max())

    def kernel_args(self) -> tuple:
        return self.memo, self.power, self.p, self.coef


@lru_cache(maxsize=16)
def weight_table(spec: WeightSpec, n_memo: int = N_MEMO) -> WeightTable:
    ensure_valid(spec)
    if spec.family is Family.TABULATED:
        n_memo = max(n_memo, len(spec.table))
    memo = w_values(spec, np.arange(n_memo, dtype=np.int64))
    memo.flags.writeable = False
    power = spec.family is Family.POWER_LAW
    return WeightTable(spec, memo, power, float(spec.p), float(spec.coef) if power else 0.0)
