"""
Generalized Polya urn at a site y. A blue draw is a departure to the left,
a red draw a departure to the right; from (blue, red) the next draw is blue
with probability b(blue) / (b(blue) + r(red)), the weights depending on the
sign of y (see weights.urn_weights).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from experiments.defaults import MAX_DRAWS
from urn.kernel import run_urn
from walk import WalkTrace, all_departures, departures
from weights import SiteSign, WeightSpec, WeightTable, weight_table

FIRST_CHUNK = 64


class DrawCapExceeded(RuntimeError):
    code = "DRAW_CAP_EXCEEDED"

    def __init__(self, draws: int, cap: int, target: int, color: str):
        super().__init__(f"urn reached the draw cap of {cap} before the {target}-th {color} "
                         f"({draws} draws made)")
        self.draws = draws
        self.cap = cap


class InsufficientTrace(ValueError):
    pass


class SiteNotVisited(LookupError):
    pass


class Color(IntEnum):
    RED = 0
    BLUE = 1


# ----------------------------
# State and trace
# ----------------------------
@dataclass
class UrnState:
    spec: WeightSpec
    sign: SiteSign
    blue: int = 0
    red: int = 0

    @property
    def draws(self) -> int:
        return self.blue + self.red

    @property
    def D(self) -> int:
        return self.red - self.blue

    def weights(self) -> tuple[float, float]:
        return weight_table(self.spec).urn(self.sign, self.blue, self.red)


@dataclass(frozen=True, eq=False)
class UrnTrace:
    """Colours drawn from (blue0, red0); colors[j] = 1 when draw j is blue."""

    spec: WeightSpec
    sign: SiteSign
    colors: np.ndarray
    blue0: int = 0
    red0: int = 0

    def __len__(self) -> int:
        return int(self.colors.size)

    def blue_path(self) -> np.ndarray:
        """B after 0, 1, ..., len draws."""
        return self.blue0 + np.concatenate(([0], np.cumsum(self.colors, dtype=np.int64)))

    def red_path(self) -> np.ndarray:
        return self.red0 + np.arange(self.colors.size + 1) - (self.blue_path() - self.blue0)

    def D_path(self) -> np.ndarray:
        return self.red_path() - self.blue_path()

    def D_at(self, k: int) -> int:
        if not 0 <= k <= self.colors.size:
            raise InsufficientTrace(f"trace has {self.colors.size} draws, asked for {k}")
        blues = int(self.colors[:k].sum())
        return (self.red0 + k - blues) - (self.blue0 + blues)

    def _tau(self, k: int, want: int, start: int) -> int:
        if k <= start:
            return 0
        hits = np.flatnonzero(self.colors == want)
        need = k - start
        if need > hits.size:
            name = "blue" if want else "red"
            raise InsufficientTrace(f"trace holds {start + hits.size} {name} draws, asked for {k}")
        return int(hits[need - 1]) + 1

    def tau_blue(self, k: int) -> int:
        """Draws made when B first reaches k; tau_0 = 0."""
        return self._tau(k, 1, self.blue0)

    def tau_red(self, k: int) -> int:
        return self._tau(k, 0, self.red0)

    def blue_times(self) -> np.ndarray:
        """tau_k^B for k = 1..(number of blues)."""
        return np.flatnonzero(self.colors == 1) + 1

    def mu(self, m: int) -> int:
        return self.tau_blue(m) - m

    def counts_before(self) -> tuple[np.ndarray, np.ndarray]:
        """(blue, red) held just before each draw."""
        blue = self.blue_path()[:-1]
        red = self.red_path()[:-1]
        return blue, red


# ----------------------------
# Simulation
# ----------------------------
def _as_table(spec: WeightSpec | WeightTable) -> WeightTable:
    return spec if isinstance(spec, WeightTable) else weight_table(spec)


def draw_until(table: WeightTable, sign: SiteSign, counts: np.ndarray, target: int,
               stop_on_blue: bool, rng: np.random.Generator,
               max_draws: int = MAX_DRAWS, record: bool = False) -> np.ndarray | None:
    """Advance counts = [blue, red] in place until the chosen colour reaches target.

    Uniforms come in doubling chunks; leftovers of the last chunk are discarded.
    Returns the drawn colours when `record` is set.
    """
    memo, power, p, coef = table.kernel_args()
    start = int(counts[0] + counts[1])
    held = int(counts[0] if stop_on_blue else counts[1])
    chunk = max(FIRST_CHUNK, 4 * (int(target) - held))
    pieces = []
    empty = np.zeros(0, dtype=np.uint8)
    while (counts[0] if stop_on_blue else counts[1]) < target:
        made = int(counts[0] + counts[1]) - start
        if made >= max_draws:
            raise DrawCapExceeded(made, max_draws, target, "blue" if stop_on_blue else "red")
        size = min(chunk, max_draws - made)
        uniforms = rng.random(size)
        colors = np.zeros(size, dtype=np.uint8) if record else empty
        used = run_urn(uniforms, counts, target, stop_on_blue, int(sign),
                       memo, power, p, coef, colors, 0, record)
        if record:
            pieces.append(colors[:used])
        chunk *= 2
    if not record:
        return None
    return np.concatenate(pieces) if pieces else empty


def draw(state: UrnState, rng: np.random.Generator) -> tuple[UrnState, Color]:
    """One draw; mutates and returns `state` with the colour drawn."""
    b, r = state.weights()
    if rng.random() < b / (b + r):
        state.blue += 1
        return state, Color.BLUE
    state.red += 1
    return state, Color.RED


def _run_to(state: UrnState, k: int, rng, stop_on_blue: bool, max_draws: int) -> UrnTrace:
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    rng = np.random.default_rng(rng)
    blue0, red0 = state.blue, state.red
    counts = np.array([blue0, red0], dtype=np.int64)
    colors = draw_until(weight_table(state.spec), state.sign, counts, k, stop_on_blue,
                        rng, max_draws=max_draws, record=True)
    state.blue, state.red = int(counts[0]), int(counts[1])
    colors.flags.writeable = False
    return UrnTrace(state.spec, state.sign, colors, blue0, red0)


def run_to_tau_blue(state: UrnState, k: int, rng=None, max_draws: int = MAX_DRAWS) -> UrnTrace:
    """Draw until the k-th blue; `state` is left at tau_k^B."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _run_to(state, k, rng, True, max_draws)


def run_to_tau_red(state: UrnState, k: int, rng=None, max_draws: int = MAX_DRAWS) -> UrnTrace:
    return _run_to(state, k, rng, False, max_draws)


def sample_reds_at_tau_blue(spec: WeightSpec | WeightTable, sign: SiteSign, m: int, reps: int,
                            rng, max_draws: int = MAX_DRAWS) -> np.ndarray:
    """R at tau_m^B from (0, 0), one per replica."""
    table = _as_table(spec)
    rng = np.random.default_rng(rng)
    out = np.empty(reps, dtype=np.int64)
    counts = np.zeros(2, dtype=np.int64)
    for i in range(reps):
        counts[:] = 0
        draw_until(table, sign, counts, m, True, rng, max_draws=max_draws)
        out[i] = counts[1]
    return out


# ----------------------------
# Walk extraction
# ----------------------------
def extract_urn_from_walk(trace: WalkTrace, y: int) -> UrnTrace:
    """The urn at site y read off a walk trace: one draw per departure from y."""
    st = trace.state
    if not st.imin <= y <= st.smax:
        raise SiteNotVisited(f"site {y} outside the visited range [{st.imin}, {st.smax}]")
    colors = departures(trace, y)
    colors.flags.writeable = False
    return UrnTrace(trace.spec, SiteSign.of(y), colors)


def extract_all_urns(trace: WalkTrace) -> dict[int, UrnTrace]:
    return {y: UrnTrace(trace.spec, SiteSign.of(y), colors)
            for y, colors in all_departures(trace).items()}


# ----------------------------
# Drift along an urn trace
# ----------------------------
def drift_terms(trace: UrnTrace) -> np.ndarray:
    """(r - b) / (r + b) at each draw; the walk's drift increment at that departure."""
    table = weight_table(trace.spec)
    blue, red = trace.counts_before()
    b, r = table.urn_arrays(trace.sign, blue, red)
    return (r - b) / (r + b)


def urn_drift(trace: UrnTrace, n_draws: int | None = None) -> float:
    """Drift accumulated over the first n_draws draws, summed in draw order."""
    n = len(trace) if n_draws is None else n_draws
    if not 0 <= n <= len(trace):
        raise InsufficientTrace(f"trace has {len(trace)} draws, asked for {n}")
    if n == 0:
        return 0.0
    return float(np.cumsum(drift_terms(trace)[:n])[-1])


def drift_from_urn(trace: UrnTrace, upto_blue: int) -> float:
    """Sum over l < k of the drift collected between tau_l^B and tau_{l+1}^B."""
    if upto_blue < 0:
        raise ValueError(f"upto_blue must be non-negative, got {upto_blue}")
    return urn_drift(trace, trace.tau_blue(upto_blue))


# ----------------------------
# Exponential martingale
# ----------------------------
def _check_lambda(table: WeightTable, sign: SiteSign, lam: float):
    inf_b = table.urn_bounds(sign)[0]
    if not lam < inf_b:
        raise ValueError(f"lambda={lam} must be below inf b = {inf_b}")


def exp_martingale(trace: UrnTrace, lam: float) -> np.ndarray:
    """phi_k(lambda) = prod_{i<B_k}(1 - lambda/b(i)) * prod_{j<R_k}(1 + lambda/r(j)), k = 0..len."""
    if trace.blue0 or trace.red0:
        raise ValueError("exp_martingale needs a trace started from (0, 0)")
    table = weight_table(trace.spec)
    _check_lambda(table, trace.sign, lam)
    blue, red = trace.counts_before()
    b, r = table.urn_arrays(trace.sign, blue, red)
    factors = np.where(trace.colors == 1, 1.0 - lam / b, 1.0 + lam / r)
    return np.concatenate(([1.0], np.cumprod(factors)))


def martingale_step_check(spec: WeightSpec, sign: SiteSign, blue: int, red: int,
                          lam: float, phi: float = 1.0) -> float:
    """|E[phi_{k+1} | (blue, red)] - phi_k| evaluated from the two branches."""
    table = weight_table(spec)
    _check_lambda(table, sign, lam)
    b, r = table.urn(sign, blue, red)
    tot = b + r
    nxt = (b / tot) * phi * (1.0 - lam / b) + (r / tot) * phi * (1.0 + lam / r)
    return abs(nxt - phi)
