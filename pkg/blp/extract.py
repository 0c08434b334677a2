from __future__ import annotations

import numpy as np

from blp.kernel import BlpTrace, Extracted, Variant
from urn import extract_all_urns
from walk import WalkTrace, directed_profile

BACKWARD_CAP = 64


def extract_forward(trace: WalkTrace, x: int, m: int, side: int = 1) -> BlpTrace:
    """(E^{(x,m)}_{x+k,+})_{k>=0} up to its first zero, plus one guard entry.

    side=-1 reads the mirror image (E^{(x,m)}_{x-k,-})_{k>=0} for x <= 0.
    """
    if side not in (1, -1):
        raise ValueError(f"side must be +1 or -1, got {side}")
    if side * x < 0:
        raise ValueError(f"x={x} is on the wrong side of 0 for side={side}")
    prof = directed_profile(trace, x, m)
    read = prof.plus if side > 0 else prof.minus
    values = []
    k = 0
    while True:
        v = read(x + side * k)
        values.append(v)
        if v == 0:
            break
        k += 1
    values.append(0)
    arr = np.asarray(values, dtype=np.int64)
    arr.flags.writeable = False
    return BlpTrace(arr, Extracted(x, m), Variant.FORWARD, meta={"lam": prof.lam, "side": side})


def extract_backward(trace: WalkTrace, x: int, m: int, cap: int = BACKWARD_CAP) -> BlpTrace:
    """(E^{(x,m)}_{x-k,-})_{k>=0}, at most 4x + cap entries.

    Past the anchor (k >= x) the chain is absorbed at 0; the trace stops at
    that zero plus one guard entry, and is flagged truncated if the window
    ran out first.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    prof = directed_profile(trace, x, m)
    limit = 4 * x + cap
    values = []
    stopped = False
    for k in range(limit):
        v = prof.minus(x - k)
        values.append(v)
        if k >= x and v == 0:
            stopped = True
            break
    if stopped and len(values) < limit:
        values.append(0)
    arr = np.asarray(values, dtype=np.int64)
    arr.flags.writeable = False
    return BlpTrace(arr, Extracted(x, m), Variant.BACKWARD, truncated=not stopped,
                    meta={"lam": prof.lam})


def forward_from_urns(trace: WalkTrace, x: int, m: int) -> np.ndarray:
    """Forward profile rebuilt site by site: the next value is the red count of the
    urn at x+k+1 at its (current value)-th blue."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    prof = directed_profile(trace, x, m)
    urns = extract_all_urns(trace)
    values = [prof.plus(x)]
    while values[-1] > 0:
        y = x + len(values)
        values.append(urns[y].mu(values[-1]))
    values.append(0)
    return np.asarray(values, dtype=np.int64)


def transition_pairs(traces, value: int, k_min: int = 0, k_max: int | None = None) -> np.ndarray:
    """Successors of `value` at steps k_min <= k < k_max over a collection of traces."""
    out = []
    for tr in traces:
        vals = tr.values if isinstance(tr, BlpTrace) else np.asarray(tr)
        hi = vals.size - 1 if k_max is None else min(k_max, vals.size - 1)
        if hi <= k_min:
            continue
        idx = k_min + np.flatnonzero(vals[k_min:hi] == value)
        out.append(vals[idx + 1])
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def total_time(trace: WalkTrace, x: int, m: int) -> tuple[int, int]:
    """(lambda_{x,m}, sum_y E^{(x,m)}_{y,+} + E^{(x,m)}_{y,-}); equal on every trace."""
    prof = directed_profile(trace, x, m)
    return prof.lam, int(prof.up.sum() + prof.down.sum())
