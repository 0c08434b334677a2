"""
Squared Bessel samplers in the "2Z is BESQ(dim)" convention: a BLP scaled by
n converges to Z, so its comparison law is BESQ(dim) started from x0 = 2*Z_0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from experiments.defaults import BESQ_DT

SAMPLE_FORMAT = "f8-samples"
SAMPLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class BesqLaw:
    dim: float
    x0: float = 0.0

    def __post_init__(self):
        if not self.dim >= 0:
            raise ValueError(f"BESQ dimension must be >= 0, got {self.dim}")
        if not self.x0 >= 0:
            raise ValueError(f"BESQ start must be >= 0, got {self.x0}")

    def mean(self, t: float) -> float:
        return self.x0 + self.dim * t

    def to_dict(self) -> dict:
        return {"dim": self.dim, "x0": self.x0}


def sample_besq_marginal(law: BesqLaw, t: float, rng=None, size: int | None = None):
    """Exact BESQ(dim) value at t: t * chi-square(dim + 2N), N ~ Poisson(x0 / (2t))."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    rng = np.random.default_rng(rng)
    shape = 1 if size is None else size
    n = rng.poisson(law.x0 / (2.0 * t), shape)
    df = law.dim + 2.0 * n
    out = np.zeros(shape)
    live = df > 0
    out[live] = t * rng.chisquare(df[live])
    return float(out[0]) if size is None else out


@dataclass(frozen=True, eq=False)
class BesqPath:
    law: BesqLaw
    dt: float
    values: np.ndarray
    sigma0: float           # first grid time at 0; inf if never

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)


def _euler(law: BesqLaw, t_end: float, dt: float, absorb: bool, reps: int,
           rng: np.random.Generator, keep_path: bool):
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    steps = max(1, int(round(t_end / dt)))
    sticky = absorb and law.dim < 2.0
    x = np.full(reps, float(law.x0))
    sigma0 = np.where(x <= 0.0, 0.0, math.inf)
    stuck = sticky & (x <= 0.0)
    sd = math.sqrt(dt)
    path = np.empty((steps + 1, reps)) if keep_path else None
    if keep_path:
        path[0] = x
    for k in range(1, steps + 1):
        z = rng.standard_normal(reps)
        x = np.maximum(0.0, x + law.dim * dt + 2.0 * np.sqrt(x) * sd * z)
        if sticky:
            x[stuck] = 0.0
        hit = (x <= 0.0) & np.isinf(sigma0)
        sigma0[hit] = k * dt
        if sticky:
            stuck |= x <= 0.0
        if keep_path:
            path[k] = x
    return x, sigma0, path


def besq_path(law: BesqLaw, t_end: float, dt: float = BESQ_DT, absorb_at_zero: bool = True,
              rng=None) -> BesqPath:
    """Euler-Maruyama for dX = dim dt + 2 sqrt(X+) dB, clipped at 0.

    With `absorb_at_zero` and dim < 2 the path stays at 0 after its first hit.
    """
    _, sigma0, path = _euler(law, t_end, dt, absorb_at_zero, 1,
                             np.random.default_rng(rng), keep_path=True)
    return BesqPath(law, dt, path[:, 0], float(sigma0[0]))


def besq_paths(law: BesqLaw, t_end: float, dt: float = BESQ_DT, absorb_at_zero: bool = True,
               reps: int = 1000, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """(X at t_end, sigma0) for `reps` independent Euler paths."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    ends, sigma0, _ = _euler(law, t_end, dt, absorb_at_zero, reps,
                             np.random.default_rng(rng), keep_path=False)
    return ends, sigma0


def besq_rows(path: BesqPath) -> list[dict]:
    """CSV rows (t, Z)."""
    return [{"t": repr(float(t)), "Z": repr(float(z))} for t, z in zip(path.times, path.values)]


def dump_samples(values, path: str | Path, header: dict) -> Path:
    """Flat little-endian doubles plus a JSON sidecar; returns the sidecar path."""
    path = Path(path)
    arr = np.ascontiguousarray(values, dtype="<f8")
    arr.tofile(path)
    sidecar = path.with_suffix(path.suffix + ".json")
    meta = {"format": SAMPLE_FORMAT, "version": SAMPLE_FORMAT_VERSION, "count": int(arr.size)}
    meta.update(header)
    with open(sidecar, "w") as f:
        json.dump(meta, f, indent=2)
    return sidecar


def load_samples(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as f:
        header = json.load(f)
    if header.get("format") != SAMPLE_FORMAT:
        raise ValueError(f"{path}: not a {SAMPLE_FORMAT} dump")
    values = np.fromfile(path, dtype="<f8")
    if values.size != header["count"]:
        raise ValueError(f"{path}: {values.size} samples on disk, header says {header['count']}")
    return values, header
