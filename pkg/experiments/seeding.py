"""
Replica seed streams: seed(r) = mix(master seed, experiment id, r).

Every replica's stream depends only on its own index, so replicas can run
in any order and on any number of workers.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# Stable ids; append only.
EXPERIMENT_IDS = {
    "flt": 1,
    "rayknight": 2,
    "gamma": 3,
    "toth": 4,
    "driftrange": 5,
    "qv": 6,
    "goodevent": 7,
    "urnlaw": 8,
    "lipschitz": 9,
    "rho": 10,
    "oracle": 11,
}


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state x (state advanced by the golden gamma first)."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def experiment_id(experiment: str) -> int:
    try:
        return EXPERIMENT_IDS[experiment]
    except KeyError:
        raise ValueError(f"unknown experiment {experiment!r}") from None


def stream_seed(seed: int, experiment: str, replica: int) -> int:
    """64-bit seed for (experiment, replica) under master `seed`."""
    h = splitmix64(seed & MASK64)
    h = splitmix64(h ^ experiment_id(experiment))
    return splitmix64(h ^ (replica & MASK64))


def replica_rng(seed: int, experiment: str, replica: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(seed, experiment, replica))
