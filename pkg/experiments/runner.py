import concurrent.futures as cf
import os
from typing import Callable, TypeVar

from experiments.defaults import WORKERS_ENV

T = TypeVar("T")


def worker_count(override: int | None = None) -> int:
    """--workers if given, else $SIRW_WORKERS, else 1."""
    if override is not None:
        n = int(override)
    else:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ValueError(f"worker count must be >= 1, got {n}")
    return n


def run_replicas(fn: Callable[[int], T], reps: int, workers: int = 1,
                 label: str = "runner", quiet: bool = True) -> list[T]:
    """fn(0), ..., fn(reps-1), returned in replica order whatever the worker count.

    With workers > 1, `fn` must be picklable (a module-level function or a
    functools.partial of one).
    """
    if reps < 0:
        raise ValueError(f"reps must be >= 0, got {reps}")
    step = max(1, reps // 10)
    results: list = [None] * reps
    if workers <= 1 or reps <= 1:
        for i in range(reps):
            results[i] = fn(i)
            if not quiet and (i + 1) % step == 0:
                print(f"[{label}] {i + 1}/{reps} replicas", flush=True)
        return results

    with cf.ProcessPoolExecutor(max_workers=workers) as ex:
        futs = {ex.submit(fn, i): i for i in range(reps)}
        for done, f in enumerate(cf.as_completed(futs), 1):
            results[futs[f]] = f.result()
            if not quiet and done % step == 0:
                print(f"[{label}] {done}/{reps} replicas ({workers} workers)", flush=True)
    return results
