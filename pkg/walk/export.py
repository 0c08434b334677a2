"""Trace summaries as CSV rows and full traces as 8-bit step dumps."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from walk.observables import qv_monitor, sup_drift_vs_range
from walk.state import WalkTrace

SUMMARY_FIELDS = ["seed", "n", "X_n", "S_n", "I_n", "Gamma_n",
                  "qv_monitor", "sup_drift_vs_range"]
STEP_FORMAT = "u8-steps"
STEP_FORMAT_VERSION = 1


def summary_row(trace: WalkTrace) -> dict:
    st = trace.state
    return {
        "seed": trace.seed,
        "n": trace.n_steps,
        "X_n": st.pos,
        "S_n": st.smax,
        "I_n": st.imin,
        "Gamma_n": repr(st.drift_acc),
        "qv_monitor": repr(qv_monitor(trace, trace.n_steps)) if trace.n_steps else "0.0",
        "sup_drift_vs_range": repr(sup_drift_vs_range(trace)),
    }


def dump_steps(trace: WalkTrace, path: str | Path) -> Path:
    """Write one byte per step (1 = right) plus a JSON sidecar; returns the sidecar path."""
    path = Path(path)
    trace.step_directions().tofile(path)
    sidecar = path.with_suffix(path.suffix + ".json")
    header = {
        "format": STEP_FORMAT,
        "version": STEP_FORMAT_VERSION,
        "spec": trace.spec.to_dict(),
        "seed": trace.seed,
        "n": trace.n_steps,
    }
    with open(sidecar, "w") as f:
        json.dump(header, f, indent=2)
    return sidecar


def load_steps(path: str | Path) -> tuple[np.ndarray, dict]:
    """Positions rebuilt from a step dump, and its sidecar header."""
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as f:
        header = json.load(f)
    if header.get("format") != STEP_FORMAT:
        raise ValueError(f"{path}: not a {STEP_FORMAT} dump")
    steps = np.fromfile(path, dtype=np.uint8)
    if steps.size != header["n"]:
        raise ValueError(f"{path}: {steps.size} steps on disk, header says {header['n']}")
    moves = 2 * steps.astype(np.int64) - 1
    return np.concatenate(([0], np.cumsum(moves))), header
