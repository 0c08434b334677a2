"""
Result rows and the manifest written next to them.

Experiments call writer.writerow(dict) as rows are produced; the rows are
flushed once at the end as result.csv (csv.DictWriter) or result.json.
Result files depend only on (config, seed); the manifest carries the
timestamp, wall time and worker count.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from experiments.config import ExperimentConfig
from experiments.defaults import CSV_SCHEMA_VERSION

PACKAGES = ("numpy", "scipy", "pandas", "numba", "jsonschema")

OK = "OK"
BAD_REQUEST = "BAD_REQUEST"
INTERNAL_ERROR = "INTERNAL_ERROR"


class OutputNotWritable(OSError):
    code = "BAD_REQUEST"


class RowWriter:
    """Collects rows in order; the column list is the union of keys in first-seen order."""

    def __init__(self):
        self.rows: list[dict] = []
        self.fieldnames: list[str] = []

    def writerow(self, row: dict):
        for key in row:
            if key not in self.fieldnames:
                self.fieldnames.append(key)
        self.rows.append(dict(row))

    def writerows(self, rows):
        for row in rows:
            self.writerow(row)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class ExperimentResult:
    experiment: str
    rows: list[dict]
    fieldnames: list[str]
    code: str = OK
    message: str = ""
    warnings: list[dict] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.code not in (OK,)

    def status(self) -> dict:
        out = {"code": self.code, "experiment": self.experiment}
        if self.message:
            out["message"] = self.message
        if self.warnings:
            out["warnings"] = self.warnings
        return out


def error_record(code: str, message: str, **extra) -> dict:
    return {"code": code, "message": message, **extra}


def _scalar(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def _cell(value):
    value = _scalar(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return value


def _json_safe(value):
    value = _scalar(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def prepare_out_dir(out: str | Path) -> Path:
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
        marker = path / ".write_check"
        marker.write_text("")
        marker.unlink()
    except OSError as e:
        raise OutputNotWritable(f"output directory {str(path)!r} is not writable: {e}") from e
    return path


def write_rows(result: ExperimentResult, out: str | Path, fmt: str) -> Path:
    out_dir = Path(out)
    if fmt == "csv":
        path = out_dir / "result.csv"
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=result.fieldnames, lineterminator="\n")
            writer.writeheader()
            for row in result.rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
    elif fmt == "json":
        path = out_dir / "result.json"
        with open(path, "w") as f:
            json.dump(_json_safe({"experiment": result.experiment, "rows": result.rows}),
                      f, indent=2, sort_keys=True)
            f.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'json'")
    return path


def package_versions() -> dict:
    out = {"python": platform.python_version()}
    for name in PACKAGES:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = None
    return out


def write_manifest(config: ExperimentConfig, result: ExperimentResult, files: list[Path],
                   wall_time_s: float, workers: int) -> Path:
    manifest = {
        "config": config.to_dict(),
        "status": result.status(),
        "files": [p.name for p in files],
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "versions": package_versions(),
        "workers": workers,
        "wall_time_s": round(wall_time_s, 3),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path = Path(config.out) / "manifest.json"
    with open(path, "w") as f:
        json.dump(_json_safe(manifest), f, indent=2, sort_keys=True)
        f.write("\n")
    return path
