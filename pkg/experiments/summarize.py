"""
Summarise finished experiment runs.

Reads every <root>/*/result.csv (or result.json) with its manifest.json and
prints one line per run: rows written, how many carry a pass flag and how
many passed, and the run's status code. The table is also saved as
<root>/summary.csv.

Usage:
    python -m experiments.summarize results/
"""

import argparse
import json
from pathlib import Path

import pandas as pd

SUMMARY_COLUMNS = ["run", "experiment", "spec", "rows", "checked", "passed", "code", "warnings"]


def load_result(run_dir: Path) -> pd.DataFrame | None:
    csv_path = run_dir / "result.csv"
    if csv_path.exists():
        return pd.read_csv(csv_path)
    json_path = run_dir / "result.json"
    if json_path.exists():
        with open(json_path) as f:
            return pd.DataFrame(json.load(f)["rows"])
    return None


def _pass_counts(frame: pd.DataFrame) -> tuple[int, int]:
    if "passed" not in frame:
        return 0, 0
    flags = frame["passed"].dropna()
    # CSV stores booleans as true/false; JSON keeps them as bools
    flags = flags.map(lambda v: v if isinstance(v, bool) else str(v).lower() == "true")
    return int(flags.size), int(flags.sum())


def summarize_run(run_dir: Path) -> dict | None:
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        return None
    with open(manifest_path) as f:
        manifest = json.load(f)
    frame = load_result(run_dir)
    if frame is None:
        frame = pd.DataFrame()
    checked, passed = _pass_counts(frame)
    status = manifest.get("status", {})
    return {
        "run": run_dir.name,
        "experiment": manifest["config"]["experiment"],
        "spec": frame["spec"].iloc[0] if "spec" in frame and len(frame) else "",
        "rows": len(frame),
        "checked": checked,
        "passed": passed,
        "code": status.get("code", ""),
        "warnings": len(status.get("warnings", [])),
    }


def summarize(root: str | Path) -> pd.DataFrame:
    root = Path(root)
    records = [rec for d in sorted(p for p in root.iterdir() if p.is_dir())
               if (rec := summarize_run(d)) is not None]
    return pd.DataFrame(records, columns=SUMMARY_COLUMNS)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m experiments.summarize",
                                     description="Summarise experiment result directories")
    parser.add_argument("root", nargs="?", default="results",
                        help="directory holding one sub-directory per run (default: results)")
    args = parser.parse_args(argv)

    root = Path(args.root)
    if not root.is_dir():
        print(f"[summarize] {root} not found.", flush=True)
        print("Run first:  python -m experiments <experiment> --spec <spec.json>", flush=True)
        return 2

    print(f"[summarize] reading {root}...", flush=True)
    table = summarize(root)
    if table.empty:
        print("[summarize] no finished runs found.", flush=True)
        return 0
    print(table.to_string(index=False), flush=True)
    out = root / "summary.csv"
    table.to_csv(out, index=False)
    print(f"\n[summarize] saved {out}", flush=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
