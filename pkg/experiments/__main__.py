"""
Command-line entry point.

Usage:
    python -m experiments gamma --spec specs/power_law.json --n 10000 --reps 2000 --out results/gamma
    python -m experiments rayknight --spec specs/constant.json --n 1000 --reps 10000 --variant backward
    SIRW_WORKERS=8 python -m experiments flt --spec specs/power_law.json --n-grid 1000,10000

Writes <out>/result.csv (or result.json) and <out>/manifest.json. Errors are
printed as a JSON record and exit non-zero; warnings exit zero.
"""

import argparse
import json
import sys

from experiments.config import EXPERIMENTS, ExperimentConfig, InvalidConfig
from experiments.defaults import GOOD_EVENT_K_GRID, WORKERS_ENV
from experiments.harness import run_experiment
from experiments.records import BAD_REQUEST, error_record
from weights import load_spec

DEFAULT_N = 1000
DEFAULT_REPS = 1000
DEFAULT_T = 1.0
DEFAULT_SEED = 0


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(float(v)) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m experiments",
                                     description="SIRW simulation experiments")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--spec", required=True, help="weight spec JSON file")
    parser.add_argument("--n", type=int, default=DEFAULT_N,
                        help=f"scale parameter (default: {DEFAULT_N})")
    parser.add_argument("--reps", type=int, default=DEFAULT_REPS,
                        help=f"replicas (default: {DEFAULT_REPS})")
    parser.add_argument("--t", type=float, default=DEFAULT_T,
                        help=f"time horizon in units of n (default: {DEFAULT_T})")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"master seed (default: {DEFAULT_SEED})")
    parser.add_argument("--out", default=None,
                        help="output directory (default: results/<experiment>)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="result file format (default: csv)")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    parser.add_argument("--y0", type=float, default=1.0,
                        help="rayknight: start level zeta_0 = floor(y0 n) (default: 1.0)")
    parser.add_argument("--variant", choices=("forward", "backward"), default="backward",
                        help="rayknight: BLP variant (default: backward)")
    parser.add_argument("--k-grid", type=_float_list, default=GOOD_EVENT_K_GRID,
                        help=f"goodevent: K values (default: {','.join(map(str, GOOD_EVENT_K_GRID))})")
    parser.add_argument("--n-grid", type=_int_list, default=None,
                        help="comma-separated n values, replaces --n")
    parser.add_argument("--m", type=int, default=None,
                        help="urn blue count / return index (toth, urnlaw, rho, gamma)")
    parser.add_argument("--sign", choices=("positive", "zero", "negative"), default="positive",
                        help="toth: site sign of the urn (default: positive)")
    parser.add_argument("--lam-grid", type=_float_list, default=None,
                        help="toth: lambda values, e.g. --lam-grid=-0.4,0,0.4")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress lines (warnings are still printed)")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    spec = load_spec(args.spec)
    return ExperimentConfig(
        experiment=args.experiment,
        spec=spec,
        n=args.n,
        reps=args.reps,
        t=args.t,
        seed=args.seed,
        out=args.out or f"results/{args.experiment}",
        format=args.format,
        workers=args.workers,
        y0=args.y0,
        variant=args.variant,
        sign=args.sign,
        m=args.m,
        k_grid=tuple(args.k_grid),
        n_grid=args.n_grid,
        lam_grid=args.lam_grid,
    ).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = run_experiment(cfg, quiet=args.quiet)
    except (InvalidConfig, ValueError, OSError) as e:
        code = getattr(e, "code", BAD_REQUEST)
        print(json.dumps(error_record(code, str(e))), flush=True)
        return 2
    if result.failed:
        print(json.dumps(error_record(result.code, result.message)), flush=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
