"""
Experiment drivers. Each experiment_* function takes a validated config, a
row writer and a replica runner, writes its rows and returns any warnings.

run_experiment() wires them to an output directory:
  <out>/result.csv | result.json
  <out>/manifest.json
"""

from __future__ import annotations

import math
import time
from functools import partial
from typing import Callable

import numpy as np

from blp import (
    BlpKernel,
    Variant,
    extract_backward,
    extract_forward,
    rayknight_experiment,
    step_backward,
    step_forward,
    transition_pairs,
)
from bmpe import sample_bmpe_marginal
from experiments.config import ExperimentConfig
from experiments.defaults import (
    BMPE_DT,
    KS_MAX,
    LIPSCHITZ_K,
    MIN_KS_REPS,
    P_THRESHOLD_GRID,
    SE_MULT,
    SE_MULT_LOOSE,
    TOTH_GAP_MAX,
    TOTH_LAM_GRID,
    URNLAW_ANCHOR,
    URNLAW_VALUES,
)
from experiments.monitors import (
    goodevent_replica,
    good_event_report,
    lipschitz_monitor,
    lipschitz_replica,
)
from experiments.records import (
    BAD_REQUEST,
    INTERNAL_ERROR,
    OK,
    ExperimentResult,
    RowWriter,
    prepare_out_dir,
    write_manifest,
    write_rows,
)
from experiments.runner import run_replicas, worker_count
from experiments.seeding import replica_rng, stream_seed
from stats import ChiSquareDegenerate, EmptySampleError, RunningSummary, chi_square_from_samples, ks_two_sample
from urn import TruncationError, expected_D_at_tau, limit_check, rho_monitor, toth_check, toth_linear_check
from walk import RecordOptions, drift_split, qv_monitor, run, run_until_return
from weights import SiteSign, WeightSpec, gamma_series

Runner = Callable[[Callable[[int], object], int], list]

SIGNS = (SiteSign.POSITIVE, SiteSign.ZERO, SiteSign.NEGATIVE)


def _banner(title: str, quiet: bool = False):
    if quiet:
        return
    print("\n" + "=" * 60, flush=True)
    print(title, flush=True)
    print("=" * 60, flush=True)


def _say(quiet: bool, msg: str):
    if not quiet:
        print(f"  {msg}", flush=True)


def _low_resolution(reps: int) -> dict | None:
    if reps < MIN_KS_REPS:
        return {"code": "LOW_RESOLUTION",
                "message": f"reps={reps} below {MIN_KS_REPS}; KS resolution is coarse"}
    return None


def _oracle_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(stream_seed(seed, "oracle", stream))


# ----------------------------
# flt: X_{floor(nt)} / sqrt(n) against the BMPE(gamma, gamma) marginal
# ----------------------------
def flt_replica(spec: WeightSpec, n: int, t: float, seed: int, replica: int) -> tuple[float, float]:
    steps = int(math.floor(n * t))
    half = int(math.floor(n * t / 2))
    trace = run(spec, steps, RecordOptions(checkpoints=(half,)),
                rng=replica_rng(seed, "flt", replica))
    root = math.sqrt(n)
    return trace.checkpoints[half] / root, trace.final_position / root


def experiment_flt(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"FLT: {cfg.spec.label()}  t={cfg.t:g}", quiet)
    g = gamma_series(cfg.spec).value
    times = (cfg.t / 2, cfg.t)
    dt = min(BMPE_DT, times[0])
    for n in cfg.grid:
        rows = runner(partial(flt_replica, cfg.spec, n, cfg.t, cfg.seed), cfg.reps)
        oracle = sample_bmpe_marginal(g, g, times, dt=dt, reps=cfg.reps, rng=_oracle_rng(cfg.seed))
        for j, t_mark in enumerate(times):
            chain = np.array([r[j] for r in rows])
            ks = ks_two_sample(chain, oracle[j])
            _say(quiet, f"n={n:<8d} t={t_mark:<6g} KS={ks.statistic:.4f}  p={ks.p_value:.3g}")
            writer.writerow({
                "experiment": "flt", "spec": cfg.spec.label(), "n": n, "t": t_mark,
                "reps": cfg.reps, "gamma": g, "ks": ks.statistic, "p_value": ks.p_value,
                "passed": ks.statistic < KS_MAX,
            })
    warning = _low_resolution(cfg.reps)
    return [warning] if warning else []


# ----------------------------
# rayknight
# ----------------------------
def experiment_rayknight(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"RAY-KNIGHT: {cfg.spec.label()}  {cfg.variant}  y0={cfg.y0:g}  t={cfg.t:g}", quiet)
    warnings = []
    for n in cfg.grid:
        res = rayknight_experiment(cfg.spec, n, cfg.y0, cfg.t, cfg.reps, cfg.variant,
                                   seed=cfg.seed, runner=runner)
        rec = res.to_record()
        _say(quiet, f"n={n:<8d} dim={res.law.dim:.4f} KS={res.ks.statistic:.4f}  p={res.ks.p_value:.3g}")
        row = {"experiment": "rayknight", "spec": cfg.spec.label()}
        row.update({k: v for k, v in rec.items() if k not in ("spec", "code", "warning")})
        row["passed"] = res.ks.statistic < KS_MAX
        writer.writerow(row)
        if res.warning and not warnings:
            warnings.append({"code": rec["code"], "message": res.warning})
    return warnings


# ----------------------------
# gamma: E[D at tau_m^B] against +-gamma
# ----------------------------
def experiment_gamma(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    series = gamma_series(cfg.spec)
    m = cfg.m or cfg.n
    _banner(f"GAMMA: {cfg.spec.label()}  gamma={series.value:.10g}  m={m}", quiet)
    for idx, sign in enumerate(SIGNS):
        target = series.value * int(sign) if sign is not SiteSign.ZERO else 0.0
        row = {"experiment": "gamma", "spec": cfg.spec.label(), "sign": sign.label, "m": m,
               "gamma": series.value, "gamma_bound": series.error_bound, "target": target}
        if m >= 4:
            lc = limit_check(cfg.spec, sign, m, target)
            row.update({"dp_value": lc.value, "dp_bound": lc.dp_bound,
                        "tail_estimate": lc.tail_estimate, "rate": lc.rate, "gap": lc.gap,
                        "within": lc.ok(SE_MULT)})
            dp_value, dp_bound = lc.value, lc.dp_bound
        else:
            dp = expected_D_at_tau(cfg.spec, sign, m, "dp")
            dp_value, dp_bound = dp.value, dp.error
            row.update({"dp_value": dp.value, "dp_bound": dp.error, "gap": abs(dp.value - target)})
        mc = expected_D_at_tau(cfg.spec, sign, m, "mc", reps=cfg.reps,
                               rng=np.random.default_rng(stream_seed(cfg.seed, "gamma", idx)))
        row.update({"mc_value": mc.value, "mc_se": mc.error, "reps": cfg.reps,
                    "mc_agrees": abs(mc.value - dp_value) <= SE_MULT_LOOSE * mc.error + dp_bound})
        _say(quiet, f"{sign.label:<9s} dp={dp_value:+.8f}  mc={mc.value:+.5f} (se {mc.error:.2g})"
                    f"  target={target:+.8f}")
        writer.writerow(row)
    return []


# ----------------------------
# toth
# ----------------------------
def experiment_toth(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    lams = cfg.lam_grid or TOTH_LAM_GRID
    sign = cfg.site_sign
    _banner(f"TOTH: {cfg.spec.label()}  m={cfg.m}  sign={cfg.sign}", quiet)
    warnings = []
    base = {"experiment": "toth", "spec": cfg.spec.label(), "sign": sign.label, "m": cfg.m}
    res = toth_linear_check(cfg.spec, sign, cfg.m)
    writer.writerow({**base, "form": "linear", "lam": None, "lhs": res.lhs, "rhs": res.rhs,
                     "gap": res.gap, "bound": res.truncation_error_bound,
                     "passed": res.gap < TOTH_GAP_MAX, "code": OK})
    _say(quiet, f"linear        gap={res.gap:.3g}")
    for lam in lams:
        try:
            res = toth_check(cfg.spec, sign, cfg.m, lam)
        except (TruncationError, ValueError) as e:
            code = getattr(e, "code", BAD_REQUEST)
            _say(quiet, f"lam={lam:<+8g} [{code}] {e}")
            writer.writerow({**base, "form": "exp", "lam": lam, "code": code})
            warnings.append({"code": code, "message": str(e), "lam": lam})
            continue
        _say(quiet, f"lam={lam:<+8g} lhs={res.lhs:.12g}  rhs={res.rhs:.12g}  gap={res.gap:.3g}")
        writer.writerow({**base, "form": "exp", "lam": lam, "lhs": res.lhs, "rhs": res.rhs,
                         "gap": res.gap, "bound": res.truncation_error_bound,
                         "passed": res.gap < TOTH_GAP_MAX, "code": OK})
    return warnings


# ----------------------------
# driftrange / qv: one walk per replica, both monitors read off the final state
# ----------------------------
def drift_replica(spec: WeightSpec, n: int, t: float, seed: int, experiment: str,
                  replica: int) -> tuple[float, float]:
    """(sup_k |Gamma_k - gamma (S_k + I_k)| / sqrt(n), qv monitor) over floor(nt) steps."""
    steps = max(1, int(math.floor(n * t)))
    trace = run(spec, steps, rng=replica_rng(seed, experiment, replica))
    return trace.state.sup_drift_dev / math.sqrt(n), qv_monitor(trace, steps)


def _median_rows(cfg: ExperimentConfig, writer, runner: Runner, column: int, quiet: bool):
    previous = None
    for n in cfg.grid:
        rows = runner(partial(drift_replica, cfg.spec, n, cfg.t, cfg.seed, cfg.experiment), cfg.reps)
        values = np.array([r[column] for r in rows])
        summary = RunningSummary(f"n={n}")
        summary.record_many(values)
        median = float(np.median(values))
        _say(quiet, f"n={n:<8d} median={median:.6g}  mean={summary.mean:.6g} (se {summary.se:.2g})")
        writer.writerow({
            "experiment": cfg.experiment, "spec": cfg.spec.label(), "n": n, "t": cfg.t,
            "reps": cfg.reps, "median": median, "mean": summary.mean, "se": summary.se,
            "q90": float(np.quantile(values, 0.9)), "max": summary.max,
            "decreased": None if previous is None else median < previous,
        })
        previous = median


def experiment_driftrange(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"DRIFT vs RANGE: {cfg.spec.label()}  t={cfg.t:g}", quiet)
    _median_rows(cfg, writer, runner, 0, quiet)
    return []


def experiment_qv(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"QUADRATIC VARIATION: {cfg.spec.label()}  t={cfg.t:g}", quiet)
    _median_rows(cfg, writer, runner, 1, quiet)
    return []


# ----------------------------
# goodevent
# ----------------------------
def goodevent_task(spec: WeightSpec, n: int, t: float, seed: int, replica: int):
    return goodevent_replica(spec, n, t, replica_rng(seed, "goodevent", replica))


def experiment_goodevent(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"GOOD EVENT: {cfg.spec.label()}  t={cfg.t:g}  K={list(cfg.k_grid)}", quiet)
    for n in cfg.grid:
        levels = runner(partial(goodevent_task, cfg.spec, n, cfg.t, cfg.seed), cfg.reps)
        report = good_event_report(levels, n, cfg.t, cfg.k_grid)
        for row in report.rows():
            _say(quiet, f"n={n:<8d} K={row['K']:<6g} all={row['all']:.3f}")
            writer.writerow({"experiment": "goodevent", "spec": cfg.spec.label(), **row})
    return []


# ----------------------------
# urnlaw: one-step BLP laws, walk-extracted against kernel-simulated
# ----------------------------
CELLS = (
    ("forward", "positive"),
    ("backward", "positive"),
    ("backward", "negative"),
)


def urnlaw_replica(spec: WeightSpec, m: int, seed: int, replica: int) -> dict:
    """Successors of each tested value per cell, read off one walk stopped at lambda_{x,m}."""
    x = URNLAW_ANCHOR
    trace = run_until_return(spec, x, m, rng=replica_rng(seed, "urnlaw", replica))
    fwd = extract_forward(trace, x, m)
    bwd = extract_backward(trace, x, m)
    out = {}
    for v in URNLAW_VALUES:
        out[("forward", "positive", v)] = transition_pairs([fwd], v)
        out[("backward", "positive", v)] = transition_pairs([bwd], v, 0, x - 1)
        out[("backward", "negative", v)] = transition_pairs([bwd], v, x)
    return out


def _kernel_sample(spec: WeightSpec, variant: str, regime: str, value: int, reps: int,
                   rng: np.random.Generator) -> np.ndarray:
    if variant == "forward":
        kernel = BlpKernel(spec, Variant.FORWARD)
        return np.array([step_forward(kernel, value, rng) for _ in range(reps)])
    kernel = BlpKernel(spec, Variant.BACKWARD, anchor=URNLAW_ANCHOR)
    k = 0 if regime == "positive" else URNLAW_ANCHOR
    return np.array([step_backward(kernel, k, value, rng) for _ in range(reps)])


def experiment_urnlaw(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"URN LAW: {cfg.spec.label()}  x={URNLAW_ANCHOR}  m={cfg.m}", quiet)
    per_replica = runner(partial(urnlaw_replica, cfg.spec, cfg.m, cfg.seed), cfg.reps)
    warnings = []
    stream = 0
    for variant, regime in CELLS:
        for v in URNLAW_VALUES:
            stream += 1
            key = (variant, regime, v)
            walk_values = np.concatenate([r[key] for r in per_replica])
            kern = _kernel_sample(cfg.spec, variant, regime, v, cfg.reps, _oracle_rng(cfg.seed, stream))
            row = {"experiment": "urnlaw", "spec": cfg.spec.label(), "variant": variant,
                   "regime": regime, "value": v, "m": cfg.m,
                   "n_walk": int(walk_values.size), "n_kernel": int(kern.size)}
            try:
                res = chi_square_from_samples(walk_values, kern)
            except (EmptySampleError, ChiSquareDegenerate) as e:
                _say(quiet, f"{variant:<8s} {regime:<8s} i={v}  skipped: {e}")
                warnings.append({"code": "LOW_RESOLUTION", "message": f"cell {key}: {e}"})
                writer.writerow({**row, "code": "LOW_RESOLUTION"})
                continue
            _say(quiet, f"{variant:<8s} {regime:<8s} i={v}  n={walk_values.size:<7d} "
                        f"chi2={res.statistic:.2f} dof={res.dof}  p={res.p_value:.3g}")
            writer.writerow({**row, "chi2": res.statistic, "dof": res.dof, "p_value": res.p_value,
                             "passed": res.passed(P_THRESHOLD_GRID), "code": OK})
    return warnings


# ----------------------------
# lipschitz
# ----------------------------
def _lipschitz_m(cfg: ExperimentConfig, n: int) -> int:
    return cfg.m if cfg.m is not None else max(1, int(math.isqrt(n)))


def lipschitz_task(spec: WeightSpec, n: int, t: float, m: int, seed: int, replica: int):
    return lipschitz_replica(spec, n, t, 0, m, replica_rng(seed, "lipschitz", replica))


def experiment_lipschitz(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"LIPSCHITZ: {cfg.spec.label()}  K={LIPSCHITZ_K:g}  n={list(cfg.grid)}", quiet)
    samples = {}
    for n in cfg.grid:
        samples[n] = runner(partial(lipschitz_task, cfg.spec, n, cfg.t, _lipschitz_m(cfg, n), cfg.seed),
                            cfg.reps)
    report = lipschitz_monitor(cfg.spec, samples, LIPSCHITZ_K)
    for row in report.rows:
        _say(quiet, f"n={row['n']:<8d} good={row['good']}/{row['reps']}  "
                    f"median max|Delta|={row['median_max_delta']}")
        writer.writerow({"experiment": "lipschitz", "spec": cfg.spec.label(), **row,
                         "m": _lipschitz_m(cfg, row["n"]), "K": report.K,
                         "exponent": report.exponent, "raw_exponent": report.raw_exponent,
                         "predicted": report.predicted})
    _say(quiet, f"fitted exponent {report.exponent}  predicted {report.predicted}")
    if report.flag:
        return [{"code": report.flag, "message": "some n had no replica on the good event"}]
    return []


# ----------------------------
# rho
# ----------------------------
def rho_task(spec: WeightSpec, m: int, seed: int, replica: int) -> dict:
    trace = run_until_return(spec, 0, m, rng=replica_rng(seed, "rho", replica))
    report = rho_monitor(trace, 0, m)
    split = drift_split(trace)
    return {
        "replica": replica, "lam": trace.n_steps, **report.to_dict(),
        "drift_positive": split.positive, "predicted_positive": split.predicted_positive,
        "drift_negative": split.negative, "predicted_negative": split.predicted_negative,
        "drift_zero": split.zero,
    }


def experiment_rho(cfg: ExperimentConfig, writer, runner: Runner, quiet: bool = False) -> list[dict]:
    _banner(f"RHO: {cfg.spec.label()}  x=0  m={cfg.m}", quiet)
    rows = runner(partial(rho_task, cfg.spec, cfg.m, cfg.seed), cfg.reps)
    summary = RunningSummary("delta_minus_rho")
    for row in rows:
        summary.record(row["delta_minus_rho"])
        writer.writerow({"experiment": "rho", "spec": cfg.spec.label(), **row})
    _say(quiet, f"sum (Delta - rho): mean={summary.mean:.6g} (se {summary.se:.2g})")
    return []


EXPERIMENT_FUNCS = {
    "flt": experiment_flt,
    "rayknight": experiment_rayknight,
    "gamma": experiment_gamma,
    "toth": experiment_toth,
    "driftrange": experiment_driftrange,
    "qv": experiment_qv,
    "goodevent": experiment_goodevent,
    "urnlaw": experiment_urnlaw,
    "lipschitz": experiment_lipschitz,
    "rho": experiment_rho,
}


def _error_code(e: Exception) -> str:
    code = getattr(e, "code", None)
    if code:
        return code
    return BAD_REQUEST if isinstance(e, ValueError) else INTERNAL_ERROR


def run_experiment(cfg: ExperimentConfig, workers: int | None = None,
                   quiet: bool = False) -> ExperimentResult:
    """Run one experiment and write result + manifest under cfg.out.

    Errors raised by the experiment become the result's code and message;
    rows written before the error are kept. An unwritable output directory
    raises OutputNotWritable before anything runs.
    """
    cfg.validate()
    prepare_out_dir(cfg.out)
    n_workers = worker_count(workers if workers is not None else cfg.workers)
    runner = partial(run_replicas, workers=n_workers, label=cfg.experiment, quiet=quiet)

    writer = RowWriter()
    t0 = time.perf_counter()
    code, message, warnings = OK, "", []
    try:
        warnings = EXPERIMENT_FUNCS[cfg.experiment](cfg, writer, runner, quiet) or []
    except Exception as e:
        code, message = _error_code(e), f"{type(e).__name__}: {e}"
        print(f"[harness] {cfg.experiment} failed [{code}] {message}", flush=True)
    wall = time.perf_counter() - t0

    for w in warnings:
        print(f"[harness] warning [{w['code']}] {w['message']}", flush=True)
    result = ExperimentResult(cfg.experiment, writer.rows, writer.fieldnames, code, message, warnings)
    files = [write_rows(result, cfg.out, cfg.format)]
    files.append(write_manifest(cfg, result, files, wall, n_workers))
    if not quiet:
        print(f"\n[harness] results written to {files[0]} ({len(writer)} rows, {wall:.1f}s)", flush=True)
    return result
