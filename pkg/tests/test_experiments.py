import csv
import json
import math
import operator

import numpy as np
import pytest

from experiments import harness
from experiments.__main__ import main
from experiments.config import EXPERIMENTS, ExperimentConfig, InvalidConfig
from experiments.defaults import WORKERS_ENV
from experiments.monitors import (
    CLAUSES,
    GoodEventLevels,
    LipschitzSample,
    fit_exponent,
    good_event_levels,
    good_event_report,
    lipschitz_monitor,
    predicted_exponent,
)
from experiments.records import (
    OK,
    ExperimentResult,
    OutputNotWritable,
    RowWriter,
    prepare_out_dir,
    write_rows,
)
from experiments.runner import run_replicas, worker_count
from experiments.seeding import EXPERIMENT_IDS, experiment_id, splitmix64, stream_seed
from experiments.summarize import main as summarize_main, summarize
from walk import RecordOptions, run
from weights import WeightSpec, dump_spec

CONSTANT = WeightSpec.constant()
ONCE = WeightSpec.once_reinforced(0.5)
POWER = WeightSpec.power_law(0.5, 0.2)


def make_config(experiment, tmp_path, spec=POWER, **kw):
    base = dict(experiment=experiment, spec=spec, n=50, reps=20, t=1.0, seed=3,
                out=str(tmp_path / experiment))
    base.update(kw)
    return ExperimentConfig(**base)


class TestSeeding:
    def test_splitmix_reference(self):
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_streams_distinct(self):
        seeds = {stream_seed(0, e, r) for e in EXPERIMENT_IDS for r in range(2000)}
        assert len(seeds) == len(EXPERIMENT_IDS) * 2000

    def test_stable(self):
        assert stream_seed(42, "flt", 7) == stream_seed(42, "flt", 7)
        assert stream_seed(42, "flt", 7) != stream_seed(43, "flt", 7)

    def test_every_experiment_has_an_id(self):
        assert set(EXPERIMENTS) <= set(EXPERIMENT_IDS)
        with pytest.raises(ValueError):
            experiment_id("nope")


class TestRunner:
    def test_env(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert worker_count() == 3
        assert worker_count(2) == 2
        monkeypatch.delenv(WORKERS_ENV)
        assert worker_count() == 1

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "many")
        with pytest.raises(ValueError):
            worker_count()
        with pytest.raises(ValueError):
            worker_count(0)

    @pytest.mark.parametrize("workers", [1, 2])
    def test_order(self, workers):
        assert run_replicas(operator.neg, 25, workers=workers) == [-i for i in range(25)]


class TestConfig:
    def test_required_m(self, tmp_path):
        with pytest.raises(InvalidConfig) as err:
            make_config("toth", tmp_path).validate()
        assert err.value.code == "BAD_REQUEST"
        assert any(e.startswith("m:") for e in err.value.errors)

    def test_schema_errors(self, tmp_path):
        with pytest.raises(InvalidConfig):
            make_config("gamma", tmp_path, reps=0).validate()
        data = make_config("gamma", tmp_path).to_dict()
        data["colour"] = "blue"
        with pytest.raises(InvalidConfig):
            ExperimentConfig.from_dict(data)

    def test_load(self, tmp_path):
        cfg = make_config("lipschitz", tmp_path, n_grid=(50, 100))
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.load(path) == cfg

    def test_grid(self, tmp_path):
        cfg = make_config("qv", tmp_path)
        assert cfg.grid == (50,)
        assert cfg.with_(n_grid=(10, 20)).grid == (10, 20)


class TestRecords:
    def test_fieldnames_union(self):
        w = RowWriter()
        w.writerows([{"a": 1, "b": 2}, {"b": 3, "c": 4}])
        assert w.fieldnames == ["a", "b", "c"] and len(w) == 2

    def test_csv_cells(self, tmp_path):
        result = ExperimentResult("x", [{"a": np.float64(0.1), "b": True, "c": None}], ["a", "b", "c"])
        path = write_rows(result, tmp_path, "csv")
        assert path.read_text() == "a,b,c\n0.1,true,\n"

    def test_json(self, tmp_path):
        result = ExperimentResult("x", [{"v": math.inf, "n": np.int64(3)}], ["v", "n"])
        data = json.loads(write_rows(result, tmp_path, "json").read_text())
        assert data["rows"] == [{"n": 3, "v": "inf"}]

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OutputNotWritable):
            prepare_out_dir(blocker / "sub")


class TestGoodEvent:
    def test_holds(self):
        lv = GoodEventLevels(extrema=5.0, local_time=8.0, urn_tau=40.0, urn_gap=math.inf)
        assert lv.holds(1.0, 100) == (True, True, True, True)
        assert lv.holds(0.6, 100) == (True, False, True, True)
        assert lv.holds(5.0, 100) == (True, True, False, True)

    def test_levels_from_trace(self):
        tr = run(ONCE, 400, RecordOptions(positions=True), rng=5)
        lv = good_event_levels(tr, 400)
        assert lv.extrema == max(tr.state.smax, -tr.state.imin)
        assert lv.local_time == np.bincount(tr.positions - tr.state.imin).max()
        with pytest.raises(ValueError):
            good_event_levels(run(ONCE, 10, rng=5), 10)

    def test_report_monotone_in_K(self):
        levels = [harness.goodevent_task(POWER, 200, 1.0, 9, r) for r in range(30)]
        report = good_event_report(levels, 200, 1.0, (0.5, 1.0, 2.0, 5.0))
        f = report.freqs
        assert f.shape == (4, len(CLAUSES))
        assert np.all(np.diff(f[:, 0]) >= 0) and np.all(np.diff(f[:, 1]) >= 0)
        assert np.all(np.diff(f[:, 2]) <= 0) and np.all(np.diff(f[:, 3]) <= 0)
        assert np.all(report.joint <= f.min(axis=1))
        assert [r["K"] for r in report.rows()] == [0.5, 1.0, 2.0, 5.0]

    def test_empty_report(self):
        with pytest.raises(ValueError):
            good_event_report([], 10, 1.0)


class TestLipschitz:
    def test_predicted(self):
        assert predicted_exponent(WeightSpec.power_law(0.3, 0.2)) == (pytest.approx(0.1), 4)
        assert predicted_exponent(WeightSpec.power_law(0.5, 0.2)) == (0.0, 5)
        assert predicted_exponent(WeightSpec.power_law(0.8, 0.2))[0] is None
        assert predicted_exponent(ONCE)[0] is None

    def test_fit(self):
        ns = [100, 1000, 10_000]
        assert fit_exponent(ns, [n ** 0.3 for n in ns]) == pytest.approx(0.3)
        vals = [n ** 0.1 * math.log(n) ** 4 for n in ns]
        assert fit_exponent(ns, vals, 4) == pytest.approx(0.1)
        assert fit_exponent(ns, [0.0, 0.0, 0.0]) is None

    def test_constant_drifts_vanish(self):
        good = GoodEventLevels(0.0, 0.0, math.inf, math.inf)
        samples = {n: [LipschitzSample(good, 0.0)] * 3 for n in (100, 400)}
        report = lipschitz_monitor(CONSTANT, samples)
        assert [r["median_max_delta"] for r in report.rows] == [0.0, 0.0]
        assert report.flag is None and report.exponent is None

    def test_no_good_replica(self):
        bad = GoodEventLevels(1e9, 0.0, math.inf, math.inf)
        report = lipschitz_monitor(POWER, {100: [LipschitzSample(bad, 0.5)]})
        assert report.flag == "NO_GOOD_REPLICA"
        assert report.rows[0]["good"] == 0


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestHarness:
    def test_gamma_constant(self, tmp_path):
        cfg = make_config("gamma", tmp_path, spec=CONSTANT, m=8, reps=300)
        result = harness.run_experiment(cfg, quiet=True)
        assert result.code == OK
        rows = _read_csv(tmp_path / "gamma" / "result.csv")
        assert [r["sign"] for r in rows] == ["positive", "zero", "negative"]
        for r in rows:
            assert abs(float(r["dp_value"])) < 1e-8
            assert r["mc_agrees"] == "true"
        manifest = json.loads((tmp_path / "gamma" / "manifest.json").read_text())
        assert manifest["status"]["code"] == OK
        assert manifest["files"] == ["result.csv"]

    def test_toth_bad_lambda_is_a_row(self, tmp_path):
        cfg = make_config("toth", tmp_path, m=5, lam_grid=(0.2, 5.0))
        result = harness.run_experiment(cfg, quiet=True)
        assert not result.failed
        assert [r.get("form") for r in result.rows] == ["linear", "exp", "exp"]
        assert result.rows[1]["passed"] is True
        assert result.rows[2]["code"] == "BAD_REQUEST"
        assert result.warnings[0]["lam"] == 5.0

    def test_rows_independent_of_workers(self, tmp_path):
        a = make_config("driftrange", tmp_path, out=str(tmp_path / "a"), n_grid=(30, 60))
        b = a.with_(out=str(tmp_path / "b"))
        harness.run_experiment(a, workers=1, quiet=True)
        harness.run_experiment(b, workers=2, quiet=True)
        assert (tmp_path / "a" / "result.csv").read_bytes() == (tmp_path / "b" / "result.csv").read_bytes()

    def test_json_format(self, tmp_path):
        cfg = make_config("qv", tmp_path, format="json")
        harness.run_experiment(cfg, quiet=True)
        data = json.loads((tmp_path / "qv" / "result.json").read_text())
        assert data["experiment"] == "qv"
        assert 0.0 < data["rows"][0]["median"] < 1.0

    def test_flt_warns_at_low_reps(self, tmp_path):
        result = harness.run_experiment(make_config("flt", tmp_path), quiet=True)
        assert [r["t"] for r in result.rows] == [0.5, 1.0]
        assert result.warnings[0]["code"] == "LOW_RESOLUTION"

    def test_rayknight(self, tmp_path):
        cfg = make_config("rayknight", tmp_path, spec=ONCE, t=0.5, variant="forward")
        result = harness.run_experiment(cfg, quiet=True)
        assert result.code == OK
        assert "sigma0_p_value" in result.rows[0]

    def test_urnlaw_cells(self, tmp_path):
        result = harness.run_experiment(make_config("urnlaw", tmp_path, spec=ONCE, m=5), quiet=True)
        assert not result.failed
        assert len(result.rows) == 12
        assert {(r["variant"], r["regime"]) for r in result.rows} == set(harness.CELLS)

    def test_lipschitz(self, tmp_path):
        cfg = make_config("lipschitz", tmp_path, n_grid=(50, 100), reps=5)
        result = harness.run_experiment(cfg, quiet=True)
        assert not result.failed
        assert [r["n"] for r in result.rows] == [50, 100]
        assert result.rows[0]["m"] == 7

    def test_rho(self, tmp_path):
        result = harness.run_experiment(make_config("rho", tmp_path, spec=ONCE, m=3, reps=4), quiet=True)
        assert [r["replica"] for r in result.rows] == [0, 1, 2, 3]
        for r in result.rows:
            total = r["drift_positive"] + r["drift_zero"] + r["drift_negative"]
            assert math.isfinite(total)

    def test_internal_error_is_recorded(self, tmp_path, monkeypatch):
        def boom(cfg, writer, runner, quiet=False):
            writer.writerow({"partial": 1})
            raise RuntimeError("kaput")

        monkeypatch.setitem(harness.EXPERIMENT_FUNCS, "qv", boom)
        result = harness.run_experiment(make_config("qv", tmp_path), quiet=True)
        assert result.failed and result.code == "INTERNAL_ERROR"
        assert len(result.rows) == 1
        manifest = json.loads((tmp_path / "qv" / "manifest.json").read_text())
        assert "kaput" in manifest["status"]["message"]


class TestCli:
    @pytest.fixture
    def spec_path(self, tmp_path):
        path = tmp_path / "spec.json"
        dump_spec(POWER, path)
        return str(path)

    def test_ok(self, spec_path, tmp_path):
        out = tmp_path / "cli"
        code = main(["gamma", "--spec", spec_path, "--m", "4", "--reps", "50",
                     "--out", str(out), "--quiet"])
        assert code == 0
        assert (out / "result.csv").exists()

    def test_missing_m(self, spec_path, tmp_path, capsys):
        code = main(["toth", "--spec", spec_path, "--out", str(tmp_path / "t"), "--quiet"])
        assert code == 2
        record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert record["code"] == "BAD_REQUEST"

    def test_unwritable_out(self, spec_path, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code = main(["qv", "--spec", spec_path, "--out", str(blocker / "x"), "--quiet"])
        assert code == 2

    def test_failed_run(self, spec_path, tmp_path, monkeypatch):
        def boom(cfg, writer, runner, quiet=False):
            raise RuntimeError("kaput")

        monkeypatch.setitem(harness.EXPERIMENT_FUNCS, "qv", boom)
        code = main(["qv", "--spec", spec_path, "--n", "20", "--reps", "2",
                     "--out", str(tmp_path / "q"), "--quiet"])
        assert code == 1

    def test_grid_parsing(self, spec_path, tmp_path):
        code = main(["driftrange", "--spec", spec_path, "--n-grid", "20,40", "--reps", "3",
                     "--out", str(tmp_path / "d"), "--quiet"])
        assert code == 0
        assert [r["n"] for r in _read_csv(tmp_path / "d" / "result.csv")] == ["20", "40"]

    def test_negative_lambda_grid(self, spec_path, tmp_path):
        code = main(["toth", "--spec", spec_path, "--m", "3", "--lam-grid=-0.2,0.2",
                     "--out", str(tmp_path / "t"), "--quiet"])
        assert code == 0
        rows = _read_csv(tmp_path / "t" / "result.csv")
        assert [float(r["lam"]) for r in rows if r["form"] == "exp"] == [-0.2, 0.2]


class TestSummarize:
    def test_table(self, tmp_path):
        root = tmp_path / "results"
        harness.run_experiment(make_config("toth", root, m=5, lam_grid=(0.2, 5.0)), quiet=True)
        harness.run_experiment(make_config("qv", root, format="json"), quiet=True)
        (root / "stray").mkdir()
        table = summarize(root)
        assert table["run"].tolist() == ["qv", "toth"]
        toth = table.set_index("run").loc["toth"]
        assert (toth["rows"], toth["checked"], toth["passed"]) == (3, 2, 2)
        assert toth["warnings"] == 1 and toth["code"] == OK

    def test_cli(self, tmp_path):
        assert summarize_main([str(tmp_path / "missing")]) == 2
        harness.run_experiment(make_config("qv", tmp_path), quiet=True)
        assert summarize_main([str(tmp_path)]) == 0
        assert (tmp_path / "summary.csv").exists()
