import numpy as np
import pytest

from blp import (
    BlpKernel,
    LowResolution,
    Variant,
    extract_backward,
    extract_forward,
    forward_from_urns,
    limit_law,
    rayknight_experiment,
    simulate,
    step_backward,
    step_forward,
    total_time,
    transition_pairs,
)
from experiments.defaults import P_THRESHOLD
from stats import ks_two_sample
from walk import MissingReturnTime, directed_profile, run_until_return
from weights import SiteSign, WeightSpec

CONSTANT = WeightSpec.constant()
ONCE = WeightSpec.once_reinforced(0.5)
POWER = WeightSpec.power_law(0.5, 0.2)


class TestKernel:
    def test_backward_regimes(self):
        kernel = BlpKernel(POWER, Variant.BACKWARD, anchor=4)
        assert [kernel.backward_regime(k) for k in (0, 2, 3, 4, 9)] == [
            (SiteSign.POSITIVE, 1), (SiteSign.POSITIVE, 1), (SiteSign.ZERO, 1),
            (SiteSign.NEGATIVE, 0), (SiteSign.NEGATIVE, 0)]

    def test_variant_from_string(self):
        assert BlpKernel(POWER, "forward").variant is Variant.FORWARD

    def test_negative_anchor(self):
        with pytest.raises(ValueError):
            BlpKernel(POWER, Variant.BACKWARD, anchor=-1)

    def test_zero_is_absorbing(self, rng):
        fwd = BlpKernel(POWER, Variant.FORWARD)
        bwd = BlpKernel(POWER, Variant.BACKWARD, anchor=2)
        assert step_forward(fwd, 0, rng) == 0
        assert step_backward(bwd, 5, 0, rng) == 0
        # before the anchor a red is still owed, so 0 can leave 0
        assert step_backward(bwd, 0, 0, rng) >= 0

    def test_wrong_variant(self, rng):
        with pytest.raises(ValueError):
            step_forward(BlpKernel(POWER, Variant.BACKWARD), 3, rng)
        with pytest.raises(ValueError):
            step_backward(BlpKernel(POWER, Variant.FORWARD), 0, 3, rng)


class TestSimulate:
    def test_forward_absorbs(self):
        tr = simulate(BlpKernel(ONCE, Variant.FORWARD), 5, 300, rng=1)
        assert tr.values[0] == 5
        assert tr.absorption_holds()
        assert tr.origin.seed == 1

    def test_backward_absorbs_past_anchor(self):
        kernel = BlpKernel(POWER, Variant.BACKWARD, anchor=3)
        for seed in range(20):
            tr = simulate(kernel, 2, 60, rng=seed)
            tail = tr.values[3:]
            hits = np.flatnonzero(tail == 0)
            if hits.size:
                assert not np.any(tail[hits[0]:])

    def test_deterministic(self):
        kernel = BlpKernel(POWER, Variant.BACKWARD, anchor=50)
        a = simulate(kernel, 10, 40, rng=7)
        b = simulate(kernel, 10, 40, rng=7)
        np.testing.assert_array_equal(a.values, b.values)

    def test_bad_start(self):
        with pytest.raises(ValueError):
            simulate(BlpKernel(POWER, Variant.FORWARD), -1, 5)


class TestExtraction:
    @pytest.mark.parametrize("x,m", [(0, 5), (2, 10), (5, 3)])
    def test_forward_rebuilt_from_urns(self, x, m):
        tr = run_until_return(POWER, x, m, rng=11)
        fwd = extract_forward(tr, x, m)
        np.testing.assert_array_equal(forward_from_urns(tr, x, m), fwd.values)
        assert fwd.values[-1] == 0 and fwd.absorption_holds()
        assert fwd.variant is Variant.FORWARD

    def test_mirror_side(self):
        tr = run_until_return(ONCE, -2, 6, rng=12)
        prof = directed_profile(tr, -2, 6)
        fwd = extract_forward(tr, -2, 6, side=-1)
        assert fwd.values[0] == prof.minus(-2)
        with pytest.raises(ValueError):
            extract_forward(tr, -2, 6, side=1)

    def test_backward(self):
        tr = run_until_return(ONCE, 3, 8, rng=13)
        bwd = extract_backward(tr, 3, 8)
        prof = directed_profile(tr, 3, 8)
        assert bwd.values[0] == prof.minus(3)
        assert bwd.truncated or bwd.values[-1] == 0
        assert bwd.meta["lam"] == prof.lam
        with pytest.raises(ValueError):
            extract_backward(tr, -1, 8)

    def test_total_time(self):
        tr = run_until_return(POWER, 1, 12, rng=14)
        lam, total = total_time(tr, 1, 12)
        assert lam == total == tr.n_steps

    def test_transition_pairs(self):
        traces = [np.array([3, 2, 3, 1, 0]), np.array([3, 3, 0])]
        assert transition_pairs(traces, 3).tolist() == [2, 1, 3, 0]
        assert transition_pairs(traces, 3, k_min=1).tolist() == [1, 0]
        assert transition_pairs(traces, 3, k_max=1).tolist() == [2, 3]
        assert transition_pairs([], 3).size == 0


class TestRayKnight:
    def test_limit_dimensions(self):
        assert limit_law(ONCE, Variant.BACKWARD, 1.0).dim == pytest.approx(1.0)
        assert limit_law(POWER, Variant.BACKWARD, 0.5).x0 == 1.0
        with pytest.raises(ValueError):
            limit_law(POWER, Variant.FORWARD, 1.0)
        assert limit_law(CONSTANT, Variant.FORWARD, 1.0).dim == 0.0

    def test_small_run_warns(self):
        res = rayknight_experiment(CONSTANT, 20, 1.0, 0.5, 50, "forward", seed=3)
        assert res.warning is not None
        rec = res.to_record()
        assert rec["code"] == LowResolution.code
        assert "sigma0_p_value" in rec and "sigma0_grid_shift" in rec
        assert res.chain_values.shape == res.oracle_values.shape == (50,)

    def test_runner_is_used(self):
        calls = []

        def runner(fn, reps):
            calls.append(reps)
            return [fn(i) for i in range(reps)]

        a = rayknight_experiment(ONCE, 30, 1.0, 0.5, 40, "backward", seed=5, runner=runner)
        b = rayknight_experiment(ONCE, 30, 1.0, 0.5, 40, "backward", seed=5)
        assert calls == [40]
        np.testing.assert_array_equal(a.chain_values, b.chain_values)
        assert a.sigma0 is None and a.sigma0_coarse is None

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            rayknight_experiment(ONCE, 0, 1.0, 0.5, 10, "backward")
        with pytest.raises(ValueError):
            rayknight_experiment(ONCE, 10, 1.0, 0.0, 10, "backward")

    @pytest.mark.slow
    @pytest.mark.parametrize("variant", ["backward", "forward"])
    def test_acceptance(self, variant):
        res = rayknight_experiment(ONCE, 1000, 1.0, 1.0, 2000, variant, seed=0)
        assert res.ks.passed(P_THRESHOLD)


def _first_generation(spec, x, m, side, seeds, max_steps=200_000):
    """k=1 entry of the extracted forward profile, one walk per seed; walks that miss lambda are dropped."""
    out = []
    for seed in seeds:
        try:
            tr = run_until_return(spec, x, m, rng=seed, max_steps=max_steps)
        except MissingReturnTime:
            continue
        out.append(int(extract_forward(tr, x, m, side=side).values[1]))
    return np.array(out)


class TestMirror:
    @pytest.mark.slow
    @pytest.mark.parametrize("spec", [POWER, ONCE], ids=["power", "once"])
    def test_forward_profile_mirrors(self, spec):
        reps = 2000
        right = _first_generation(spec, 2, 5, 1, range(reps))
        left = _first_generation(spec, -2, 5, -1, range(reps, 2 * reps))
        assert ks_two_sample(right, left).passed(P_THRESHOLD)
