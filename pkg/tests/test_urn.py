import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from experiments.defaults import P_THRESHOLD, SE_MULT, SE_MULT_LOOSE, TOTH_GAP_MAX
from stats import chi_square_from_samples
from urn import (
    DrawCapExceeded,
    InsufficientTrace,
    SiteNotVisited,
    TailEstimate,
    TruncationError,
    UrnState,
    concentration_tail,
    draw,
    drift_from_urn,
    exp_martingale,
    expected_D_at_tau,
    expected_D_profile,
    extract_all_urns,
    extract_urn_from_walk,
    fit_concentration,
    limit_check,
    martingale_step_check,
    mu_distribution,
    rho_monitor,
    run_to_tau_blue,
    run_to_tau_red,
    sample_D_at_tau,
    tails_from_sample,
    toth_check,
    toth_linear_check,
    urn_drift,
)
from walk import RecordOptions, directed_profile, run, run_until_return
from weights import SiteSign, WeightSpec, gamma

CONSTANT = WeightSpec.constant()
ONCE = WeightSpec.once_reinforced(0.5)
POWER = WeightSpec.power_law(0.5, 0.2)


class TestUrnTrace:
    def test_stops_on_kth_blue(self):
        state = UrnState(POWER, SiteSign.POSITIVE)
        tr = run_to_tau_blue(state, 7, rng=1)
        assert state.blue == 7
        assert tr.colors[-1] == 1
        assert tr.tau_blue(7) == len(tr)
        assert tr.mu(7) == state.red
        assert tr.D_at(len(tr)) == state.D == tr.D_path()[-1]

    def test_resume_from_state(self):
        state = UrnState(ONCE, SiteSign.NEGATIVE)
        run_to_tau_blue(state, 3, rng=2)
        red_before = state.red
        tr = run_to_tau_red(state, red_before + 4, rng=3)
        assert tr.red0 == red_before
        assert tr.red_path()[-1] == red_before + 4
        assert tr.colors[-1] == 0

    def test_blue_times(self):
        state = UrnState(POWER, SiteSign.ZERO)
        tr = run_to_tau_blue(state, 5, rng=4)
        times = tr.blue_times()
        assert times.size == 5
        assert [tr.tau_blue(k) for k in range(1, 6)] == list(times)
        assert tr.tau_blue(0) == 0

    def test_insufficient(self):
        tr = run_to_tau_blue(UrnState(CONSTANT, SiteSign.POSITIVE), 2, rng=5)
        with pytest.raises(InsufficientTrace):
            tr.tau_blue(3)
        with pytest.raises(InsufficientTrace):
            tr.D_at(len(tr) + 1)

    def test_draw_cap(self):
        with pytest.raises(DrawCapExceeded) as err:
            run_to_tau_blue(UrnState(CONSTANT, SiteSign.POSITIVE), 1000, rng=6, max_draws=10)
        assert err.value.cap == 10

    def test_single_draw(self, rng):
        state = UrnState(ONCE, SiteSign.POSITIVE)
        state, colour = draw(state, rng)
        assert state.draws == 1
        assert (state.blue, state.red) in ((1, 0), (0, 1))
        assert int(colour) == state.blue


class TestWalkExtraction:
    def test_urn_drift_matches_walk_local_drift(self):
        tr = run(POWER, 20_000, RecordOptions.full(), rng=21)
        for y, urn in extract_all_urns(tr).items():
            assert urn.sign == SiteSign.of(y)
            assert urn_drift(urn) == pytest.approx(tr.state.local_drift_at(y), abs=1e-9)

    def test_blue_draws_are_left_departures(self):
        tr = run(ONCE, 5000, RecordOptions.full(), rng=22)
        urn = extract_urn_from_walk(tr, 1)
        assert int(urn.colors.sum()) == tr.state.directed(1, -1)
        assert len(urn) - int(urn.colors.sum()) == tr.state.directed(1, +1)

    def test_drift_from_urn_at_return_time(self):
        tr = run_until_return(POWER, 0, 15, rng=23)
        prof = directed_profile(tr, 0, 15)
        for y in range(1, prof.hi + 1):
            urn = extract_urn_from_walk(tr, y)
            k = prof.minus(y)
            # at a return to 0 every site y > 0 was last left to the left
            assert urn.tau_blue(k) == len(urn)
            assert drift_from_urn(urn, k) == pytest.approx(tr.state.local_drift_at(y), abs=1e-9)

    def test_unvisited_site(self):
        tr = run(ONCE, 10, RecordOptions.full(), rng=24)
        with pytest.raises(SiteNotVisited):
            extract_urn_from_walk(tr, 500)


class TestExpectedD:
    def test_once_reinforced_first_blue(self):
        # P(blue) = 1/3 until the first red, fair afterwards: E[R] = 4/3
        est = expected_D_at_tau(ONCE, SiteSign.POSITIVE, 1)
        assert est.value == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert est.error <= 1e-10

    @pytest.mark.parametrize("sign,target", [(SiteSign.POSITIVE, 0.5), (SiteSign.NEGATIVE, -0.5)])
    def test_once_reinforced_limit(self, sign, target):
        assert expected_D_at_tau(ONCE, sign, 60).value == pytest.approx(target, abs=1e-6)
        assert gamma(ONCE) == abs(target)

    @pytest.mark.parametrize("m", [10, 50, 200])
    def test_once_reinforced_closed_form(self, m):
        # drift 1/3 per draw until the first red: E = (1 - 3^-m) / 2
        est = expected_D_at_tau(ONCE, SiteSign.POSITIVE, m)
        assert est.value == pytest.approx(0.5 * (1.0 - 3.0**-m), abs=1e-9)

    def test_once_reinforced_gap_shrinks(self):
        ests = [expected_D_at_tau(ONCE, SiteSign.POSITIVE, m) for m in (10, 50, 200)]
        gaps = [abs(e.value - 0.5) for e in ests]
        assert gaps[1] < gaps[0]
        assert gaps[2] <= gaps[1] + ests[2].error + 1e-15

    def test_once_reinforced_dp_inside_mc_interval(self):
        dp = expected_D_at_tau(ONCE, SiteSign.POSITIVE, 50)
        mc = expected_D_at_tau(ONCE, SiteSign.POSITIVE, 50, method="mc", reps=20_000, rng=32)
        assert abs(mc.value - dp.value) <= SE_MULT * mc.error + 1e-8

    def test_constant_is_fair(self):
        prof = expected_D_profile(CONSTANT, SiteSign.POSITIVE, 30)
        np.testing.assert_allclose(prof.values, 0.0, atol=1e-9)
        assert np.all(np.diff(prof.bounds) >= 0)

    def test_zero_profile(self):
        prof = expected_D_profile(POWER, SiteSign.POSITIVE, 0)
        assert prof.values.tolist() == [0.0]

    def test_profile_matches_single_m(self):
        prof = expected_D_profile(POWER, SiteSign.POSITIVE, 12)
        for m in (1, 6, 12):
            assert prof.values[m] == pytest.approx(expected_D_at_tau(POWER, SiteSign.POSITIVE, m).value,
                                                   abs=1e-9)

    @pytest.mark.parametrize("sign", list(SiteSign))
    def test_mc_agrees_with_dp(self, sign):
        dp = expected_D_at_tau(POWER, sign, 10)
        mc = expected_D_at_tau(POWER, sign, 10, method="mc", reps=20_000, rng=31)
        assert mc.reps == 20_000
        assert abs(mc.value - dp.value) <= SE_MULT_LOOSE * mc.error + dp.error

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            expected_D_at_tau(POWER, SiteSign.POSITIVE, 3, method="exact")

    def test_mu_distribution_is_normalised(self):
        probs, escaped = mu_distribution(POWER, SiteSign.NEGATIVE, 8)
        assert probs.sum() + escaped == pytest.approx(1.0, abs=1e-10)
        assert np.all(probs >= 0)

    def test_limit_check(self):
        check = limit_check(ONCE, SiteSign.POSITIVE, 64, gamma(ONCE))
        assert check.gap < 1e-6
        assert check.ok(3.0) or check.gap < 1e-9
        with pytest.raises(ValueError):
            limit_check(ONCE, SiteSign.POSITIVE, 2, 0.5)

    def test_record(self):
        d = expected_D_at_tau(POWER, SiteSign.ZERO, 4).to_record()
        assert d["sign"] == "zero" and d["method"] == "dp" and "tol" in d


class TestToth:
    def test_constant_closed_form(self):
        res = toth_check(CONSTANT, SiteSign.POSITIVE, 1, 0.5)
        assert res.rhs == pytest.approx(2.0)
        assert res.lhs == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("spec,sign", [(POWER, SiteSign.POSITIVE), (ONCE, SiteSign.NEGATIVE),
                                           (POWER, SiteSign.ZERO)])
    @pytest.mark.parametrize("m", [1, 5, 20])
    @pytest.mark.parametrize("lam", [-0.4, 0.2, 0.4])
    def test_identity(self, spec, sign, m, lam):
        res = toth_check(spec, sign, m, lam)
        assert res.gap < TOTH_GAP_MAX
        assert res.truncation_error_bound <= 1e-10

    def test_lambda_zero(self):
        res = toth_check(POWER, SiteSign.POSITIVE, 5, 0.0)
        assert res.lhs == res.rhs == 1.0

    def test_linear_identity(self):
        for m in (1, 7, 20):
            res = toth_linear_check(POWER, SiteSign.POSITIVE, m)
            assert res.gap < TOTH_GAP_MAX

    def test_lambda_out_of_range(self):
        with pytest.raises(ValueError):
            toth_check(POWER, SiteSign.POSITIVE, 3, 1.5)

    def test_truncation(self):
        with pytest.raises(TruncationError):
            toth_check(POWER, SiteSign.POSITIVE, 50, 0.2, max_cap=4)


class TestMartingale:
    @given(st.integers(min_value=0, max_value=200), st.integers(min_value=0, max_value=200),
           st.floats(min_value=-2.0, max_value=0.7), st.sampled_from(list(SiteSign)))
    @settings(max_examples=80, deadline=None)
    def test_one_step_mean(self, blue, red, lam, sign):
        assert martingale_step_check(POWER, sign, blue, red, lam) < 1e-12

    def test_path_starts_at_one(self):
        tr = run_to_tau_blue(UrnState(POWER, SiteSign.POSITIVE), 10, rng=41)
        phi = exp_martingale(tr, 0.3)
        assert phi[0] == 1.0
        assert phi.size == len(tr) + 1
        with pytest.raises(ValueError):
            exp_martingale(tr, 5.0)


class TestConcentration:
    def test_tails_from_sample(self):
        D = np.array([0, 1, -2, 3, -4, 5, 0, 0])
        tails = tails_from_sample(D, k=4, ms=[1, 3, 6])
        assert [t.hits for t in tails] == [5, 3, 0]
        assert tails[-1].upper_only and tails[-1].lo == 0.0

    def test_zero_threshold(self):
        t = concentration_tail(POWER, SiteSign.POSITIVE, 5, 0, reps=100)
        assert t.freq == 1.0

    def test_sample_size(self):
        D = sample_D_at_tau(POWER, SiteSign.POSITIVE, 5, 300, rng=42)
        assert D.shape == (300,)
        assert np.all(D >= -5)

    def test_fit_recovers_constants(self):
        C, c, k = 2.0, 0.3, 10
        tails = []
        for m in (2, 5, 10, 20, 30):
            f = C * math.exp(-c * m * m / max(m, k))
            tails.append(TailEstimate(k, m, 10**6, int(f * 10**6), f, f, f))
        fit_C, fit_c = fit_concentration(tails)
        assert fit_C == pytest.approx(C, rel=1e-6)
        assert fit_c == pytest.approx(c, rel=1e-6)

    def test_fit_needs_points(self):
        with pytest.raises(ValueError):
            fit_concentration([TailEstimate(5, 3, 100, 0, 0.0, 0.0, 0.04)])


class TestRho:
    def test_constant_has_zero_drift(self):
        tr = run_until_return(CONSTANT, 0, 10, rng=51)
        rep = rho_monitor(tr, 0, 10)
        np.testing.assert_allclose(rep.rho, 0.0, atol=1e-9)
        assert rep.delta_minus_rho == pytest.approx(0.0, abs=1e-9)

    def test_sites_and_counts(self):
        tr = run_until_return(POWER, 0, 20, rng=52)
        rep = rho_monitor(tr, 0, 20)
        prof = directed_profile(tr, 0, 20)
        assert rep.sites.tolist() == list(range(1, prof.hi + 1))
        assert rep.k.tolist() == [prof.minus(int(y)) for y in rep.sites]
        assert set(rep.to_dict()) == {"x", "m", "sites", "rho_minus_gamma", "delta_minus_rho", "dp_bound"}
        for y, d in zip(rep.sites, rep.delta):
            assert d == pytest.approx(tr.state.local_drift_at(int(y)), abs=1e-9)


def _first_draws(spec, y, draws, seeds, n_steps=6000):
    """Blue count among the first `draws` draws of the urn at y, one walk per seed."""
    out = []
    for seed in seeds:
        tr = run(spec, n_steps, RecordOptions(positions=True), rng=seed)
        if not tr.state.imin <= y <= tr.state.smax:
            continue
        urn = extract_urn_from_walk(tr, y)
        if len(urn) >= draws:
            out.append(int(urn.colors[:draws].sum()))
    return np.array(out)


class TestMirror:
    @pytest.mark.slow
    @pytest.mark.parametrize("spec", [POWER, ONCE], ids=["power", "once"])
    def test_blue_at_y_matches_red_at_minus_y(self, spec):
        reps, draws = 3000, 20
        blue = _first_draws(spec, 3, draws, range(reps))
        red = draws - _first_draws(spec, -3, draws, range(reps, 2 * reps))
        assert blue.size > reps // 4 and red.size > reps // 4
        assert chi_square_from_samples(blue, red).passed(P_THRESHOLD)
