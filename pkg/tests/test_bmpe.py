import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bmpe import (
    BesqLaw,
    ThetaOutOfRange,
    besq_path,
    besq_paths,
    besq_rows,
    brownian_increments,
    dump_samples,
    load_samples,
    path_rows,
    sample_besq_marginal,
    sample_bmpe_marginal,
    solve_bmpe,
)
from experiments.defaults import BMPE_RESIDUAL_MAX, P_THRESHOLD
from stats import ks_two_sample

thetas = st.floats(min_value=-3.0, max_value=0.9)


class TestSolve:
    @given(thetas, thetas, st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=50, deadline=None)
    def test_residual(self, tp, tm, seed):
        path = solve_bmpe(brownian_increments(2000, 1e-3, seed), tp, tm, dt=1e-3)
        assert path.residual() <= BMPE_RESIDUAL_MAX * max(1.0, float(np.max(np.abs(path.values))))
        assert np.all(np.diff(path.run_max) >= 0) and np.all(np.diff(path.run_min) <= 0)
        assert np.all(path.run_min <= path.values) and np.all(path.values <= path.run_max)

    def test_monotone_path(self):
        inc = np.full(100, 0.01)
        path = solve_bmpe(inc, 0.5, 0.0)
        np.testing.assert_allclose(path.values, 2.0 * path.brownian)
        assert np.all(path.run_min == 0.0)

    def test_reflection(self, rng):
        inc = brownian_increments(500, 1e-3, rng)
        a = solve_bmpe(inc, 0.3, -0.7)
        b = solve_bmpe(-inc, -0.7, 0.3)
        np.testing.assert_allclose(b.values, -a.values, atol=1e-12)

    def test_unperturbed(self, rng):
        inc = brownian_increments(300, 1e-3, rng)
        path = solve_bmpe(inc, 0.0, 0.0)
        np.testing.assert_allclose(path.values, path.brownian)

    def test_theta_bound(self):
        with pytest.raises(ThetaOutOfRange):
            solve_bmpe(np.zeros(3), 1.0, 0.0)
        with pytest.raises(ThetaOutOfRange):
            sample_bmpe_marginal(0.2, 1.5, 1.0)

    def test_rows(self):
        path = solve_bmpe(np.array([0.1, -0.3]), 0.2, 0.2, dt=0.5)
        rows = path_rows(path)
        assert len(rows) == 3
        assert set(rows[0]) == {"t", "W", "S", "I"}
        assert float(rows[2]["t"]) == 1.0


class TestMarginal:
    def test_unperturbed_is_gaussian(self):
        w = sample_bmpe_marginal(0.0, 0.0, 1.0, dt=1e-2, reps=4000, rng=3)
        ref = np.random.default_rng(4).standard_normal(4000)
        assert ks_two_sample(w, ref).passed(P_THRESHOLD)

    def test_several_times(self):
        out = sample_bmpe_marginal(0.3, -0.2, [0.5, 1.0], dt=1e-2, reps=200, rng=5)
        assert out.shape == (2, 200)
        assert sample_bmpe_marginal(0.3, -0.2, 1.0, dt=1e-2, reps=200, rng=5).shape == (200,)

    @pytest.mark.parametrize("theta", [0.5, -0.8])
    def test_equal_thetas_symmetric(self, theta):
        w = sample_bmpe_marginal(theta, theta, 1.0, dt=1e-2, reps=4000, rng=13)
        mirror = -sample_bmpe_marginal(theta, theta, 1.0, dt=1e-2, reps=4000, rng=14)
        assert ks_two_sample(w, mirror).passed(P_THRESHOLD)

    def test_dt_larger_than_t(self):
        with pytest.raises(ValueError):
            sample_bmpe_marginal(0.1, 0.1, 0.01, dt=0.1)

    def test_single_path_agrees(self):
        # both draw one standard normal per grid step from the same stream
        grid = 400
        w = sample_bmpe_marginal(0.4, -0.5, 1.0, dt=1.0 / grid, reps=1, rng=6)
        inc = math.sqrt(1.0 / grid) * np.random.default_rng(6).standard_normal(grid)
        path = solve_bmpe(inc, 0.4, -0.5, dt=1.0 / grid)
        assert w[0] == pytest.approx(path.values[-1], abs=1e-9)


class TestBesq:
    def test_law_validation(self):
        with pytest.raises(ValueError):
            BesqLaw(-0.5, 1.0)
        with pytest.raises(ValueError):
            BesqLaw(1.0, -1.0)

    def test_exact_mean(self):
        law = BesqLaw(1.0, 2.0)
        x = sample_besq_marginal(law, 0.5, rng=7, size=20_000)
        # Var = 4 x0 t + 2 dim t^2 = 4.5
        assert x.mean() == pytest.approx(law.mean(0.5), abs=4 * math.sqrt(4.5 / 20_000))
        assert np.all(x >= 0)

    def test_dimension_zero_has_atom(self):
        x = sample_besq_marginal(BesqLaw(0.0, 1.0), 1.0, rng=8, size=5000)
        # P(X_t = 0) = exp(-x0 / 2t)
        assert np.mean(x == 0.0) == pytest.approx(math.exp(-0.5), abs=0.03)

    def test_scalar(self):
        assert isinstance(sample_besq_marginal(BesqLaw(2.0, 0.0), 1.0, rng=9), float)

    def test_absorbed_path(self):
        path = besq_path(BesqLaw(0.0, 0.05), 1.0, dt=1e-3, rng=10)
        if math.isfinite(path.sigma0):
            k = int(round(path.sigma0 / path.dt))
            assert not np.any(path.values[k:])
        rows = besq_rows(path)
        assert len(rows) == path.values.size

    def test_euler_matches_exact(self):
        law = BesqLaw(3.0, 2.0)
        ends, sigma0 = besq_paths(law, 1.0, dt=1e-3, absorb_at_zero=False, reps=2000, rng=11)
        exact = sample_besq_marginal(law, 1.0, rng=12, size=2000)
        assert ks_two_sample(ends, exact).passed(P_THRESHOLD)
        assert np.all(np.isinf(sigma0) | (sigma0 > 0))

    def test_sample_dump(self, tmp_path):
        values = np.linspace(0.0, 1.0, 11)
        dump_samples(values, tmp_path / "z.f8", {"dim": 1.0})
        back, header = load_samples(tmp_path / "z.f8")
        np.testing.assert_array_equal(back, values)
        assert header["count"] == 11 and header["dim"] == 1.0
