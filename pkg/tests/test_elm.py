import numpy as np
import pytest

from enrelm import elm_error_sweep, erf, fit_elm, fit_ols, fit_ridge, sample_weights
from enrelm.errors import RankDeficiencyError

from oracles import gaussian_elimination_solve


class TestSampleWeights:
    def test_deterministic(self):
        np.testing.assert_array_equal(sample_weights(7, 3, 42), sample_weights(7, 3, 42))

    def test_seeds_differ(self):
        assert np.abs(sample_weights(7, 3, 1) - sample_weights(7, 3, 2)).max() > 0

    def test_moments(self):
        n, n0 = 1000, 100
        w = sample_weights(n, n0, 5)
        var = 1.0 / n0
        assert abs(w.mean()) <= 4.0 * np.sqrt(var / (n * n0))
        assert abs(w.var() - var) <= 4.0 * np.sqrt(2.0 / (n * n0)) * var

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            sample_weights(0, 3, 1)


class TestFitOls:
    def test_orthonormal_design(self):
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((12, 5)))
        y = rng.standard_normal(12)
        np.testing.assert_allclose(fit_ols(q, y), q.T @ y, atol=1e-12)

    def test_zero_residual_in_column_space(self):
        rng = np.random.default_rng(1)
        s = rng.standard_normal((10, 4))
        beta_true = rng.standard_normal(4)
        beta = fit_ols(s, s @ beta_true)
        np.testing.assert_allclose(beta, beta_true, atol=1e-10)

    def test_residual_orthogonal_to_columns(self):
        rng = np.random.default_rng(2)
        s = rng.standard_normal((20, 6))
        y = rng.standard_normal(20)
        beta = fit_ols(s, y)
        assert np.abs(s.T @ (y - s @ beta)).max() <= 1e-8

    def test_matches_elimination_oracle(self):
        rng = np.random.default_rng(3)
        s = rng.standard_normal((15, 5))
        y = rng.standard_normal(15)
        expected = gaussian_elimination_solve(s.T @ s, s.T @ y)
        np.testing.assert_allclose(fit_ols(s, y), expected, atol=1e-10)

    def test_rank_deficiency_raises(self):
        rng = np.random.default_rng(4)
        s = rng.standard_normal((10, 3))
        s = np.hstack([s, s[:, [0]]])  # exact duplicate column
        with pytest.raises(RankDeficiencyError):
            fit_ols(s, rng.standard_normal(10))


class TestFitRidge:
    def test_large_lambda_shrinks_to_zero(self):
        rng = np.random.default_rng(5)
        s = rng.standard_normal((12, 4))
        y = rng.standard_normal(12)
        assert np.linalg.norm(fit_ridge(s, y, 1e12)) <= 1e-9

    def test_small_lambda_approaches_ols(self):
        rng = np.random.default_rng(6)
        s = rng.standard_normal((20, 5))
        y = rng.standard_normal(20)
        np.testing.assert_allclose(fit_ridge(s, y, 1e-12), fit_ols(s, y), atol=1e-6)

    def test_primal_dual_identity(self):
        rng = np.random.default_rng(7)
        s = rng.standard_normal((10, 6))
        y = rng.standard_normal(10)
        p = fit_ridge(s, y, 0.5, mode="primal")
        d = fit_ridge(s, y, 0.5, mode="dual")
        np.testing.assert_allclose(p, d, atol=1e-10)

    @pytest.mark.parametrize("shape", [(8, 15), (12, 12), (25, 6)])
    def test_identity_across_shapes(self, shape):
        rng = np.random.default_rng(8)
        s = rng.standard_normal(shape)
        y = rng.standard_normal(shape[0])
        p = fit_ridge(s, y, 0.3, mode="primal")
        d = fit_ridge(s, y, 0.3, mode="dual")
        assert np.linalg.norm(p - d) <= 1e-8 * max(np.linalg.norm(p), 1e-30)

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_lambda_validated(self, lam):
        with pytest.raises(ValueError):
            fit_ridge(np.eye(3), np.ones(3), lam)


class TestFitElm:
    def test_prediction_shape_and_determinism(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((4, 30))
        y = rng.standard_normal(30)
        m1 = fit_elm(x, y, 10, seed=3)
        m2 = fit_elm(x, y, 10, seed=3)
        np.testing.assert_array_equal(m1.w, m2.w)
        np.testing.assert_allclose(m1.beta, m2.beta)
        assert m1.w.shape == (10, 4)


def _sweep_data(rng, n0=4, t_train=60, t_test=20):
    x_tr = rng.standard_normal((n0, t_train))
    x_te = rng.standard_normal((n0, t_test))
    beta = rng.standard_normal(n0)
    y_tr = beta @ x_tr + 0.3 * rng.standard_normal(t_train)
    y_te = beta @ x_te + 0.3 * rng.standard_normal(t_test)
    return x_tr, y_tr - y_tr.mean(), x_te, y_te - y_tr.mean()


class TestElmErrorSweep:
    def test_single_realization_collapses_band(self):
        rng = np.random.default_rng(10)
        sweep = elm_error_sweep(*_sweep_data(rng), n_max=8, realizations=1, seed=0)
        np.testing.assert_array_equal(sweep.train_mean, sweep.train_min)
        np.testing.assert_array_equal(sweep.train_mean, sweep.train_max)
        np.testing.assert_array_equal(sweep.test_mean, sweep.test_max)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(11)
        data = _sweep_data(rng)
        a = elm_error_sweep(*data, n_max=10, realizations=3, seed=7)
        b = elm_error_sweep(*data, n_max=10, realizations=3, seed=7)
        np.testing.assert_array_equal(a.test_per_real, b.test_per_real)

    def test_interpolation_at_full_width(self):
        # n = T with lambda = 0 forces plain least squares: exact fit of noise
        rng = np.random.default_rng(12)
        x_tr = rng.standard_normal((6, 24))
        y_tr = rng.standard_normal(24)
        x_te = rng.standard_normal((6, 8))
        y_te = rng.standard_normal(8)
        sweep = elm_error_sweep(
            x_tr, y_tr, x_te, y_te, n_max=24, realizations=2, seed=1, ridge_lambda=0.0
        )
        assert sweep.train_mean[-1] <= 1e-6

    def test_mean_between_min_and_max(self):
        rng = np.random.default_rng(13)
        sweep = elm_error_sweep(*_sweep_data(rng), n_max=12, realizations=5, seed=2)
        assert np.all(sweep.test_min <= sweep.test_mean + 1e-15)
        assert np.all(sweep.test_mean <= sweep.test_max + 1e-15)
        assert np.all(sweep.train_min <= sweep.train_mean + 1e-15)

    def test_nested_training_error_non_increasing(self):
        # same weight prefix per realization, so larger n can only fit better
        rng = np.random.default_rng(14)
        sweep = elm_error_sweep(*_sweep_data(rng), n_max=15, realizations=4, seed=3)
        assert np.all(np.diff(sweep.train_per_real, axis=1) <= 1e-10)

    def test_fresh_weights_mode(self):
        rng = np.random.default_rng(15)
        data = _sweep_data(rng)
        nested = elm_error_sweep(*data, n_max=6, realizations=2, seed=4, nested=True)
        fresh = elm_error_sweep(*data, n_max=6, realizations=2, seed=4, nested=False)
        fresh2 = elm_error_sweep(*data, n_max=6, realizations=2, seed=4, nested=False)
        np.testing.assert_array_equal(fresh.test_per_real, fresh2.test_per_real)
        assert np.abs(nested.test_per_real - fresh.test_per_real).max() > 0
        assert np.all(np.diff(fresh.train_per_real, axis=1) <= 1e-10)

    def test_threads_do_not_change_results(self):
        rng = np.random.default_rng(16)
        data = _sweep_data(rng)
        serial = elm_error_sweep(*data, n_max=8, realizations=4, seed=5, threads=1)
        threaded = elm_error_sweep(*data, n_max=8, realizations=4, seed=5, threads=3)
        np.testing.assert_array_equal(serial.test_per_real, threaded.test_per_real)

    def test_weight_law_matches_sampler(self):
        # realization r uses seed + r, truncated to the first n rows
        rng = np.random.default_rng(17)
        x_tr, y_tr, x_te, y_te = _sweep_data(rng)
        sweep = elm_error_sweep(x_tr, y_tr, x_te, y_te, n_max=5, realizations=2, seed=9)
        w = sample_weights(5, 4, 9 + 1)
        s = erf(w[:3] @ x_tr).T
        beta = fit_ols(s, y_tr)
        err = np.linalg.norm(y_tr - s @ beta) / np.linalg.norm(y_tr)
        assert sweep.train_per_real[1, 2] == pytest.approx(err, abs=1e-12)
