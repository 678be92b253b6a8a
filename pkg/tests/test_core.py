import numpy as np
import pytest

from enrelm import (
    EnrModel,
    compute_hidden_weights,
    curvature_selection,
    default_max_neurons,
    erf,
    error_curve,
    fit_approximated,
    fit_incremental,
    fit_preprocess,
    hidden_features,
    nngp_gram,
    order_by_information,
    predict,
    predict_batch,
)
from enrelm.errors import DataError, RankDeficiencyWarning, ZeroVarianceError

from oracles import stagewise_reference


def standardized(rng, n0, t):
    x = rng.standard_normal((n0, t))
    return (x - x.mean(axis=1, keepdims=True)) / x.std(axis=1, keepdims=True)


def random_orthogonal(rng, t):
    q, _ = np.linalg.qr(rng.standard_normal((t, t)))
    return q


class TestPreprocess:
    def test_removes_constant_shift(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((3, 50)) + np.array([[5.0], [-2.0], [100.0]])
        prep = fit_preprocess(x, rng.standard_normal(50))
        out = prep.transform_inputs(x)
        np.testing.assert_allclose(out.mean(axis=1), 0.0, atol=1e-12)

    def test_identity_on_standardized_input(self):
        rng = np.random.default_rng(1)
        x = standardized(rng, 4, 60)
        prep = fit_preprocess(x, rng.standard_normal(60))
        np.testing.assert_allclose(prep.transform_inputs(x), x, atol=1e-12)

    def test_recomputation_oracle(self):
        rng = np.random.default_rng(2)
        x = 3.0 * rng.standard_normal((5, 40)) + 7.0
        y = rng.standard_normal(40)
        prep = fit_preprocess(x, y)
        out = prep.transform_inputs(x)
        np.testing.assert_allclose(out.mean(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.std(axis=1), 1.0, atol=1e-12)
        assert prep.target_mean == pytest.approx(y.mean(), abs=1e-15)
        np.testing.assert_allclose(prep.center_targets(y).mean(), 0.0, atol=1e-12)

    def test_zero_variance_feature_rejected(self):
        x = np.random.default_rng(3).standard_normal((3, 10))
        x[1] = 4.2
        with pytest.raises(ZeroVarianceError, match="1"):
            fit_preprocess(x, np.arange(10.0))

    def test_test_split_uses_training_statistics(self):
        rng = np.random.default_rng(4)
        x_train = 2.0 + rng.standard_normal((2, 30))
        x_test = 2.0 + rng.standard_normal((2, 10))
        prep = fit_preprocess(x_train, rng.standard_normal(30))
        manual = (x_test - x_train.mean(axis=1)[:, None]) / x_train.std(axis=1)[:, None]
        np.testing.assert_allclose(prep.transform_inputs(x_test), manual)


class TestComputeHiddenWeights:
    def test_exact_regime_reproduces_eigenvectors(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((30, 8))  # T=8 <= n0=30, full column rank
        u = random_orthogonal(rng, 8)
        with pytest.warns(RankDeficiencyWarning):
            w = compute_hidden_weights(x, u)
        np.testing.assert_allclose(erf(w @ x).T, u, atol=1e-8)

    def test_sign_flip_flips_single_row(self):
        rng = np.random.default_rng(6)
        x = standardized(rng, 6, 10)
        u = random_orthogonal(rng, 10)
        u_flipped = u.copy()
        u_flipped[:, 3] *= -1.0
        w = compute_hidden_weights(x, u)
        w_flipped = compute_hidden_weights(x, u_flipped)
        np.testing.assert_allclose(w_flipped[3], -w[3], atol=1e-12)
        mask = np.ones(10, dtype=bool)
        mask[3] = False
        np.testing.assert_allclose(w_flipped[mask], w[mask], atol=1e-12)

    def test_planted_preimage(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((30, 8))
        w0 = rng.normal(0.0, 0.3, size=(8, 30))
        m = erf(w0 @ x).T
        u, _ = np.linalg.qr(m)
        with pytest.warns(RankDeficiencyWarning):
            w = compute_hidden_weights(x, u)
        np.testing.assert_allclose(erf(w @ x).T, u, atol=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            compute_hidden_weights(np.zeros((3, 5)), np.eye(4))


class TestOrderByInformation:
    def test_single_matching_column_first(self):
        rng = np.random.default_rng(8)
        u = random_orthogonal(rng, 9)
        order = order_by_information(u, 2.5 * u[:, 5])
        assert order[0] == 5

    def test_two_relevant_columns(self):
        rng = np.random.default_rng(9)
        u = random_orthogonal(rng, 7)
        y = 3.0 * u[:, 2] - 1.5 * u[:, 4]
        order = order_by_information(u, y)
        assert list(order[:2]) == [2, 4]

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(10)
        u = random_orthogonal(rng, 12)
        y = rng.standard_normal(12)
        scores = [abs(sum(u[i, j] * y[i] for i in range(12))) for j in range(12)]
        expected = sorted(range(12), key=lambda j: (-scores[j], j))
        assert list(order_by_information(u, y)) == expected

    def test_ties_break_by_index(self):
        u = np.eye(4)
        y = np.array([3.0, -3.0, 1.0, 0.0])
        assert list(order_by_information(u, y)) == [0, 1, 2, 3]


class TestFitApproximated:
    def test_single_relevant_column(self):
        rng = np.random.default_rng(11)
        u = random_orthogonal(rng, 6)
        w_full = rng.standard_normal((6, 3))
        y = 2.0 * u[:, 4]
        model = fit_approximated(y, u, 1, w_full)
        assert list(model.j_hat) == [4]
        np.testing.assert_allclose(model.beta_hat, [np.linalg.norm(y)], atol=1e-12)
        np.testing.assert_allclose(model.w_hat, w_full[[4]])
        # residual through the orthonormal proxy is zero
        assert np.linalg.norm(y - u[:, model.j_hat] @ model.beta_hat) <= 1e-12

    def test_full_rank_projection_is_exact(self):
        rng = np.random.default_rng(12)
        t = 10
        u = random_orthogonal(rng, t)
        y = rng.standard_normal(t)
        model = fit_approximated(y, u, t, rng.standard_normal((t, 4)))
        recon = u[:, model.j_hat] @ model.beta_hat
        assert np.linalg.norm(y - recon) <= 1e-8

    def test_matches_least_squares_oracle(self):
        rng = np.random.default_rng(13)
        t, n = 14, 5
        u = random_orthogonal(rng, t)
        y = rng.standard_normal(t)
        model = fit_approximated(y, u, n, rng.standard_normal((t, 3)))
        beta_ls, *_ = np.linalg.lstsq(u[:, model.j_hat], y, rcond=None)
        np.testing.assert_allclose(model.beta_hat, beta_ls, atol=1e-12)

    @pytest.mark.parametrize("n", [0, 11])
    def test_bad_budget_rejected(self, n):
        u = np.eye(10)
        with pytest.raises(ValueError):
            fit_approximated(np.zeros(10), u, n, np.zeros((10, 2)))


class TestFitIncremental:
    def test_orthonormal_unit_step_equals_projection(self):
        rng = np.random.default_rng(14)
        t = 16
        s = random_orthogonal(rng, t)
        y = rng.standard_normal(t)
        w_full = rng.standard_normal((t, 4))
        model = fit_incremental(y - y.mean(), s, t, toll=0.0, eps=1.0, w_hat_full=w_full)
        proxy = fit_approximated(y - y.mean(), s, t, w_full)
        scores = np.abs(s.T @ (y - y.mean()))
        keep = min(model.n_neurons, t)
        assert list(model.j_hat[:keep]) == list(proxy.j_hat[:keep])
        for j, beta in zip(model.j_hat, model.beta_hat):
            assert beta == pytest.approx(float(s[:, j] @ (y - y.mean())), abs=1e-10)
        assert scores[model.j_hat[0]] == pytest.approx(scores.max())

    def test_single_relevant_column(self):
        rng = np.random.default_rng(15)
        s = random_orthogonal(rng, 8)
        y = 3.0 * s[:, 2]
        y = y - y.mean()
        s = s - s.mean(axis=0)  # keep the relevant direction dominant
        model = fit_incremental(y, s, 8, toll=0.0, eps=1.0, w_hat_full=np.zeros((8, 2)))
        assert model.j_hat[0] == 2
        assert model.residual_history[-1] <= 1e-10

    def test_matches_reference_step_for_step(self):
        rng = np.random.default_rng(16)
        t, m = 20, 8
        s = rng.standard_normal((t, m))
        s = s - s.mean(axis=0)
        y = rng.standard_normal(t)
        y = y - y.mean()
        model = fit_incremental(y, s, m, toll=1e-6, eps=0.1, w_hat_full=np.zeros((m, 2)))
        order, betas, norms = stagewise_reference(y, s, m, 1e-6, 0.1, 100 * m)
        assert list(model.j_hat) == order
        np.testing.assert_allclose(model.beta_hat, betas, atol=1e-10)
        np.testing.assert_allclose(model.residual_history, norms, atol=1e-10)

    def test_budget_respected(self):
        rng = np.random.default_rng(17)
        s = rng.standard_normal((25, 10))
        s = s - s.mean(axis=0)
        y = rng.standard_normal(25)
        y = y - y.mean()
        model = fit_incremental(y, s, 2, toll=0.0, eps=0.3, w_hat_full=np.zeros((10, 2)))
        assert model.n_neurons <= 2
        assert model.stop_reason in ("budget", "toll", "cap", "exhausted")

    def test_residual_history_non_increasing(self):
        rng = np.random.default_rng(18)
        s = rng.standard_normal((30, 12))
        s = s - s.mean(axis=0)
        y = rng.standard_normal(30)
        y = y - y.mean()
        model = fit_incremental(y, s, 12, toll=1e-8, eps=0.2, w_hat_full=np.zeros((12, 2)))
        assert np.all(np.diff(model.residual_history) <= 1e-12)

    def test_tolerance_stop(self):
        rng = np.random.default_rng(19)
        s = rng.standard_normal((30, 12))
        s = s - s.mean(axis=0)
        y = rng.standard_normal(30)
        y = y - y.mean()
        model = fit_incremental(y, s, 12, toll=1e-2, eps=0.1, w_hat_full=np.zeros((12, 2)))
        assert model.stop_reason == "toll"
        assert model.stop_index == model.n_neurons

    def test_all_zero_columns_give_empty_model(self):
        with pytest.warns(UserWarning, match="empty"):
            model = fit_incremental(
                np.ones(5), np.zeros((5, 3)), 2, toll=0.0, eps=0.5,
                w_hat_full=np.zeros((3, 2)),
            )
        assert model.n_neurons == 0

    @pytest.mark.parametrize("eps", [0.0, 1.5, -0.1])
    def test_eps_validated(self, eps):
        with pytest.raises(ValueError):
            fit_incremental(np.ones(4), np.eye(4), 2, toll=0.0, eps=eps,
                            w_hat_full=np.zeros((4, 1)))


def _exact_instance(rng, n0=12, t=8):
    """Instance in the exact-reconstruction regime with a fitted model."""
    x_raw = rng.standard_normal((n0, t)) * 2.0 + 1.0
    y_raw = rng.standard_normal(t) * 3.0 + 5.0
    prep = fit_preprocess(x_raw, y_raw)
    x_std = prep.transform_inputs(x_raw)
    y_c = prep.center_targets(y_raw)
    gram = nngp_gram(x_std)
    u = gram.eigendecompose().vectors
    with pytest.warns(RankDeficiencyWarning):
        w_full = compute_hidden_weights(x_std, u)
    s_full = hidden_features(w_full, x_std)
    means = s_full.mean(axis=0)
    model = fit_approximated(
        y_c, u, t, w_full, target_mean=prep.target_mean, candidate_s_means=means
    )
    return x_raw, y_raw, prep, u, model


class TestErrorCurve:
    def test_zero_neuron_model_is_mean_predictor(self):
        rng = np.random.default_rng(20)
        x_raw = rng.standard_normal((3, 15))
        y_raw = rng.standard_normal(15) + 2.0
        prep = fit_preprocess(x_raw, y_raw)
        model = EnrModel(
            w_hat=np.zeros((0, 3)), beta_hat=np.zeros(0), j_hat=np.zeros(0, dtype=int),
            target_mean=prep.target_mean, variant="approximated",
        )
        curve = error_curve(y_raw, x_raw, model, prep, "train")
        assert len(curve) == 1
        y_c = y_raw - prep.target_mean
        assert curve.errs[0] == pytest.approx(1.0)
        assert curve.errs_raw[0] == pytest.approx(
            np.linalg.norm(y_c) / np.linalg.norm(y_raw)
        )

    def test_exact_regime_terminal_error(self):
        rng = np.random.default_rng(21)
        x_raw, y_raw, prep, _, model = _exact_instance(rng)
        curve = error_curve(y_raw, x_raw, model, prep, "train")
        assert curve.errs[-1] <= 1e-6

    def test_zero_beta_neuron_leaves_curve_flat(self):
        rng = np.random.default_rng(22)
        x_raw, y_raw, prep, _, model = _exact_instance(rng)
        extended = EnrModel(
            w_hat=np.vstack([model.w_hat, rng.standard_normal((1, model.w_hat.shape[1]))]),
            beta_hat=np.append(model.beta_hat, 0.0),
            j_hat=np.append(model.j_hat, 999),
            target_mean=model.target_mean,
            variant=model.variant,
            s_means=np.append(model.s_means, 0.123),
        )
        curve = error_curve(y_raw, x_raw, extended, prep, "train")
        assert curve.errs[-1] == pytest.approx(curve.errs[-2], abs=1e-15)

    def test_proxy_residual_equivalence_without_centering(self):
        # with raw features in the exact regime, the curve equals the
        # orthonormal-proxy residual curve
        rng = np.random.default_rng(23)
        x_raw, y_raw, prep, u, model = _exact_instance(rng)
        literal = EnrModel(
            w_hat=model.w_hat, beta_hat=model.beta_hat, j_hat=model.j_hat,
            target_mean=model.target_mean, variant=model.variant, s_means=None,
        )
        curve = error_curve(y_raw, x_raw, literal, prep, "train")
        y_c = y_raw - prep.target_mean
        norm_c = np.linalg.norm(y_c)
        for l in range(1, len(curve) + 1):
            cols = u[:, literal.j_hat[:l]]
            proxy = np.linalg.norm(y_c - cols @ (cols.T @ y_c)) / norm_c
            assert curve.errs[l - 1] == pytest.approx(proxy, abs=1e-6)

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(24)
        x_raw, y_raw, prep, _, model = _exact_instance(rng)
        with pytest.raises(ValueError):
            error_curve(y_raw, x_raw[:5], model, prep, "train")

    def test_raw_and_centered_share_numerators(self):
        rng = np.random.default_rng(25)
        x_raw, y_raw, prep, _, model = _exact_instance(rng)
        curve = error_curve(y_raw, x_raw, model, prep, "train")
        ratio = np.linalg.norm(y_raw - prep.target_mean) / np.linalg.norm(y_raw)
        np.testing.assert_allclose(curve.errs_raw, curve.errs * ratio, rtol=1e-12)


class TestPredict:
    def test_zero_betas_predict_target_mean(self):
        prep = fit_preprocess(np.random.default_rng(26).standard_normal((2, 9)),
                              np.full(9, 4.5))
        model = EnrModel(
            w_hat=np.zeros((0, 2)), beta_hat=np.zeros(0), j_hat=np.zeros(0, dtype=int),
            target_mean=4.5, variant="approximated",
        )
        assert predict(np.array([1.0, -1.0]), model, prep) == 4.5

    def test_training_points_match_curve_terminal(self):
        rng = np.random.default_rng(27)
        x_raw, y_raw, prep, _, model = _exact_instance(rng)
        curve = error_curve(y_raw, x_raw, model, prep, "train")
        preds = predict_batch(x_raw, model, prep)
        y_c = y_raw - prep.target_mean
        err = np.linalg.norm(y_raw - preds) / np.linalg.norm(y_c)
        assert err == pytest.approx(curve.errs[-1], abs=1e-12)
        single = predict(x_raw[:, 3], model, prep)
        assert single == pytest.approx(preds[3], abs=1e-12)

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(28)
        x_raw = rng.standard_normal((10, 14))
        y_raw = rng.standard_normal(14)
        prep = fit_preprocess(x_raw, y_raw)
        x_std = prep.transform_inputs(x_raw)
        y_c = prep.center_targets(y_raw)
        u = nngp_gram(x_std).eigendecompose().vectors
        flips = np.ones(14)
        flips[[1, 4, 9]] = -1.0
        preds = []
        for basis in (u, u * flips):
            w_full = compute_hidden_weights(x_std, basis)
            s_full = hidden_features(w_full, x_std)
            model = fit_approximated(
                y_c, basis, 6, w_full, target_mean=prep.target_mean,
                candidate_s_means=s_full.mean(axis=0),
            )
            preds.append(predict_batch(rng.standard_normal((10, 5)) if False else x_raw,
                                       model, prep))
        np.testing.assert_allclose(preds[0], preds[1], atol=1e-10)


class TestSelectionHelpers:
    def test_default_max_neurons(self):
        assert default_max_neurons(20, 225) == 112
        assert default_max_neurons(2, 1000) == 100
        assert default_max_neurons(80, 225) == 112

    def test_curvature_selection_finds_elbow(self):
        errs = np.array([1.0, 0.5, 0.45, 0.44, 0.435])
        assert curvature_selection(errs) == 2
        assert curvature_selection(np.array([1.0, 0.5])) is None


class TestProxyResidualMonotonicity:
    def test_nested_projection_residual_non_increasing(self):
        rng = np.random.default_rng(29)
        t = 18
        u = random_orthogonal(rng, t)
        y = rng.standard_normal(t)
        model = fit_approximated(y, u, t, rng.standard_normal((t, 3)))
        resid = []
        for l in range(1, t + 1):
            cols = u[:, model.j_hat[:l]]
            resid.append(np.linalg.norm(y - cols @ (cols.T @ y)))
        assert np.all(np.diff(resid) <= 1e-12)
        assert resid[-1] <= 1e-8
