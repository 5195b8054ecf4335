import numpy as np
import pytest

from latentaxes import training
from latentaxes.errors import BatchTooSmall, ConfigInvalid, DimensionMismatch
from latentaxes.mlp import init_params
from latentaxes.training import (
    EncoderDecoder,
    TrainConfig,
    backward,
    batch_corr,
    corr_loss_and_grad,
    forward_batch,
    loss_attr,
    loss_corr,
    loss_recons,
    total_loss,
    train,
)


def small_model(seed=0, sizes=(10, 16, 16, 10)):
    return EncoderDecoder(encoder=init_params(seed, list(sizes)),
                          decoder=init_params(seed + 1, list(sizes)),
                          n_attributes=3)


class TestLosses:
    def test_recons_zero_on_identical(self):
        x = np.random.default_rng(0).normal(size=(4, 6))
        assert loss_recons(x, x.copy()) == 0.0

    def test_recons_pythagoras(self):
        w = np.array([[3.0, 4.0]])
        assert loss_recons(w, np.zeros((1, 2))) == pytest.approx(25.0)

    def test_recons_quadratic(self):
        rng = np.random.default_rng(1)
        w, r = rng.normal(size=(8, 5)), rng.normal(size=(8, 5))
        assert loss_recons(w, w + 2 * r) == pytest.approx(4 * loss_recons(w, w + r))

    def test_attr_zero_when_matching(self):
        codes = np.random.default_rng(2).normal(size=(6, 8))
        assert loss_attr(codes, codes[:, :3].copy()) == 0.0

    def test_attr_hand_value(self):
        codes = np.array([[1.0, -1.0, 9.9]])
        attrs = np.array([[0.0, 0.0]])
        assert loss_attr(codes, attrs) == pytest.approx(2.0)

    def test_attr_ignores_free_slots(self):
        rng = np.random.default_rng(3)
        codes = rng.normal(size=(5, 7))
        attrs = rng.normal(size=(5, 3))
        before = loss_attr(codes, attrs)
        codes[:, 3:] += 100.0
        assert loss_attr(codes, attrs) == before

    def test_corr_zero_at_reference(self):
        assert loss_corr(np.eye(3), np.eye(3)) == 0.0

    def test_corr_hand_value(self):
        corr = np.array([[1.0, 0.5], [0.5, 1.0]])
        assert loss_corr(corr, np.eye(2)) == pytest.approx(1.0)

    def test_corr_transpose_invariant(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(3, 3))
        corr = (a + a.T) / 2
        assert loss_corr(corr, np.eye(3)) == loss_corr(corr.T, np.eye(3))


class TestBatchCorr:
    def test_balanced_design(self):
        # independent +-1 columns, balanced: identity correlation
        codes = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
        corr = batch_corr(codes)
        np.testing.assert_allclose(corr, np.eye(2), atol=1e-7)

    def test_duplicated_column(self):
        rng = np.random.default_rng(5)
        col = 10 * rng.normal(size=64)
        corr = batch_corr(np.column_stack([col, col]))
        assert corr[0, 1] == pytest.approx(1.0, abs=1e-9)

    def test_constant_column_guarded(self):
        rng = np.random.default_rng(6)
        codes = np.column_stack([np.full(32, 2.0), rng.normal(size=32)])
        corr = batch_corr(codes)
        assert np.isfinite(corr).all()
        assert abs(corr[0, 0]) < 1e-6  # var/(var+delta) with var = 0
        assert abs(corr[0, 1]) < 1e-3

    def test_batch_too_small(self):
        with pytest.raises(BatchTooSmall):
            batch_corr(np.ones((1, 3)))


class TestTotalLoss:
    def test_alpha_beta_zero(self):
        rng = np.random.default_rng(7)
        w, w_hat = rng.normal(size=(8, 5)), rng.normal(size=(8, 5))
        codes, attrs = rng.normal(size=(8, 5)), rng.normal(size=(8, 3))
        cfg = TrainConfig(alpha=0.0, beta=0.0, corr_mode=training.CORR_IDENTITY)
        total, comps = total_loss(w, w_hat, codes, attrs, cfg, np.eye(3))
        assert total == pytest.approx(comps["recons"])

    def test_perfect_everything_is_zero(self):
        codes = np.array([[1, 0, 0, 0.3], [0, 1, 0, -0.2],
                          [0, 0, 1, 0.1], [-1, 0, 0, 0.0],
                          [0, -1, 0, 0.5], [0, 0, -1, 0.6],
                          [1, 0, 0, 0.2], [-1, 0, 0, -0.4]], dtype=float)
        # balanced columns: batch_corr ~ identity (up to the variance guard)
        w = np.random.default_rng(8).normal(size=(8, 4))
        cfg = TrainConfig(alpha=1.0, beta=1.0, corr_mode=training.CORR_IDENTITY)
        total, _ = total_loss(w, w.copy(), codes, codes[:, :3].copy(), cfg, np.eye(3))
        assert total == pytest.approx(0.0, abs=1e-6)

    def test_variant_a_ignores_correlation(self):
        rng = np.random.default_rng(9)
        w = rng.normal(size=(16, 5))
        col = rng.normal(size=16)
        codes = np.column_stack([col, col, col, rng.normal(size=(16, 2))])
        attrs = rng.normal(size=(16, 3))
        cfg = TrainConfig(alpha=1.0, beta=1.0, corr_mode=training.CORR_NONE)
        total, comps = total_loss(w, w, codes, attrs, cfg)
        assert comps["corr"] == 0.0
        assert total == pytest.approx(cfg.alpha * comps["attr"])


class TestGradients:
    @pytest.fixture()
    def setup(self):
        rng = np.random.default_rng(10)
        model = small_model()
        x = rng.normal(size=(8, 10))
        attrs = rng.normal(size=(8, 3))
        return model, x, attrs

    def objective(self, model, x, attrs, cfg, gamma):
        codes, w_hat, _, _ = forward_batch(model, x)
        total, _ = total_loss(x, w_hat, codes, attrs, cfg, gamma)
        return total

    @pytest.mark.parametrize("cfg,gamma", [
        (TrainConfig(alpha=0.0, beta=0.0, corr_mode=training.CORR_NONE), None),
        (TrainConfig(alpha=1.0, beta=0.0, corr_mode=training.CORR_NONE), None),
        (TrainConfig(alpha=0.0, beta=1.0, corr_mode=training.CORR_IDENTITY), "eye"),
        (TrainConfig(alpha=0.7, beta=0.4, corr_mode=training.CORR_IDENTITY), "eye"),
    ])
    def test_against_finite_differences(self, setup, cfg, gamma):
        model, x, attrs = setup
        gamma = np.eye(3) if gamma == "eye" else None
        enc_gw, enc_gb, dec_gw, dec_gb, _ = backward(model, x, attrs, cfg, gamma)
        h = 1e-5
        rng = np.random.default_rng(11)
        for net, gws, gbs in ((model.encoder, enc_gw, enc_gb),
                              (model.decoder, dec_gw, dec_gb)):
            for li in range(len(net.weights)):
                rows, cols = net.weights[li].shape
                for _ in range(4):
                    i, j = rng.integers(rows), rng.integers(cols)
                    orig = net.weights[li][i, j]
                    net.weights[li][i, j] = orig + h
                    up = self.objective(model, x, attrs, cfg, gamma)
                    net.weights[li][i, j] = orig - h
                    down = self.objective(model, x, attrs, cfg, gamma)
                    net.weights[li][i, j] = orig
                    fd = (up - down) / (2 * h)
                    assert gws[li][i, j] == pytest.approx(fd, rel=1e-4, abs=1e-10)
                bi = rng.integers(net.biases[li].shape[0])
                orig = net.biases[li][bi]
                net.biases[li][bi] = orig + h
                up = self.objective(model, x, attrs, cfg, gamma)
                net.biases[li][bi] = orig - h
                down = self.objective(model, x, attrs, cfg, gamma)
                net.biases[li][bi] = orig
                fd = (up - down) / (2 * h)
                assert gbs[li][bi] == pytest.approx(fd, rel=1e-4, abs=1e-10)

    def test_beta_zero_matches_corr_free_path(self, setup):
        model, x, attrs = setup
        with_corr = TrainConfig(alpha=0.5, beta=0.0, corr_mode=training.CORR_IDENTITY)
        without = TrainConfig(alpha=0.5, beta=0.0, corr_mode=training.CORR_NONE)
        g1 = backward(model, x, attrs, with_corr, np.eye(3))
        g2 = backward(model, x, attrs, without, None)
        for a, b in zip(g1[0], g2[0]):
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_zero_variance_column_finite(self):
        rng = np.random.default_rng(12)
        codes = np.column_stack([np.full(8, 1.0), rng.normal(size=(8, 2))])
        loss, grad = corr_loss_and_grad(codes, np.eye(3))
        assert np.isfinite(loss)
        assert np.isfinite(grad).all()


class TestTrain:
    def make_data(self, n=512, d=8, k=2, seed=0):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, d))
        attrs = np.tanh(x[:, :k]) + 0.1 * rng.normal(size=(n, k))
        return x, attrs

    def test_loss_decreases(self):
        x, attrs = self.make_data()
        cfg = TrainConfig(alpha=1.0, beta=0.1, epochs=60, batch_size=64,
                          learning_rate=3e-3, hidden_size=16, n_layers=3, seed=1)
        _, history = train(x, attrs, cfg)
        assert history[-1]["recons"] < 0.5 * history[0]["recons"]

    def test_bit_deterministic(self):
        x, attrs = self.make_data()
        cfg = TrainConfig(alpha=1.0, beta=0.1, epochs=3, batch_size=64,
                          learning_rate=1e-3, hidden_size=16, n_layers=3, seed=2)
        m1, h1 = train(x, attrs, cfg)
        m2, h2 = train(x, attrs, cfg)
        assert h1 == h2
        for w1, w2 in zip(m1.encoder.weights, m2.encoder.weights):
            np.testing.assert_array_equal(w1, w2)

    def test_rejects_code_not_bigger_than_attrs(self):
        x, attrs = self.make_data(d=2, k=2)
        cfg = TrainConfig(epochs=1, hidden_size=8, n_layers=2)
        with pytest.raises(ConfigInvalid):
            train(x, attrs, cfg)

    def test_rejects_tiny_batch_with_corr(self):
        x, attrs = self.make_data()
        cfg = TrainConfig(epochs=1, batch_size=1, corr_mode=training.CORR_IDENTITY)
        with pytest.raises(ConfigInvalid):
            train(x, attrs, cfg)

    def test_misaligned_data(self):
        with pytest.raises(DimensionMismatch):
            train(np.ones((5, 4)), np.ones((6, 2)), TrainConfig(epochs=1))

    def test_save_load_round_trip(self, tmp_path):
        x, attrs = self.make_data()
        cfg = TrainConfig(alpha=1.0, beta=0.0, corr_mode=training.CORR_NONE,
                          epochs=2, batch_size=64, hidden_size=16, n_layers=3)
        model, _ = train(x, attrs, cfg)
        training.save_model(model, cfg, tmp_path)
        loaded, loaded_cfg = training.load_model(tmp_path)
        assert loaded_cfg == cfg
        for w1, w2 in zip(model.decoder.weights, loaded.decoder.weights):
            np.testing.assert_array_equal(w1, w2)
