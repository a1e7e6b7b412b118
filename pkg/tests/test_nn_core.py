"""Numerical-core tests: layer algebra, loss values, and the finite-difference
oracle against every hand-written backward pass."""

from __future__ import annotations

import math

import numpy as np
import pytest

from laneintent.nn_core import (
    CheckpointError,
    DimensionError,
    GradCheckReport,
    NumericError,
    TrainConfig,
    dense_backward,
    dense_forward,
    global_norm,
    grad_check,
    load_checkpoint,
    lstm_backward,
    lstm_forward,
    lstm_step,
    save_checkpoint,
    sgd_step,
    sigmoid,
    softmax,
    softmax_ce,
    uniform_init,
)


def one_hot(labels, n_classes=3):
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


class TestDense:
    def test_identity_passthrough(self):
        x = np.random.default_rng(0).normal(size=(4, 5))
        y, _ = dense_forward(x, np.eye(5), np.zeros(5))
        np.testing.assert_array_equal(y, x)

    def test_zero_weight_grad_b_sums_batch(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(6, 4))
        grad_y = rng.normal(size=(6, 3))
        _, cache = dense_forward(x, np.zeros((3, 4)), np.zeros(3))
        _, _, grad_b = dense_backward(grad_y, cache)
        np.testing.assert_allclose(grad_b, grad_y.sum(axis=0))

    def test_gradients_vs_central_differences(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(4, 3))
        w = rng.normal(size=(5, 3))
        b = rng.normal(size=5)
        labels = one_hot(rng.integers(0, 5, size=4), n_classes=5)
        params = {"w": w, "b": b}

        def loss_fn():
            y, cache = dense_forward(x, params["w"], params["b"])
            loss, grad_logits = softmax_ce(y, labels)
            _, grad_w, grad_b = dense_backward(grad_logits, cache)
            return loss, {"w": grad_w, "b": grad_b}

        report = grad_check(loss_fn, params, eps=1e-5, tol=1e-6)
        assert report.passed, report.max_rel_err

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            dense_forward(np.zeros((2, 3)), np.zeros((4, 5)), np.zeros(4))


class TestLSTMStep:
    def test_zero_params_zero_output(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(2, 4))
        h, c, _ = lstm_step(x, np.zeros((2, 3)), np.zeros((2, 3)),
                            np.zeros((12, 4)), np.zeros((12, 3)), np.zeros(12))
        np.testing.assert_array_equal(h, 0.0)
        np.testing.assert_array_equal(c, 0.0)

    def test_saturated_forget_gate_carries_cell(self):
        # b_f = +10, b_i = -10, zero weights: f ~ 1, i*g ~ 0, so c_t ~ c_prev.
        hidden = 3
        b = np.zeros(4 * hidden)
        b[:hidden] = -10.0
        b[hidden:2 * hidden] = 10.0
        c_prev = np.array([[0.5, -1.0, 1.5]])
        h_prev = np.zeros((1, hidden))
        x = np.random.default_rng(4).normal(size=(1, 2))
        _, c_t, _ = lstm_step(x, h_prev, c_prev,
                              np.zeros((12, 2)), np.zeros((12, 3)), b)
        np.testing.assert_allclose(c_t, c_prev, atol=1e-4)

    def test_non_finite_input_rejected(self):
        x = np.array([[np.nan, 0.0]])
        with pytest.raises(NumericError):
            lstm_step(x, np.zeros((1, 3)), np.zeros((1, 3)),
                      np.zeros((12, 2)), np.zeros((12, 3)), np.zeros(12))

    def test_bptt_vs_central_differences(self):
        rng = np.random.default_rng(5)
        batch, steps, dim, hidden = 3, 6, 4, 5
        xs = rng.normal(size=(batch, steps, dim))
        labels = one_hot(rng.integers(0, 3, size=batch))
        params = {
            "w": uniform_init(rng, (4 * hidden, dim), dim),
            "u": uniform_init(rng, (4 * hidden, hidden), hidden),
            "b": uniform_init(rng, (4 * hidden,), hidden),
            "w_out": uniform_init(rng, (3, hidden), hidden),
            "b_out": np.zeros(3),
        }

        def loss_fn():
            h_last, caches = lstm_forward(xs, params["w"], params["u"], params["b"])
            logits, cache_out = dense_forward(h_last, params["w_out"], params["b_out"])
            loss, grad_logits = softmax_ce(logits, labels)
            grad_h, grad_w_out, grad_b_out = dense_backward(grad_logits, cache_out)
            _, grad_w, grad_u, grad_b = lstm_backward(grad_h, caches, params["w"], params["u"])
            return loss, {"w": grad_w, "u": grad_u, "b": grad_b,
                          "w_out": grad_w_out, "b_out": grad_b_out}

        report = grad_check(loss_fn, params, eps=1e-5, tol=1e-5)
        assert report.passed, (report.worst_param, report.max_rel_err)


class TestSoftmaxCE:
    def test_uniform_logits_ln3(self):
        loss, _ = softmax_ce(np.zeros((1, 3)), one_hot([1]))
        assert loss == pytest.approx(math.log(3.0), abs=1e-9)

    def test_huge_logits_no_overflow(self):
        loss, grad = softmax_ce(np.array([[1000.0, 0.0, 0.0]]), one_hot([0]))
        assert loss < 1e-6
        assert np.isfinite(grad).all()

    def test_batch_mean_matches_per_sample(self):
        rng = np.random.default_rng(6)
        logits = rng.normal(size=(8, 3))
        labels = one_hot(rng.integers(0, 3, size=8))
        batch_loss, _ = softmax_ce(logits, labels)
        singles = [softmax_ce(logits[i:i + 1], labels[i:i + 1])[0] for i in range(8)]
        assert batch_loss == pytest.approx(np.mean(singles), abs=1e-12)

    def test_gradient_vs_central_differences(self):
        rng = np.random.default_rng(7)
        logits = rng.normal(size=(4, 3))
        labels = one_hot(rng.integers(0, 3, size=4))
        params = {"logits": logits}

        def loss_fn():
            loss, grad = softmax_ce(params["logits"], labels)
            return loss, {"logits": grad}

        report = grad_check(loss_fn, params, eps=1e-6, tol=1e-8)
        assert report.passed, report.max_rel_err

    def test_softmax_rows_sum_to_one_positive(self):
        rng = np.random.default_rng(8)
        p = softmax(rng.normal(scale=30.0, size=(200, 3)))
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(p > 0)

    def test_non_one_hot_label_rejected(self):
        with pytest.raises(ValueError, match="one-hot"):
            softmax_ce(np.zeros((1, 3)), np.zeros((1, 3)))
        with pytest.raises(ValueError, match="one-hot"):
            softmax_ce(np.zeros((1, 3)), np.array([[0.5, 0.5, 0.0]]))


class TestSGD:
    def test_zero_gradient_no_change(self):
        params = {"p": np.ones(4)}
        sgd_step(params, {"p": np.zeros(4)}, TrainConfig())
        np.testing.assert_array_equal(params["p"], 1.0)

    def test_single_step_arithmetic(self):
        params = {"p": np.array([1.0])}
        cfg = TrainConfig(learning_rate=0.00125, clip_norm=0.0)
        sgd_step(params, {"p": np.array([2.0])}, cfg)
        assert params["p"][0] == pytest.approx(0.9975)

    def test_clipping_scales_by_norm_ratio(self):
        grads = {"a": np.full(25, 10.0)}  # norm = 50
        assert global_norm(grads) == pytest.approx(50.0)
        params = {"a": np.zeros(25)}
        cfg = TrainConfig(learning_rate=1.0, clip_norm=5.0)
        sgd_step(params, grads, cfg)
        np.testing.assert_allclose(params["a"], -10.0 * 0.1)

    def test_non_finite_gradient_names_block(self):
        params = {"w_out": np.zeros(3)}
        grads = {"w_out": np.array([1.0, np.inf, 0.0])}
        with pytest.raises(NumericError, match="w_out"):
            sgd_step(params, grads, TrainConfig())

    def test_descent_property_small_lr(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(16, 4))
        labels = one_hot(rng.integers(0, 3, size=16))
        params = {"w": uniform_init(rng, (3, 4), 4), "b": np.zeros(3)}

        def loss_and_grads():
            y, cache = dense_forward(x, params["w"], params["b"])
            loss, grad_logits = softmax_ce(y, labels)
            _, gw, gb = dense_backward(grad_logits, cache)
            return loss, {"w": gw, "b": gb}

        before, grads = loss_and_grads()
        sgd_step(params, grads, TrainConfig(learning_rate=1e-6))
        after, _ = loss_and_grads()
        assert after <= before


class TestGradCheckHarness:
    def test_linear_model_exact(self):
        # Loss is linear in p, so central differences are exact to roundoff.
        p = {"p": np.array([1.0, -2.0, 3.0])}
        coeff = np.array([0.5, 1.5, -0.25])

        def loss_fn():
            return float(coeff @ p["p"]), {"p": coeff.copy()}

        report = grad_check(loss_fn, p, eps=1e-5, tol=1e-9)
        assert report.passed

    def test_corrupted_gradient_detected(self):
        p = {"p": np.array([1.0, -2.0, 3.0])}
        coeff = np.array([0.5, 1.5, -0.25])

        def loss_fn():
            return float(coeff @ p["p"]), {"p": coeff * 1.01}

        report = grad_check(loss_fn, p, eps=1e-5, tol=1e-4)
        assert not report.passed

    def test_report_fields(self):
        p = {"a": np.zeros(2), "b": np.zeros(3)}

        def loss_fn():
            return 0.0, {"a": np.zeros(2), "b": np.zeros(3)}

        report = grad_check(loss_fn, p)
        assert isinstance(report, GradCheckReport)
        assert report.n_checked == 5
        assert set(report.per_param) == {"a", "b"}


class TestSigmoid:
    def test_extremes_stable(self):
        z = np.array([-1e3, -50.0, 0.0, 50.0, 1e3])
        s = sigmoid(z)
        assert np.isfinite(s).all()
        assert s[2] == 0.5
        assert np.all(np.diff(s) >= 0)

    def test_matches_naive_in_safe_range(self):
        z = np.linspace(-30, 30, 1001)
        np.testing.assert_allclose(sigmoid(z), 1.0 / (1.0 + np.exp(-z)), atol=1e-15)


class TestCheckpoint:
    def test_roundtrip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(10)
        params = {
            "w": rng.normal(size=(5, 3)),
            "b": rng.normal(size=5),
            "cell": rng.normal(size=(4, 2, 2)),
        }
        arch = {"kind": "test", "dims": [3, 5]}
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, arch, params, metadata={"seed": 7})
        arch2, params2, meta = load_checkpoint(path)
        assert arch2 == arch
        assert meta == {"seed": 7}
        assert set(params2) == set(params)
        for name in params:
            assert np.array_equal(params2[name], params[name])

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(path)

    def test_version_mismatch_rejected(self, tmp_path):
        import struct

        path = tmp_path / "old.ckpt"
        path.write_bytes(b"LCKP" + struct.pack("<I", 99) + struct.pack("<Q", 2) + b"{}")
        with pytest.raises(CheckpointError, match="version 99"):
            load_checkpoint(path)
