"""Logistic baseline: training behaviour, prediction identity, checkpoints."""

import numpy as np
import pytest

from kancredit.baseline import (
    LogisticModel,
    load_logistic,
    logistic_predict,
    logistic_probabilities,
    save_logistic,
    train_logistic,
)
from kancredit.metrics import roc_auc


def manual_sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


class TestTrainLogistic:
    def test_separable_toy_converges(self, toy_dataset):
        model, history, seconds = train_logistic(toy_dataset, steps=500)
        assert history[-1] < 0.05
        assert history[0] == pytest.approx(np.log(2.0), abs=1e-12)  # zero start
        assert seconds >= 0

    def test_loss_decreases_overall(self, toy_dataset):
        _, history, _ = train_logistic(toy_dataset, steps=300)
        assert history[-1] < history[0]

    def test_deterministic(self, toy_dataset):
        model_a, hist_a, _ = train_logistic(toy_dataset, steps=50)
        model_b, hist_b, _ = train_logistic(toy_dataset, steps=50)
        np.testing.assert_array_equal(model_a.weights, model_b.weights)
        assert model_a.bias == model_b.bias
        np.testing.assert_array_equal(hist_a, hist_b)

    def test_beats_chance_on_toy(self, toy_dataset):
        model, _, _ = train_logistic(toy_dataset, steps=500)
        probs = logistic_probabilities(model, toy_dataset.features)
        assert roc_auc(probs, toy_dataset.labels) > 0.95

    def test_empty_dataset_rejected(self, toy_dataset):
        from types import SimpleNamespace

        empty = SimpleNamespace(features=np.zeros((0, 2)), labels=np.zeros(0))
        with pytest.raises(ValueError, match="empty-batch"):
            train_logistic(empty)


class TestPredict:
    def test_zero_model_outputs_half(self):
        model = LogisticModel(weights=np.zeros(4), bias=0.0)
        assert logistic_predict(model, np.ones(4)) == 0.5
        probs = logistic_probabilities(model, np.random.default_rng(0).normal(size=(9, 4)))
        np.testing.assert_array_equal(probs, np.full(9, 0.5))

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(1)
        model = LogisticModel(weights=rng.normal(size=6), bias=float(rng.normal()))
        feats = rng.uniform(-2, 2, (40, 6))
        expected = manual_sigmoid(feats @ model.weights + model.bias)
        np.testing.assert_allclose(
            logistic_probabilities(model, feats), expected, atol=1e-12
        )
        assert logistic_predict(model, feats[0]) == pytest.approx(expected[0], abs=1e-12)

    def test_dimension_mismatch(self):
        model = LogisticModel(weights=np.zeros(3), bias=0.0)
        with pytest.raises(ValueError, match="dimension-mismatch"):
            logistic_predict(model, np.zeros(4))
        with pytest.raises(ValueError, match="dimension-mismatch"):
            logistic_probabilities(model, np.zeros((5, 2)))


class TestCheckpoint:
    def test_round_trip(self, tmp_path, toy_dataset):
        model, _, _ = train_logistic(toy_dataset, steps=80)
        path = tmp_path / "baseline.json"
        save_logistic(model, path)
        loaded = load_logistic(path)
        np.testing.assert_array_equal(loaded.weights, model.weights)
        assert loaded.bias == model.bias

    def test_kind_mismatch(self, tmp_path):
        path = tmp_path / "wrong.json"
        path.write_text('{"kind": "kan-network", "version": 1}')
        with pytest.raises(ValueError, match="checkpoint-mismatch"):
            load_logistic(path)
