"""Logistic-regression reference model sharing the package's optimizer.

The point of this module is comparability, not novelty: the baseline is
trained with the exact same Adam update as the spline networks, on the same
preprocessed features, so score differences between the two model families
cannot be blamed on optimizer details.
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import sigmoid
from .training import AdamState, TrainConfig, adam_step

__all__ = [
    "LogisticModel",
    "train_logistic",
    "logistic_predict",
    "logistic_probabilities",
    "save_logistic",
    "load_logistic",
]

_CHECKPOINT_KIND = "logistic-model"


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float

    @property
    def n_features(self) -> int:
        return self.weights.size


def train_logistic(dataset, learning_rate: float = 0.1, steps: int = 100, seed: int = 0):
    """Fit a logistic model with full-batch Adam from a zero start.

    ``dataset`` is anything with ``.features`` (n, d) and ``.labels`` (n,).
    Returns ``(model, loss_history, seconds)``. The zero start makes the fit
    deterministic regardless of ``seed``; the argument exists so call sites
    can treat baseline and network training interchangeably.
    """
    x = np.asarray(dataset.features, dtype=np.float64)
    y = np.asarray(dataset.labels, dtype=np.float64)
    n, d = x.shape
    if n == 0:
        raise ValueError("empty-batch: dataset has no rows")

    cfg = TrainConfig(learning_rate=learning_rate, steps=steps, seed=seed)
    params = np.zeros(d + 1)
    state = AdamState.zeros(d + 1)
    history = np.empty(steps)

    started = time.perf_counter()
    for t in range(1, steps + 1):
        z = x @ params[:d] + params[d]
        # mean of max(z, 0) - z*y + log1p(exp(-|z|)), the stable BCE form
        history[t - 1] = float(
            np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z))))
        )
        residual = (sigmoid(z) - y) / n
        grads = np.concatenate([x.T @ residual, [residual.sum()]])
        params, state = adam_step(params, grads, state, t, cfg)
    seconds = time.perf_counter() - started

    model = LogisticModel(weights=params[:d].copy(), bias=float(params[d]))
    return model, history, seconds


def logistic_predict(model: LogisticModel, x) -> float:
    """Default probability for one sample."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ValueError(
            f"dimension-mismatch: expected {model.n_features} features, got shape {x.shape}"
        )
    return float(sigmoid(float(np.dot(model.weights, x)) + model.bias))


def logistic_probabilities(model: LogisticModel, features) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise ValueError(
            f"dimension-mismatch: expected (n, {model.n_features}), got {features.shape}"
        )
    return sigmoid(features @ model.weights + model.bias)


def save_logistic(model: LogisticModel, path) -> None:
    payload = {
        "kind": _CHECKPOINT_KIND,
        "version": 1,
        "weights": model.weights.tolist(),
        "bias": model.bias,
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_logistic(path) -> LogisticModel:
    payload = json.loads(Path(path).read_text())
    if payload.get("kind") != _CHECKPOINT_KIND:
        raise ValueError(
            f"checkpoint-mismatch: expected kind {_CHECKPOINT_KIND!r}, "
            f"got {payload.get('kind')!r}"
        )
    return LogisticModel(
        weights=np.asarray(payload["weights"], dtype=np.float64),
        bias=float(payload["bias"]),
    )
