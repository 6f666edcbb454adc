"""Kolmogorov-Arnold network: learnable activations on edges, sums on nodes.

Each edge carries phi(x) = w_b * silu(x) + w_s * spline(x).  A node is the
plain sum of its incoming edge outputs; there are no biases and no node
nonlinearities.  A network is a chain of such layers ending in a single
logit node.  The spline branch sees inputs clamped to the grid range, the
silu branch sees the raw input.

Layers store parameters as dense arrays (output-major), which keeps the
batched forward pass to a handful of einsums.  ``ActivationEdge`` is a
per-edge view used for inspection, not for the hot path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from kancredit.splines import (
    KnotVector,
    SplineParams,
    basis_values,
    make_knot_vector,
)

__all__ = [
    "ActivationEdge",
    "KanLayer",
    "KanNetwork",
    "ForwardTrace",
    "silu",
    "sigmoid",
    "init_network",
    "edge_forward",
    "layer_forward",
    "network_forward",
    "network_logits",
    "network_probabilities",
    "predict_proba",
    "parameter_count",
    "flatten_params",
    "set_params",
    "save_network",
    "load_network",
]

# samples per forward chunk; bounds the (chunk, n_in, n_basis) temporaries
CHUNK = 16384

COEF_INIT_SCALE = 0.1


def sigmoid(x):
    """Numerically stable logistic function for scalars or arrays."""
    arr = np.asarray(x, dtype=np.float64)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if arr.ndim == 0 else out


def silu(x):
    """x * sigmoid(x), the residual branch of every edge activation."""
    arr = np.asarray(x, dtype=np.float64)
    out = arr * sigmoid(arr)
    return float(out) if arr.ndim == 0 else out


@dataclass
class ActivationEdge:
    """One edge's parameters: residual weight, spline weight, spline coefficients."""

    w_b: float
    w_s: float
    spline: SplineParams


@dataclass
class KanLayer:
    """Dense layer of n_out * n_in activation edges sharing one knot vector.

    ``w_b`` and ``w_s`` have shape (n_out, n_in); ``coef`` has shape
    (n_out, n_in, n_basis).
    """

    n_in: int
    n_out: int
    knots: KnotVector
    w_b: np.ndarray
    w_s: np.ndarray
    coef: np.ndarray

    def edge(self, q: int, p: int) -> ActivationEdge:
        """View of the edge from input p to output q (copies the coefficients)."""
        return ActivationEdge(
            w_b=float(self.w_b[q, p]),
            w_s=float(self.w_s[q, p]),
            spline=SplineParams(self.coef[q, p].copy()),
        )


@dataclass
class KanNetwork:
    layers: list
    widths: list
    grid_count: int
    degree: int
    seed: int


@dataclass
class ForwardTrace:
    """Every intermediate of one sample's forward pass.

    ``layer_inputs[l]`` is the vector entering layer l, ``edge_outputs[l]``
    the (n_out, n_in) matrix of phi values, ``node_sums[l]`` the layer's
    output vector.  ``logit`` is the single final output.
    """

    layer_inputs: list
    edge_outputs: list
    node_sums: list
    logit: float


def init_network(widths, grid_count: int, degree: int, seed: int) -> KanNetwork:
    """Fresh network: w_b = w_s = 1, spline coefficients uniform in +-0.1.

    ``widths`` lists node counts per layer, input first; the output layer
    must have exactly one node (the logit).
    """
    widths = [int(w) for w in widths]
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise ValueError(f"invalid-widths: need >= 2 positive layer widths, got {widths}")
    if widths[-1] != 1:
        raise ValueError(f"invalid-widths: output width must be 1, got {widths[-1]}")
    rng = np.random.default_rng(seed)
    layers = []
    for n_in, n_out in zip(widths[:-1], widths[1:]):
        kv = make_knot_vector(-1.0, 1.0, grid_count, degree)
        layers.append(
            KanLayer(
                n_in=n_in,
                n_out=n_out,
                knots=kv,
                w_b=np.ones((n_out, n_in)),
                w_s=np.ones((n_out, n_in)),
                coef=rng.uniform(
                    -COEF_INIT_SCALE, COEF_INIT_SCALE, size=(n_out, n_in, kv.n_basis)
                ),
            )
        )
    return KanNetwork(
        layers=layers,
        widths=widths,
        grid_count=int(grid_count),
        degree=int(degree),
        seed=int(seed),
    )


def edge_forward(edge: ActivationEdge, knots: KnotVector, x: float) -> float:
    """phi(x) for a single edge; the spline branch clamps, silu does not."""
    spline_val = float(basis_values(knots, x) @ edge.spline.coefficients)
    return edge.w_b * silu(float(x)) + edge.w_s * spline_val


def _layer_arrays(layer: KanLayer, X: np.ndarray):
    """Batched layer pass returning intermediates needed for gradients.

    X has shape (n, n_in).  Returns (Y, phi, sil, sig, basis, clamped) where
    Y is (n, n_out), phi is (n, n_out, n_in), basis is (n, n_in, n_basis).
    """
    n = X.shape[0]
    basis = basis_values(layer.knots, X.ravel()).reshape(n, layer.n_in, -1)
    spline_out = np.einsum("qpi,npi->nqp", layer.coef, basis)
    sig = sigmoid(X)
    sil = X * sig
    phi = layer.w_b[None, :, :] * sil[:, None, :] + layer.w_s[None, :, :] * spline_out
    return phi.sum(axis=2), phi, sil, sig, basis


def layer_forward(layer: KanLayer, x):
    """One sample through one layer: returns (node_sums, edge_outputs)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.n_in,):
        raise ValueError(
            f"dimension-mismatch: layer expects {layer.n_in} inputs, got {x.shape}"
        )
    y, phi, *_ = _layer_arrays(layer, x[None, :])
    return y[0], phi[0]


def network_forward(net: KanNetwork, x) -> ForwardTrace:
    """Full forward pass of one sample, keeping every intermediate."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.widths[0],):
        raise ValueError(
            f"dimension-mismatch: network expects {net.widths[0]} inputs, got {x.shape}"
        )
    layer_inputs, edge_outputs, node_sums = [], [], []
    cur = x
    for layer in net.layers:
        layer_inputs.append(cur)
        y, phi = layer_forward(layer, cur)
        edge_outputs.append(phi)
        node_sums.append(y)
        cur = y
    return ForwardTrace(
        layer_inputs=layer_inputs,
        edge_outputs=edge_outputs,
        node_sums=node_sums,
        logit=float(cur[0]),
    )


def network_logits(net: KanNetwork, X: np.ndarray) -> np.ndarray:
    """Logits for a batch (n, n_features), streamed in fixed-size chunks."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.widths[0]:
        raise ValueError(
            f"dimension-mismatch: network expects (n, {net.widths[0]}), got {X.shape}"
        )
    out = np.empty(X.shape[0])
    for lo in range(0, X.shape[0], CHUNK):
        cur = X[lo : lo + CHUNK]
        for layer in net.layers:
            cur = _layer_arrays(layer, cur)[0]
        out[lo : lo + CHUNK] = cur[:, 0]
    return out


def network_probabilities(net: KanNetwork, X: np.ndarray) -> np.ndarray:
    """Default probabilities for a batch."""
    return sigmoid(network_logits(net, X))


def predict_proba(net: KanNetwork, x) -> float:
    """Probability of the positive class for one sample."""
    return sigmoid(network_forward(net, x).logit)


def parameter_count(net: KanNetwork) -> int:
    return sum(layer.n_out * layer.n_in * (2 + layer.knots.n_basis) for layer in net.layers)


def flatten_params(net: KanNetwork) -> np.ndarray:
    """All parameters as one vector.

    Order: layers first-to-last; within a layer, edges in (q, p) row-major
    order; per edge [w_b, w_s, c_0 ... c_{M-1}].
    """
    blocks = []
    for layer in net.layers:
        per_edge = np.concatenate(
            [layer.w_b[:, :, None], layer.w_s[:, :, None], layer.coef], axis=2
        )
        blocks.append(per_edge.ravel())
    return np.concatenate(blocks)


def set_params(net: KanNetwork, flat: np.ndarray) -> None:
    """Write a flat vector (same order as flatten_params) back into the net."""
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (parameter_count(net),):
        raise ValueError(
            f"length-mismatch: expected {parameter_count(net)} parameters, got {flat.shape}"
        )
    pos = 0
    for layer in net.layers:
        m = layer.knots.n_basis
        size = layer.n_out * layer.n_in * (2 + m)
        per_edge = flat[pos : pos + size].reshape(layer.n_out, layer.n_in, 2 + m)
        layer.w_b = per_edge[:, :, 0].copy()
        layer.w_s = per_edge[:, :, 1].copy()
        layer.coef = per_edge[:, :, 2:].copy()
        pos += size


def save_network(net: KanNetwork, path) -> None:
    """JSON checkpoint; float64 values survive the round trip bit-exactly."""
    payload = {
        "kind": "kan-network",
        "version": 1,
        "widths": net.widths,
        "grid_count": net.grid_count,
        "degree": net.degree,
        "seed": net.seed,
        "range_min": net.layers[0].knots.range_min,
        "range_max": net.layers[0].knots.range_max,
        "params": flatten_params(net).tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_network(path) -> KanNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") != "kan-network":
        raise ValueError(f"checkpoint-mismatch: not a network checkpoint: {path}")
    widths = [int(w) for w in payload["widths"]]
    layers = []
    for n_in, n_out in zip(widths[:-1], widths[1:]):
        kv = make_knot_vector(
            payload["range_min"], payload["range_max"], payload["grid_count"], payload["degree"]
        )
        layers.append(
            KanLayer(
                n_in=n_in,
                n_out=n_out,
                knots=kv,
                w_b=np.zeros((n_out, n_in)),
                w_s=np.zeros((n_out, n_in)),
                coef=np.zeros((n_out, n_in, kv.n_basis)),
            )
        )
    net = KanNetwork(
        layers=layers,
        widths=widths,
        grid_count=int(payload["grid_count"]),
        degree=int(payload["degree"]),
        seed=int(payload["seed"]),
    )
    params = np.array(payload["params"], dtype=np.float64)
    set_params(net, params)
    return net
