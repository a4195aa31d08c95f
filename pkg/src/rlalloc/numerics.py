"""Minimal dense-network toolkit in double precision.

Small fully-connected networks with hand-rolled forward/backward passes,
adaptive-moment (Adam) parameter updates, and Polyak target blending.
Networks are plain dataclasses of numpy arrays so they deep-copy, serialize,
and diff without framework machinery. Hidden layers use a rectifier; the
output layer is either linear or tanh-squashed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray

OUTPUT_ACTIVATIONS = ("linear", "tanh")


@dataclass
class Mlp:
    """Parameters of a fully-connected network.

    ``weights[l]`` has shape ``(layer_sizes[l+1], layer_sizes[l])`` and acts on
    column ``l`` activations from the left; ``biases[l]`` has length
    ``layer_sizes[l+1]``.
    """

    layer_sizes: tuple[int, ...]
    weights: list[Array]
    biases: list[Array]
    output_activation: str = "linear"

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def parameter_count(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def copy(self) -> "Mlp":
        return Mlp(
            layer_sizes=self.layer_sizes,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            output_activation=self.output_activation,
        )


@dataclass
class ForwardCache:
    """Per-layer activations retained by :func:`mlp_forward` for backprop.

    ``activations[0]`` is the network input; ``activations[l]`` for l >= 1 is
    the post-nonlinearity output of layer l. All entries are 2-D (batch-major)
    regardless of how the input was passed.
    """

    layer_sizes: tuple[int, ...]
    activations: list[Array]
    squeeze: bool


@dataclass
class Gradients:
    """Loss gradients w.r.t. parameters and the network input.

    Parameter gradients are summed over the batch; ``wrt_input`` keeps one row
    per batch element (needed to push a critic's action-gradient into an
    actor).
    """

    weights: list[Array]
    biases: list[Array]
    wrt_input: Array


def mlp_init(
    layer_sizes: tuple[int, ...] | list[int],
    output_activation: str = "linear",
    *,
    rng: np.random.Generator | int,
) -> Mlp:
    """Create a network with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights.

    Biases start at zero. ``rng`` may be a Generator or an integer seed; the
    same seed yields bit-identical parameters.
    """
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise ValueError(f"need at least input and output sizes, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ValueError(f"layer sizes must be positive, got {sizes}")
    if output_activation not in OUTPUT_ACTIVATIONS:
        raise ValueError(
            f"output_activation must be one of {OUTPUT_ACTIVATIONS}, got {output_activation!r}"
        )
    gen = np.random.default_rng(rng)
    weights: list[Array] = []
    biases: list[Array] = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(gen.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(sizes, weights, biases, output_activation)


def _as_batch(x: Array, dim: int, what: str) -> tuple[Array, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
        squeeze = True
    elif arr.ndim == 2:
        squeeze = False
    else:
        raise ValueError(f"{what} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[1] != dim:
        raise ValueError(f"{what} has width {arr.shape[1]}, expected {dim}")
    return arr, squeeze


def mlp_forward(mlp: Mlp, x: Array) -> tuple[Array, ForwardCache]:
    """Evaluate the network on ``x`` (a vector or a batch of rows).

    Returns the output (matching the input's dimensionality) and a cache of
    per-layer activations for :func:`mlp_gradients`.
    """
    a, squeeze = _as_batch(x, mlp.in_dim, "input")
    activations = [a]
    last = mlp.n_layers - 1
    for l, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = activations[-1] @ w.T + b
        if l < last:
            a_next = np.maximum(z, 0.0)
        elif mlp.output_activation == "tanh":
            a_next = np.tanh(z)
        else:
            a_next = z
        activations.append(a_next)
    y = activations[-1][0] if squeeze else activations[-1]
    return y, ForwardCache(mlp.layer_sizes, activations, squeeze)


def mlp_gradients(mlp: Mlp, cache: ForwardCache, grad_output: Array) -> Gradients:
    """Backpropagate ``grad_output`` (dLoss/dOutput) through a cached forward pass."""
    if cache.layer_sizes != mlp.layer_sizes:
        raise ValueError(
            f"cache built for layer sizes {cache.layer_sizes}, network has {mlp.layer_sizes}"
        )
    if len(cache.activations) != mlp.n_layers + 1:
        raise ValueError("cache does not match this network's depth")
    gy, squeeze = _as_batch(grad_output, mlp.out_dim, "grad_output")
    n = cache.activations[0].shape[0]
    if gy.shape[0] != n:
        raise ValueError(f"grad_output batch {gy.shape[0]} != cached batch {n}")

    out = cache.activations[-1]
    if mlp.output_activation == "tanh":
        g = gy * (1.0 - out * out)
    else:
        g = gy
    w_grads: list[Array] = [None] * mlp.n_layers  # type: ignore[list-item]
    b_grads: list[Array] = [None] * mlp.n_layers  # type: ignore[list-item]
    for l in range(mlp.n_layers - 1, -1, -1):
        a_prev = cache.activations[l]
        w_grads[l] = g.T @ a_prev
        b_grads[l] = g.sum(axis=0)
        g = g @ mlp.weights[l]
        if l > 0:
            g = g * (cache.activations[l] > 0.0)
    wrt_input = g[0] if squeeze else g
    return Gradients(w_grads, b_grads, wrt_input)


@dataclass
class AdamState:
    """First/second-moment accumulators for one network."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    m_weights: list[Array] = field(default_factory=list)
    v_weights: list[Array] = field(default_factory=list)
    m_biases: list[Array] = field(default_factory=list)
    v_biases: list[Array] = field(default_factory=list)


def adam_init(mlp: Mlp, learning_rate: float) -> AdamState:
    if not (learning_rate > 0.0 and math.isfinite(learning_rate)):
        raise ValueError(f"learning_rate must be positive and finite, got {learning_rate}")
    return AdamState(
        learning_rate=learning_rate,
        m_weights=[np.zeros_like(w) for w in mlp.weights],
        v_weights=[np.zeros_like(w) for w in mlp.weights],
        m_biases=[np.zeros_like(b) for b in mlp.biases],
        v_biases=[np.zeros_like(b) for b in mlp.biases],
    )


def adam_step(mlp: Mlp, grads: Gradients, state: AdamState) -> None:
    """Apply one Adam update in place (bias-corrected moments)."""
    for g in grads.weights + grads.biases:
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite gradient passed to adam_step")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**t
    corr2 = 1.0 - b2**t
    params = mlp.weights + mlp.biases
    grad_list = grads.weights + grads.biases
    m_list = state.m_weights + state.m_biases
    v_list = state.v_weights + state.v_biases
    for p, g, m, v in zip(params, grad_list, m_list, v_list):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / corr1
        v_hat = v / corr2
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)


def soft_update(target: Mlp, online: Mlp, tau: float) -> None:
    """Blend ``target <- tau*online + (1-tau)*target`` in place.

    ``tau=1`` reproduces a hard copy; ``tau=0`` leaves the target unchanged.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if target.layer_sizes != online.layer_sizes:
        raise ValueError(
            f"shape mismatch: target {target.layer_sizes} vs online {online.layer_sizes}"
        )
    for tp, op in zip(target.weights + target.biases, online.weights + online.biases):
        tp *= 1.0 - tau
        tp += tau * op


def mlp_to_payload(mlp: Mlp) -> dict:
    """JSON-safe snapshot: layer sizes, output activation, row-major values."""
    params = []
    for l in range(mlp.n_layers):
        params.append(
            {"layer": l, "kind": "weight", "values": mlp.weights[l].ravel().tolist()}
        )
        params.append({"layer": l, "kind": "bias", "values": mlp.biases[l].tolist()})
    return {
        "layer_sizes": list(mlp.layer_sizes),
        "output_activation": mlp.output_activation,
        "params": params,
    }


def mlp_from_payload(payload: dict) -> Mlp:
    """Rebuild a network from :func:`mlp_to_payload` output."""
    sizes = tuple(int(s) for s in payload["layer_sizes"])
    act = payload["output_activation"]
    if act not in OUTPUT_ACTIVATIONS:
        raise ValueError(f"unknown output activation {act!r}")
    n_layers = len(sizes) - 1
    weights: list[Array] = [None] * n_layers  # type: ignore[list-item]
    biases: list[Array] = [None] * n_layers  # type: ignore[list-item]
    for entry in payload["params"]:
        l = int(entry["layer"])
        if not 0 <= l < n_layers:
            raise ValueError(f"layer index {l} out of range for {sizes}")
        values = np.asarray(entry["values"], dtype=float)
        if entry["kind"] == "weight":
            weights[l] = values.reshape(sizes[l + 1], sizes[l])
        elif entry["kind"] == "bias":
            if values.shape != (sizes[l + 1],):
                raise ValueError(f"bias length {values.shape} wrong for layer {l}")
            biases[l] = values
        else:
            raise ValueError(f"unknown param kind {entry['kind']!r}")
    if any(w is None for w in weights) or any(b is None for b in biases):
        raise ValueError("snapshot is missing parameters for some layer")
    return Mlp(sizes, weights, biases, act)


def adam_to_payload(state: AdamState) -> dict:
    return {
        "learning_rate": state.learning_rate,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "epsilon": state.epsilon,
        "step_count": state.step_count,
        "m_weights": [m.ravel().tolist() for m in state.m_weights],
        "v_weights": [v.ravel().tolist() for v in state.v_weights],
        "m_biases": [m.tolist() for m in state.m_biases],
        "v_biases": [v.tolist() for v in state.v_biases],
    }


def adam_from_payload(payload: dict, mlp: Mlp) -> AdamState:
    state = adam_init(mlp, payload["learning_rate"])
    state.beta1 = payload["beta1"]
    state.beta2 = payload["beta2"]
    state.epsilon = payload["epsilon"]
    state.step_count = int(payload["step_count"])
    state.m_weights = [
        np.asarray(m, dtype=float).reshape(w.shape)
        for m, w in zip(payload["m_weights"], mlp.weights)
    ]
    state.v_weights = [
        np.asarray(v, dtype=float).reshape(w.shape)
        for v, w in zip(payload["v_weights"], mlp.weights)
    ]
    state.m_biases = [np.asarray(m, dtype=float) for m in payload["m_biases"]]
    state.v_biases = [np.asarray(v, dtype=float) for v in payload["v_biases"]]
    return state
