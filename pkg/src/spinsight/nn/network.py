"""Network presets and the composed regression model.

The 2D stack is conv(32)-conv(32)-pool-conv(64)-conv(64)-pool followed by
dense 128 -> 32 -> 1, ReLU activations on every hidden layer, dropout after
each hidden dense layer, and a linear output neuron.  ``small-2d`` halves
the channel counts for CI-sized runs; the ``*-1d-flat`` presets mirror the
same stack with width-3 convolutions over the flattened 2^(2 L_b) vector.
"""

from __future__ import annotations

import numpy as np

from ..errors import SpinsightError
from .layers import (
    Conv1d,
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool1d,
    MaxPool2d,
    Relu,
)

PRESETS = {
    "paper-2d": {"dims": 2, "channels": (32, 32, 64, 64), "dense": (128, 32)},
    "small-2d": {"dims": 2, "channels": (16, 16, 32, 32), "dense": (128, 32)},
    "paper-1d-flat": {"dims": 1, "channels": (32, 32, 64, 64), "dense": (128, 32)},
    "small-1d-flat": {"dims": 1, "channels": (16, 16, 32, 32), "dense": (128, 32)},
}

FLAT_COUNTERPART = {"paper-2d": "paper-1d-flat", "small-2d": "small-1d-flat"}


class Network:
    """A layer stack ending in one linear output unit."""

    def __init__(self, layers: list[Layer], meta: dict):
        self.layers = layers
        self.meta = meta

    # -- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads]

    def parameter_snapshot(self) -> list[np.ndarray]:
        return [p.copy() for p in self.parameters()]

    def set_parameters(self, arrays) -> None:
        params = self.parameters()
        if len(arrays) != len(params):
            raise SpinsightError(
                f"expected {len(params)} parameter arrays, got {len(arrays)}"
            )
        for dst, src in zip(params, arrays):
            if dst.shape != src.shape:
                raise SpinsightError(
                    f"parameter shape mismatch: {dst.shape} vs {src.shape}"
                )
            dst[:] = src

    # -- execution ----------------------------------------------------------

    def _to_internal(self, x):
        """Public batches are channel-first (B, 1, H, W) or (B, 1, L); the
        convolutional stack runs channels-last."""
        if x.ndim == 4:
            return np.ascontiguousarray(x.transpose(0, 2, 3, 1))
        if x.ndim == 3:
            return np.ascontiguousarray(x.transpose(0, 2, 1))
        raise SpinsightError(f"expected a 3- or 4-axis batch, got shape {x.shape}")

    def forward(self, x, train=False, rng=None) -> np.ndarray:
        """Predictions (B,) for a batch; training mode samples dropout."""
        x = self._to_internal(x)
        for layer in self.layers:
            x = layer.forward(x, train=train, rng=rng)
        return x[:, 0]

    def backward(self, dpred) -> None:
        """Backpropagate d(loss)/d(prediction), filling every layer grad."""
        dout = np.asarray(dpred)[:, None]
        for layer in reversed(self.layers):
            dout = layer.backward(dout)

    def predict(self, x, batch_size=64) -> np.ndarray:
        """Evaluation-mode predictions, chunked to bound memory."""
        outs = [
            self.forward(x[i : i + batch_size])
            for i in range(0, x.shape[0], batch_size)
        ]
        return np.concatenate(outs)

    def pool_features(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Activations after the second pooling layer, channel-first, plus
        the per-channel mean absolute activation."""
        x = self._to_internal(x)
        pools = 0
        for layer in self.layers:
            x = layer.forward(x, train=False)
            if isinstance(layer, (MaxPool2d, MaxPool1d)):
                pools += 1
                if pools == 2:
                    axes = tuple(range(0, x.ndim - 1))
                    means = np.abs(x).mean(axis=axes)
                    if x.ndim == 4:
                        return x.transpose(0, 3, 1, 2), means
                    return x.transpose(0, 2, 1), means
        raise SpinsightError("network has fewer than two pooling layers")


def flat_input_length(subsystem_size: int) -> int:
    return 1 << (2 * subsystem_size)


def build_network(
    preset: str,
    input_size: int,
    seed: int = 0,
    dropout_p: float = 0.5,
    dropout_after_conv: bool = False,
) -> Network:
    """Initialize a preset for images of side ``input_size`` (2D) or vectors
    of length ``input_size`` (1D flat)."""
    if preset not in PRESETS:
        raise SpinsightError(f"unknown network preset {preset!r}")
    cfg = PRESETS[preset]
    if input_size % 4 != 0:
        raise SpinsightError(
            f"input size must be divisible by 4 (two pools), got {input_size}"
        )
    rng = np.random.default_rng(seed)
    conv = Conv2d if cfg["dims"] == 2 else Conv1d
    pool = MaxPool2d if cfg["dims"] == 2 else MaxPool1d
    c1, c2, c3, c4 = cfg["channels"]

    layers: list[Layer] = []

    def add_conv(cin, cout):
        layers.append(conv(cin, cout, rng=rng))
        layers.append(Relu())
        if dropout_after_conv and dropout_p > 0:
            layers.append(Dropout(dropout_p))

    add_conv(1, c1)
    add_conv(c1, c2)
    layers.append(pool())
    add_conv(c2, c3)
    add_conv(c3, c4)
    layers.append(pool())
    layers.append(Flatten())
    reduced = input_size // 4
    flat = c4 * reduced ** cfg["dims"]
    d1, d2 = cfg["dense"]
    layers.append(Dense(flat, d1, rng=rng))
    layers.append(Relu())
    if dropout_p > 0:
        layers.append(Dropout(dropout_p))
    layers.append(Dense(d1, d2, rng=rng))
    layers.append(Relu())
    if dropout_p > 0:
        layers.append(Dropout(dropout_p))
    layers.append(Dense(d2, 1, rng=rng))

    meta = {
        "preset": preset,
        "dims": cfg["dims"],
        "input_size": input_size,
        "dropout_p": dropout_p,
        "dropout_after_conv": dropout_after_conv,
        "layers": [layer.descriptor() for layer in layers],
    }
    return Network(layers, meta)


def network_from_meta(meta: dict) -> Network:
    """Rebuild the layer stack recorded in a checkpoint (zeroed parameters)."""
    layers: list[Layer] = []
    for desc in meta["layers"]:
        kind = desc["kind"]
        if kind == "conv2d":
            layers.append(Conv2d(desc["in_channels"], desc["out_channels"]))
        elif kind == "conv1d":
            layers.append(Conv1d(desc["in_channels"], desc["out_channels"]))
        elif kind == "maxpool2d":
            layers.append(MaxPool2d())
        elif kind == "maxpool1d":
            layers.append(MaxPool1d())
        elif kind == "flatten":
            layers.append(Flatten())
        elif kind == "dense":
            layers.append(Dense(desc["in_width"], desc["out_width"]))
        elif kind == "relu":
            layers.append(Relu())
        elif kind == "dropout":
            layers.append(Dropout(desc["p"]))
        else:
            raise SpinsightError(f"unknown layer kind {kind!r} in checkpoint")
    return Network(layers, dict(meta))
