"""MSE loss and the RMSprop update rule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SpinsightError


def mse_loss(predictions, targets) -> tuple[float, np.ndarray]:
    """Mean-square error and its gradient 2*(pred - target)/N."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise SpinsightError(
            f"shape mismatch {predictions.shape} vs {targets.shape}"
        )
    n = predictions.size
    if n == 0:
        raise SpinsightError("loss of an empty batch is undefined")
    diff = predictions - targets
    return float(np.dot(diff, diff) / n), 2.0 * diff / n


@dataclass
class RmspropState:
    """Per-parameter mean-square accumulators plus the step hyperparameters."""

    learning_rate: float = 0.001
    decay: float = 0.9
    epsilon: float = 1e-7
    accumulators: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, learning_rate=0.001, decay=0.9, epsilon=1e-7):
        state = cls(learning_rate, decay, epsilon)
        state.accumulators = [np.zeros_like(p) for p in params]
        return state


def rmsprop_step(params, grads, state: RmspropState):
    """s <- decay*s + (1-decay)*g^2;  p <- p - lr*g/(sqrt(s) + eps), in place."""
    if not state.accumulators:
        state.accumulators = [np.zeros_like(p) for p in params]
    if len(params) != len(grads) or len(params) != len(state.accumulators):
        raise SpinsightError("params, grads and accumulators differ in length")
    for p, g, s in zip(params, grads, state.accumulators):
        s *= state.decay
        s += (1.0 - state.decay) * g * g
        p -= state.learning_rate * g / (np.sqrt(s) + state.epsilon)
    return params
