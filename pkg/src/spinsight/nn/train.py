"""Seeded training loop with validation-based model selection.

A seeded 10% of the training samples is held out for validation; every epoch
shuffles the remainder, runs RMSprop on mini-batches, and logs the epoch's
training and validation MSE.  The parameter snapshot with the lowest
validation loss is the one returned (and restored into the network).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SpinsightError
from .network import Network
from .optim import RmspropState, mse_loss, rmsprop_step


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_size: int = 32
    dropout: float = 0.5
    validation_fraction: float = 0.1
    learning_rate: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise SpinsightError("dropout must be in [0, 1)")
        if not 0.0 < self.validation_fraction < 1.0:
            raise SpinsightError("validation fraction must be in (0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise SpinsightError("epochs and batch size must be positive")


@dataclass
class TrainResult:
    best_params: list
    best_epoch: int
    best_val_loss: float
    history: list = field(default_factory=list)  # (epoch, train_loss, val_loss)


def split_validation(n_samples: int, fraction: float, seed: int):
    """Seeded (train_indices, val_indices) split of range(n_samples)."""
    if n_samples < 2:
        raise SpinsightError("need at least two samples to carve a validation set")
    n_val = max(1, int(round(fraction * n_samples)))
    if n_val >= n_samples:
        raise SpinsightError("validation split would consume every sample")
    perm = np.random.default_rng(seed).permutation(n_samples)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def train(net: Network, x: np.ndarray, y: np.ndarray, config: TrainConfig) -> TrainResult:
    """Optimize ``net`` on (x, y); returns history and the best snapshot."""
    if x.shape[0] != y.shape[0]:
        raise SpinsightError("sample/label count mismatch")
    if x.shape[0] == 0:
        raise SpinsightError("empty dataset")
    train_idx, val_idx = split_validation(
        x.shape[0], config.validation_fraction, config.seed
    )
    x_train, y_train = x[train_idx], y[train_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    rng = np.random.default_rng(config.seed + 1)
    opt = RmspropState.for_params(
        net.parameters(), learning_rate=config.learning_rate
    )
    result = TrainResult(best_params=net.parameter_snapshot(),
                         best_epoch=-1, best_val_loss=np.inf)
    n = x_train.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        sq_sum = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            preds = net.forward(x_train[batch], train=True, rng=rng)
            loss, dpred = mse_loss(preds, y_train[batch])
            net.backward(dpred)
            rmsprop_step(net.parameters(), net.gradients(), opt)
            sq_sum += loss * batch.size
        train_loss = sq_sum / n
        val_loss, _ = mse_loss(net.predict(x_val, config.batch_size), y_val)
        result.history.append((epoch, train_loss, val_loss))
        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            result.best_params = net.parameter_snapshot()
    net.set_parameters(result.best_params)
    return result
