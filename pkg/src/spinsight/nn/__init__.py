"""From-scratch convolutional regression: layers, presets, training."""

from .layers import he_normal
from .network import (
    FLAT_COUNTERPART,
    PRESETS,
    Network,
    build_network,
    flat_input_length,
    network_from_meta,
)
from .optim import RmspropState, mse_loss, rmsprop_step
from .train import TrainConfig, TrainResult, split_validation, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "he_normal",
    "FLAT_COUNTERPART",
    "PRESETS",
    "Network",
    "build_network",
    "flat_input_length",
    "network_from_meta",
    "RmspropState",
    "mse_loss",
    "rmsprop_step",
    "TrainConfig",
    "TrainResult",
    "split_validation",
    "train",
    "load_checkpoint",
    "save_checkpoint",
]
