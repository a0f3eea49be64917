"""The Qubism map: n-spin amplitude vectors rendered as 2^(n/2) square images.

Writing a configuration as alternating bit pairs X1 Y1 X2 Y2 ... X_{n/2}
Y_{n/2} (site 0 first), the amplitude lands on the 1-based pixel

    x = sum_i X_i 2^(n/2 - i) + 1,    y = sum_i Y_i 2^(n/2 - i) + 1.

The map is a bijection between configurations and pixels, so the image is a
lossless, self-similar rearrangement of the state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import SpinsightError
from .states import DenseState, PurifiedState


@dataclass(frozen=True)
class QubismImage:
    """Raw pixel grid plus an optional [0, 1]-normalized view."""

    side: int
    pixels: np.ndarray
    normalized: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.pixels.shape != (self.side, self.side):
            raise SpinsightError(
                f"pixels shape {self.pixels.shape} != ({self.side}, {self.side})"
            )


def qubism_index(bits) -> tuple[int, int]:
    """Pixel (x, y), 1-based, for one configuration given as a bit sequence."""
    bits = list(bits)
    if len(bits) % 2 != 0:
        raise SpinsightError("qubism needs an even number of spins")
    half = len(bits) // 2
    x = y = 0
    for i in range(half):
        x += bits[2 * i] << (half - 1 - i)
        y += bits[2 * i + 1] << (half - 1 - i)
    return x + 1, y + 1


def _deinterleave(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column (0-based) of every configuration index."""
    half = n_sites // 2
    idx = np.arange(1 << n_sites, dtype=np.int64)
    rows = np.zeros_like(idx)
    cols = np.zeros_like(idx)
    for i in range(half):
        # X_i sits at bit (n-1-2i), Y_i one position lower
        rows |= ((idx >> (n_sites - 1 - 2 * i)) & 1) << (half - 1 - i)
        cols |= ((idx >> (n_sites - 2 - 2 * i)) & 1) << (half - 1 - i)
    return rows, cols


def qubism_map(state: Union[DenseState, PurifiedState]) -> QubismImage:
    """Scatter a state's amplitudes onto their Qubism pixels."""
    n = state.site_count
    if n % 2 != 0:
        raise SpinsightError("qubism needs an even number of spins")
    side = 1 << (n // 2)
    rows, cols = _deinterleave(n)
    img = np.zeros((side, side))
    img[rows, cols] = state.amplitudes
    return QubismImage(side, img)


def normalize_image(img: QubismImage) -> QubismImage:
    """Min-max rescale to [0, 1] per image; a constant image maps to zeros."""
    lo = float(img.pixels.min())
    hi = float(img.pixels.max())
    if hi - lo == 0.0:
        view = np.zeros_like(img.pixels)
    else:
        view = (img.pixels - lo) / (hi - lo)
    return QubismImage(img.side, img.pixels, view)
