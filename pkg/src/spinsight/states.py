"""Dense many-body state vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpinsightError


@dataclass(frozen=True)
class DenseState:
    """A normalized wave-function over 2^site_count configurations.

    Site 0 is the most significant bit of the configuration index; bit 0 is
    spin up.
    """

    site_count: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.site_count,):
            raise SpinsightError(
                f"expected {1 << self.site_count} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise SpinsightError(f"state not normalized: |psi| = {norm}")

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "DenseState":
        """Normalize ``v`` and wrap it; site count inferred from the length."""
        v = np.asarray(v, dtype=np.float64)
        n = int(v.size).bit_length() - 1
        if v.size != 1 << n:
            raise SpinsightError(f"length {v.size} is not a power of two")
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise SpinsightError("cannot normalize the zero vector")
        return cls(n, v / norm)


@dataclass(frozen=True)
class PurifiedState:
    """Purification vector |rho> on 2*L_b sites; squared norm is Tr rho^2."""

    site_count: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.site_count,):
            raise SpinsightError(
                f"expected {1 << self.site_count} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )
        sq = float(np.dot(self.amplitudes, self.amplitudes))
        if not 0.0 < sq <= 1.0 + 1e-10:
            raise SpinsightError(f"squared norm {sq} outside (0, 1]")
