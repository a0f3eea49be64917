"""Matrix-product states with a movable canonical center.

Tensors are rank-3 arrays (left bond, physical dim 2, right bond) with bond
dimension 1 at both chain ends.  Tensors strictly left of the center are
left isometries, tensors strictly right of it are right isometries.
"""

from __future__ import annotations

import numpy as np

from ..errors import SpinsightError
from ..states import DenseState


class Mps:
    def __init__(self, tensors: list[np.ndarray], center: int):
        if not tensors:
            raise SpinsightError("empty MPS")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise SpinsightError("boundary bond dimensions must be 1")
        for s in range(len(tensors) - 1):
            if tensors[s].shape[2] != tensors[s + 1].shape[0]:
                raise SpinsightError(f"bond mismatch between sites {s} and {s + 1}")
        if not 0 <= center < len(tensors):
            raise SpinsightError(f"center {center} out of range")
        self.tensors = tensors
        self.center = center

    @property
    def site_count(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensors[self.center]))

    def copy(self) -> "Mps":
        return Mps([t.copy() for t in self.tensors], self.center)

    def move_center_to(self, pos: int) -> None:
        """Shift the canonical center site by site using QR factorizations."""
        while self.center < pos:
            s = self.center
            t = self.tensors[s]
            dl, d, dr = t.shape
            q, r = np.linalg.qr(t.reshape(dl * d, dr))
            self.tensors[s] = q.reshape(dl, d, q.shape[1])
            self.tensors[s + 1] = np.tensordot(r, self.tensors[s + 1], axes=(1, 0))
            self.center = s + 1
        while self.center > pos:
            s = self.center
            t = self.tensors[s]
            dl, d, dr = t.shape
            q, r = np.linalg.qr(t.reshape(dl, d * dr).T)
            k = q.shape[1]
            self.tensors[s] = q.T.reshape(k, d, dr)
            self.tensors[s - 1] = np.tensordot(self.tensors[s - 1], r.T, axes=(2, 0))
            self.center = s - 1

    def canonical_defect(self) -> float:
        """Largest deviation of any off-center tensor from its isometry law."""
        worst = 0.0
        for s, t in enumerate(self.tensors):
            dl, d, dr = t.shape
            if s < self.center:
                m = t.reshape(dl * d, dr)
                worst = max(worst, float(np.abs(m.T @ m - np.eye(dr)).max()))
            elif s > self.center:
                m = t.reshape(dl, d * dr)
                worst = max(worst, float(np.abs(m @ m.T - np.eye(dl)).max()))
        return worst


def mps_to_dense(mps: Mps) -> DenseState:
    """Contract every tensor into the full amplitude vector (<= 20 sites)."""
    n = mps.site_count
    if n > 20:
        raise SpinsightError(f"dense contraction capped at 20 sites, got {n}")
    acc = np.ones((1, 1))
    for t in mps.tensors:
        acc = np.tensordot(acc, t, axes=(1, 0))
        acc = acc.reshape(-1, t.shape[2])
    return DenseState(n, acc[:, 0])


def mps_from_dense(v: np.ndarray, site_count: int, chi_max: int | None = None) -> Mps:
    """Exact left-to-right SVD factorization; truncates only if chi_max set."""
    if v.shape != (1 << site_count,):
        raise SpinsightError(
            f"vector of shape {v.shape} is not a {site_count}-site state"
        )
    tensors = []
    rest = v.reshape(1, -1).astype(np.float64)
    for s in range(site_count - 1):
        dl = rest.shape[0]
        m = rest.reshape(dl * 2, -1)
        u, sing, vt = np.linalg.svd(m, full_matrices=False)
        keep = int(np.sum(sing > sing[0] * 1e-14)) if sing[0] > 0 else 1
        if chi_max is not None:
            keep = min(keep, chi_max)
        u, sing, vt = u[:, :keep], sing[:keep], vt[:keep]
        tensors.append(u.reshape(dl, 2, keep))
        rest = sing[:, None] * vt
    tensors.append(rest.reshape(rest.shape[0], 2, 1))
    return Mps(tensors, site_count - 1)


def random_mps(site_count: int, chi: int, rng: np.random.Generator) -> Mps:
    """Seeded random MPS, right-canonicalized and normalized (center 0)."""
    dims = [1]
    for s in range(1, site_count):
        dims.append(min(chi, 2 ** s, 2 ** (site_count - s)))
    dims.append(1)
    tensors = [
        rng.standard_normal((dims[s], 2, dims[s + 1])) for s in range(site_count)
    ]
    mps = Mps(tensors, site_count - 1)
    mps.move_center_to(0)
    mps.tensors[0] /= np.linalg.norm(mps.tensors[0])
    return mps
