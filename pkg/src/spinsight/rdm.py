"""Reduced density matrices, their purification, and sign-gauge fixing.

The purification writes rho_{ii'} as the amplitude of a 2*L_b-site
configuration.  With the default interleaved bit ordering (i1 i'1 i2 i'2 ...)
the downstream Qubism image is literally the matrix rho laid out as a
2^L_b x 2^L_b heatmap, rows indexed by i and columns by i'.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpinsightError
from .lattice import Lattice
from .solvers.mps import Mps
from .states import DenseState, PurifiedState

ORDERINGS = ("interleaved", "concatenated")


@dataclass(frozen=True)
class SubsystemSpec:
    """Ordered chain positions kept by the partial trace."""

    sites: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.sites)) != len(self.sites):
            raise SpinsightError(f"duplicate subsystem sites {self.sites}")
        if any(s < 0 for s in self.sites):
            raise SpinsightError("negative site index")

    @property
    def size(self) -> int:
        return len(self.sites)

    @property
    def contiguous(self) -> bool:
        lo = min(self.sites)
        return sorted(self.sites) == list(range(lo, lo + len(self.sites)))


def middle_block(lattice: Lattice, block_size: int) -> SubsystemSpec:
    """The centered L_b-site block: middle of a chain, or the central
    block_size/rows columns of a snake-ordered grid."""
    n = lattice.site_count
    if not 0 < block_size <= n:
        raise SpinsightError(f"block size {block_size} out of range for {n} sites")
    if lattice.kind == "chain":
        start = n // 2 - block_size // 2
    else:
        rows, cols = lattice.extent
        if block_size % rows != 0:
            raise SpinsightError(
                f"grid subsystem must cover whole columns: {block_size} sites "
                f"on {rows} rows"
            )
        ncols = block_size // rows
        start = (cols // 2 - ncols // 2) * rows
    return SubsystemSpec(tuple(range(start, start + block_size)))


@dataclass(frozen=True)
class Rdm:
    """Real symmetric density matrix of an L_b-site block."""

    size: int
    matrix: np.ndarray

    def __post_init__(self):
        d = 1 << self.size
        if self.matrix.shape != (d, d):
            raise SpinsightError(
                f"rdm shape {self.matrix.shape} != ({d}, {d}) for L_b={self.size}"
            )
        tr = float(np.trace(self.matrix))
        if abs(tr - 1.0) > 1e-10:
            raise SpinsightError(f"rdm trace {tr} != 1")
        if np.abs(self.matrix - self.matrix.T).max() > 1e-12:
            raise SpinsightError("rdm not symmetric")
        if float(np.linalg.eigvalsh(self.matrix)[0]) < -1e-10:
            raise SpinsightError("rdm has a negative eigenvalue")

    @property
    def purity(self) -> float:
        return float(np.sum(self.matrix * self.matrix))


def rdm_dense(state: DenseState, sub: SubsystemSpec) -> Rdm:
    """Trace out the complement of ``sub`` from a dense state."""
    n = state.site_count
    if any(s >= n for s in sub.sites):
        raise SpinsightError(f"subsystem {sub.sites} out of range for {n} sites")
    kept = list(sub.sites)
    rest = [s for s in range(n) if s not in set(kept)]
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.transpose(psi, kept + rest)
    m = psi.reshape(1 << len(kept), -1)
    return Rdm(len(kept), m @ m.T)


def rdm_mps(mps: Mps, sub: SubsystemSpec) -> Rdm:
    """RDM of a contiguous block from the MPS environment contraction."""
    if not sub.contiguous:
        raise SpinsightError("MPS extraction needs a contiguous block")
    lo = min(sub.sites)
    hi = max(sub.sites)
    if hi >= mps.site_count:
        raise SpinsightError(
            f"subsystem {sub.sites} out of range for {mps.site_count} sites"
        )
    work = mps.copy()
    work.move_center_to(lo)
    block = work.tensors[lo]
    for s in range(lo + 1, hi + 1):
        block = np.tensordot(block, work.tensors[s], axes=(2, 0))
        block = block.reshape(block.shape[0], -1, block.shape[3])
    rho = np.einsum("apb,aqb->pq", block, block)
    rho = 0.5 * (rho + rho.T)  # symmetrize away contraction roundoff
    return Rdm(sub.size, rho)


def purify(rdm: Rdm, ordering: str = "interleaved") -> PurifiedState:
    """|rho> = sum_{ii'} rho_{ii'} |i i'> on 2*L_b sites, not renormalized."""
    if ordering not in ORDERINGS:
        raise SpinsightError(f"unknown purification ordering {ordering!r}")
    if np.all(rdm.matrix == 0.0):
        raise SpinsightError("cannot purify the zero matrix")
    n = 2 * rdm.size
    if ordering == "concatenated":
        amps = rdm.matrix.reshape(-1).copy()
    else:
        from .qubism import _deinterleave

        rows, cols = _deinterleave(n)
        amps = rdm.matrix[rows, cols]
    return PurifiedState(n, amps)


def gauge_fix(state: DenseState) -> DenseState:
    """Flip the global sign so the largest-magnitude amplitude is positive.

    Ties resolve to the lowest configuration index; the operation is
    idempotent and maps psi and -psi to the same representative.
    """
    amps = state.amplitudes
    k = int(np.argmax(np.abs(amps)))
    if amps[k] < 0:
        return DenseState(state.site_count, -amps)
    return state
