"""Ground-state solvers: Lanczos exact diagonalization and two-site DMRG."""

from .lanczos import LanczosOptions, lanczos_ground, ed_ground
from .mps import Mps, mps_to_dense, mps_from_dense, random_mps
from .mpo import Mpo, build_mpo, mpo_to_dense
from .dmrg import DmrgOptions, DmrgResult, dmrg_ground

__all__ = [
    "LanczosOptions",
    "lanczos_ground",
    "ed_ground",
    "Mps",
    "mps_to_dense",
    "mps_from_dense",
    "random_mps",
    "Mpo",
    "build_mpo",
    "mpo_to_dense",
    "DmrgOptions",
    "DmrgResult",
    "dmrg_ground",
]
