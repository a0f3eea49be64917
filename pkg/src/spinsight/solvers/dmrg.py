"""Two-site DMRG ground-state search over an MPO.

Sweeps optimize neighbouring tensor pairs with a few Lanczos steps on the
effective Hamiltonian, truncate by SVD to chi_max, and stop when the energy
change between full sweeps falls below tolerance.  Periodic chains enter as
open-boundary MPS whose wrap bond lives inside the MPO.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lanczos import lanczos_lowest
from .mpo import Mpo
from .mps import Mps, random_mps


@dataclass(frozen=True)
class DmrgOptions:
    chi_max: int = 64
    max_sweeps: int = 20
    energy_tolerance: float = 1e-9
    seed: int = 0
    init_bond: int = 8
    local_iterations: int = 60

    def __post_init__(self):
        if self.chi_max < 2:
            raise ValueError("chi_max must be >= 2")
        if self.energy_tolerance <= 0:
            raise ValueError("energy_tolerance must be positive")


@dataclass
class DmrgResult:
    energy: float
    state: Mps
    converged: bool
    half_sweep_energies: list[float]


def _grow_left(env, a, w):
    # env (ket, mpo, bra); a is the site tensor on both layers (real MPS)
    tmp = np.tensordot(env, a, axes=(0, 0))          # (mpo, bra, p, ket')
    tmp = np.tensordot(tmp, w, axes=((0, 2), (0, 2)))  # (bra, ket', po, mpo')
    return np.tensordot(tmp, a, axes=((0, 2), (0, 1)))  # (ket', mpo', bra')


def _grow_right(env, a, w):
    tmp = np.tensordot(a, env, axes=(2, 0))          # (ket', p, mpo, bra)
    tmp = np.tensordot(tmp, w, axes=((2, 1), (3, 2)))  # (ket', bra, mpo', po)
    return np.tensordot(tmp, a, axes=((1, 3), (2, 1)))  # (ket', mpo', bra')


def _apply_block(env_l, w1, w2, env_r, block):
    tmp = np.tensordot(env_l, block, axes=(0, 0))      # (mpo, bra, p1, p2, ket_r)
    tmp = np.tensordot(tmp, w1, axes=((0, 2), (0, 2)))  # (bra, p2, ket_r, po1, mpo')
    tmp = np.tensordot(tmp, w2, axes=((4, 1), (0, 2)))  # (bra, ket_r, po1, po2, mpo'')
    return np.tensordot(tmp, env_r, axes=((1, 4), (0, 1)))  # (bra, po1, po2, bra_r)


def _block_energy(env_l, w, env_r, a):
    ha = np.tensordot(env_l, a, axes=(0, 0))           # (mpo, bra, p, ket_r)
    ha = np.tensordot(ha, w, axes=((0, 2), (0, 2)))    # (bra, ket_r, po, mpo')
    ha = np.tensordot(ha, env_r, axes=((1, 3), (0, 1)))  # (bra, po, bra_r)
    return float(np.tensordot(ha, a, axes=((0, 1, 2), (0, 1, 2))))


def dmrg_ground(mpo: Mpo, opts: DmrgOptions = DmrgOptions()) -> DmrgResult:
    n = mpo.site_count
    rng = np.random.default_rng(opts.seed)
    mps = random_mps(n, min(opts.chi_max, opts.init_bond), rng)

    trivial = np.ones((1, 1, 1))
    right_env = [None] * (n + 1)
    right_env[n] = trivial
    for s in range(n - 1, 0, -1):
        right_env[s] = _grow_right(right_env[s + 1], mps.tensors[s], mpo.tensors[s])
    left_env = [None] * (n + 1)
    left_env[0] = trivial

    def optimize(s, to_right):
        block = np.tensordot(mps.tensors[s], mps.tensors[s + 1], axes=(2, 0))
        dl, _, _, dr = block.shape
        shape = block.shape

        def apply_h(v):
            return _apply_block(
                left_env[s], mpo.tensors[s], mpo.tensors[s + 1],
                right_env[s + 2], v.reshape(shape),
            ).ravel()

        _, vec, _ = lanczos_lowest(
            apply_h, block.ravel(),
            max_iterations=opts.local_iterations,
            tolerance=1e-12, krylov_dim=min(30, block.size),
            strict=False,
        )
        m = vec.reshape(dl * 2, 2 * dr)
        u, sing, vt = np.linalg.svd(m, full_matrices=False)
        keep = min(opts.chi_max, int(np.sum(sing > sing[0] * 1e-14)) or 1)
        u, sing, vt = u[:, :keep], sing[:keep], vt[:keep]
        sing = sing / np.linalg.norm(sing)
        if to_right:
            mps.tensors[s] = u.reshape(dl, 2, keep)
            mps.tensors[s + 1] = (sing[:, None] * vt).reshape(keep, 2, dr)
            mps.center = s + 1
            left_env[s + 1] = _grow_left(left_env[s], mps.tensors[s], mpo.tensors[s])
        else:
            mps.tensors[s + 1] = vt.reshape(keep, 2, dr)
            mps.tensors[s] = (u * sing).reshape(dl, 2, keep)
            mps.center = s
            right_env[s + 1] = _grow_right(
                right_env[s + 2], mps.tensors[s + 1], mpo.tensors[s + 1]
            )

    half_energies = []
    previous = np.inf
    converged = False
    for _ in range(opts.max_sweeps):
        for s in range(n - 1):
            optimize(s, to_right=True)
        half_energies.append(
            _block_energy(left_env[n - 1], mpo.tensors[n - 1], right_env[n],
                          mps.tensors[n - 1])
        )
        for s in range(n - 2, -1, -1):
            optimize(s, to_right=False)
        half_energies.append(
            _block_energy(left_env[0], mpo.tensors[0], right_env[1],
                          mps.tensors[0])
        )
        energy = half_energies[-1]
        if abs(previous - energy) < opts.energy_tolerance:
            converged = True
            break
        previous = energy
    return DmrgResult(half_energies[-1], mps, converged, half_energies)
