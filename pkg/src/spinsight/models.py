"""Spin-1/2 Hamiltonians as term lists, with a matrix-free H|v> operation.

Conventions, fixed once and used everywhere:

* spin operators are S = sigma/2, so the transverse-field Ising chain with
  J = 1 is critical at h = 0.5;
* basis states are configuration integers where site 0 is the most
  significant bit and bit value 0 means spin up;
* the Y.Y exchange pair is applied as the real matrix (i S^y) x (-i S^y),
  which keeps every amplitude real.  A lone S^y never appears in any model
  family here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpinsightError
from .lattice import Lattice, enumerate_edges

# 2x2 operator blocks in the (up, down) basis
SX = np.array([[0.0, 0.5], [0.5, 0.0]])
SZ = np.array([[0.5, 0.0], [0.0, -0.5]])
# i*S^y and -i*S^y: the real pair whose product equals S^y x S^y
SY_I = np.array([[0.0, 0.5], [-0.5, 0.0]])
SY_MI = np.array([[0.0, -0.5], [0.5, 0.0]])
ID2 = np.eye(2)

FAMILIES = ("qim", "xxz", "xy")


@dataclass(frozen=True)
class ModelSpec:
    """One spin model: family, lattice, and the single swept parameter.

    ``param`` is the transverse field h for QIM, the longitudinal field h for
    XY, and the coupling J_z for XXZ.  The exchange scale J is pinned to 1.
    """

    family: str
    lattice: Lattice
    param: float
    coupling: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpinsightError(f"unknown model family {self.family!r}")
        if self.coupling != 1.0:
            raise SpinsightError("the exchange coupling J is the energy scale and must be 1")
        if not np.isfinite(self.param):
            raise SpinsightError(f"parameter must be finite, got {self.param}")

    @property
    def param_name(self) -> str:
        return "Jz" if self.family == "xxz" else "h"


@dataclass(frozen=True)
class TermList:
    """Hamiltonian as explicit one- and two-site operator terms.

    ``two_site`` rows are (i, j, op_i, op_j, coeff) with i < j chain
    positions and ops in {"x", "y", "z"}; ``one_site`` rows are
    (k, op, coeff).
    """

    site_count: int
    two_site: tuple[tuple[int, int, str, str, float], ...] = ()
    one_site: tuple[tuple[int, str, float], ...] = ()

    def __post_init__(self):
        for i, j, a, b, _ in self.two_site:
            if not (0 <= i < j < self.site_count):
                raise SpinsightError(f"two-site term ({i},{j}) out of range")
            if a not in "xyz" or b not in "xyz":
                raise SpinsightError(f"unknown operator pair ({a},{b})")
        for k, a, _ in self.one_site:
            if not 0 <= k < self.site_count:
                raise SpinsightError(f"one-site term at {k} out of range")
            if a not in "xz":
                raise SpinsightError(f"unsupported one-site operator {a!r}")


def build_terms(spec: ModelSpec) -> TermList:
    """Expand a ModelSpec into its term list over the lattice edges."""
    edges = enumerate_edges(spec.lattice)
    n = spec.lattice.site_count
    J, p = spec.coupling, spec.param
    two, one = [], []
    if spec.family == "qim":
        two = [(i, j, "z", "z", J) for i, j in edges]
        one = [(k, "x", -p) for k in range(n)]
    elif spec.family == "xxz":
        for i, j in edges:
            two.append((i, j, "x", "x", J))
            two.append((i, j, "y", "y", J))
            if p != 0.0:
                two.append((i, j, "z", "z", p))
    elif spec.family == "xy":
        for i, j in edges:
            two.append((i, j, "x", "x", J))
            two.append((i, j, "y", "y", J))
        one = [(k, "z", p) for k in range(n)]
    return TermList(n, tuple(two), tuple(one))


class HamiltonianApplier:
    """Matrix-free H|v> over amplitude vectors of dimension 2^site_count.

    Precomputes one diagonal for all z/zz terms and one (mask, weight) pair
    per off-diagonal term; ``__call__`` is pure and thread-safe.
    """

    def __init__(self, terms: TermList):
        self.site_count = terms.site_count
        self.dim = 1 << terms.site_count
        idx = np.arange(self.dim, dtype=np.int64)
        # sz eigenvalue per site: +1/2 for bit 0 (up), -1/2 for bit 1
        shift = lambda k: terms.site_count - 1 - k
        sz = lambda k: 0.5 - ((idx >> shift(k)) & 1).astype(np.float64)

        diag = np.zeros(self.dim)
        flips = []  # (xor mask, weight vector or scalar)
        for i, j, a, b, c in terms.two_site:
            pair = a + b
            if pair == "zz":
                diag += c * sz(i) * sz(j)
            elif pair == "xx":
                mask = (1 << shift(i)) | (1 << shift(j))
                flips.append((mask, 0.25 * c))
            elif pair == "yy":
                mask = (1 << shift(i)) | (1 << shift(j))
                bi = (idx >> shift(i)) & 1
                bj = (idx >> shift(j)) & 1
                sign = np.where(bi == bj, -0.25, 0.25) * c
                flips.append((mask, sign))
            else:
                raise SpinsightError(f"unsupported two-site pair {pair!r}")
        for k, a, c in terms.one_site:
            if a == "z":
                diag += c * sz(k)
            else:  # x
                flips.append((1 << shift(k), 0.5 * c))

        self._diag = diag
        self._flips = [(idx ^ mask, w) for mask, w in flips]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.dim,):
            raise SpinsightError(
                f"vector has shape {v.shape}, expected ({self.dim},)"
            )
        out = self._diag * v
        for perm, w in self._flips:
            out += (w * v)[perm]
        return out


def apply_hamiltonian(terms: TermList, v: np.ndarray) -> np.ndarray:
    """One-shot H|v>; build a HamiltonianApplier for repeated products."""
    return HamiltonianApplier(terms)(v)
