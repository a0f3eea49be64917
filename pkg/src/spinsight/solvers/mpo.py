"""Matrix-product operators built from term lists by a finite-state automaton.

Every bond carries an "initial" channel (nothing applied yet), a "final"
channel (term completed), and one pending channel per two-site term that
straddles the bond.  Arbitrary interaction ranges come out naturally, which
is what the periodic wrap bond and snake-ordered 2D terms need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SpinsightError
from ..models import ID2, SX, SY_I, SY_MI, SZ, TermList

# first/second operator of a two-site pair; the y pair uses the real
# matrices (i S^y), (-i S^y) whose product equals S^y x S^y
_FIRST = {"x": SX, "y": SY_I, "z": SZ}
_SECOND = {"x": SX, "y": SY_MI, "z": SZ}
_SINGLE = {"x": SX, "z": SZ}


@dataclass(frozen=True)
class Mpo:
    """Rank-4 site tensors (left bond, phys out, phys in, right bond)."""

    tensors: tuple[np.ndarray, ...]

    @property
    def site_count(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[3] for t in self.tensors[:-1]]


def build_mpo(terms: TermList, site_count: int | None = None) -> Mpo:
    """Encode a TermList as an MPO whose contraction is the dense Hamiltonian."""
    n = terms.site_count if site_count is None else site_count
    if any(j >= n for _, j, *_ in terms.two_site) or any(
        k >= n for k, *_ in terms.one_site
    ):
        raise SpinsightError("term site index beyond site_count")

    def channels(bond):
        # two-site terms still pending while crossing this bond
        return [
            t for t, (i, j, *_ ) in enumerate(terms.two_site) if i < bond <= j
        ]

    def states(bond):
        if bond == 0:
            return {"init": 0}
        if bond == n:
            return {"final": 0}
        idx = {"init": 0}
        for t in channels(bond):
            idx[t] = len(idx)
        idx["final"] = len(idx)
        return idx

    tensors = []
    for s in range(n):
        left, right = states(s), states(s + 1)
        w = np.zeros((len(left), 2, 2, len(right)))
        if "init" in left and "init" in right:
            w[left["init"], :, :, right["init"]] = ID2
        if "final" in left and "final" in right:
            w[left["final"], :, :, right["final"]] = ID2
        for k, op, c in terms.one_site:
            if k == s:
                w[left["init"], :, :, right["final"]] += c * _SINGLE[op]
        for t, (i, j, op_i, op_j, c) in enumerate(terms.two_site):
            if i == s:
                w[left["init"], :, :, right[t]] += c * _FIRST[op_i]
            elif i < s < j:
                w[left[t], :, :, right[t]] += ID2
            elif j == s:
                w[left[t], :, :, right["final"]] += _SECOND[op_j]
        tensors.append(w)
    return Mpo(tuple(tensors))


def mpo_to_dense(mpo: Mpo) -> np.ndarray:
    """Full 2^L x 2^L contraction (oracle checks; L <= 12)."""
    if mpo.site_count > 12:
        raise SpinsightError("dense MPO contraction capped at 12 sites")
    acc = mpo.tensors[0][0]  # (out, in, bond)
    for w in mpo.tensors[1:]:
        acc = np.einsum("abk,kcdm->acbdm", acc, w)
        d_out = acc.shape[0] * acc.shape[1]
        d_in = acc.shape[2] * acc.shape[3]
        acc = acc.reshape(d_out, d_in, acc.shape[4])
    return acc[:, :, 0]
