"""Lattice geometries: 1D chains/rings and 2D grids in snake (boustrophedon) order.

Grid sites are always addressed by their snake-order chain position, so every
downstream consumer (Hamiltonian builder, MPO, DMRG) sees a 1D chain whose 2D
edges have become long-range bonds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LatticeError


def snake_order(rows: int, cols: int) -> dict[tuple[int, int], int]:
    """Map grid coordinates (row, col) to chain positions, column by column.

    Even columns run top to bottom, odd columns bottom to top, so consecutive
    chain positions are always nearest neighbours on the grid.
    """
    if rows < 1 or cols < 1:
        raise LatticeError(f"grid extents must be >= 1, got {rows}x{cols}")
    order = {}
    for c in range(cols):
        for r in range(rows):
            rr = r if c % 2 == 0 else rows - 1 - r
            order[(rr, c)] = c * rows + r
    return order


@dataclass(frozen=True)
class Lattice:
    """A chain or grid with open or periodic boundaries.

    ``site_count`` equals L for chains and rows*cols for grids.  Grid sites
    are identified with their snake-order chain position.
    """

    kind: str                      # "chain" | "grid"
    extent: tuple[int, ...]        # (L,) or (rows, cols)
    boundary: str                  # "periodic" | "open"

    def __post_init__(self):
        if self.kind not in ("chain", "grid"):
            raise LatticeError(f"unknown lattice kind {self.kind!r}")
        if self.boundary not in ("periodic", "open"):
            raise LatticeError(f"unknown boundary {self.boundary!r}")
        if any(e < 1 for e in self.extent):
            raise LatticeError(f"extents must be positive, got {self.extent}")
        if self.kind == "chain" and len(self.extent) != 1:
            raise LatticeError("chain takes a single extent L")
        if self.kind == "grid" and len(self.extent) != 2:
            raise LatticeError("grid takes extents (rows, cols)")
        if self.boundary == "periodic" and any(e < 3 for e in self.extent):
            # wrapping an extent of 2 would double every edge
            raise LatticeError(
                f"periodic extent must be >= 3, got {self.extent}"
            )

    @classmethod
    def chain(cls, length: int, periodic: bool = True) -> "Lattice":
        return cls("chain", (length,), "periodic" if periodic else "open")

    @classmethod
    def grid(cls, rows: int, cols: int, periodic: bool = True) -> "Lattice":
        return cls("grid", (rows, cols), "periodic" if periodic else "open")

    @property
    def site_count(self) -> int:
        n = 1
        for e in self.extent:
            n *= e
        return n


def enumerate_edges(lattice: Lattice) -> list[tuple[int, int]]:
    """Nearest-neighbour edges as (min, max) chain-position pairs, sorted.

    Each unordered pair appears exactly once: a periodic chain of length L has
    L edges, a periodic rows x cols grid has 2*rows*cols.
    """
    periodic = lattice.boundary == "periodic"
    edges = set()
    if lattice.kind == "chain":
        (length,) = lattice.extent
        for i in range(length - 1):
            edges.add((i, i + 1))
        if periodic and length > 2:
            edges.add((0, length - 1))
    else:
        rows, cols = lattice.extent
        order = snake_order(rows, cols)

        def add(a, b):
            i, j = order[a], order[b]
            edges.add((min(i, j), max(i, j)))

        for r in range(rows):
            for c in range(cols):
                if r + 1 < rows:
                    add((r, c), (r + 1, c))
                elif periodic:
                    add((r, c), (0, c))
                if c + 1 < cols:
                    add((r, c), (r, c + 1))
                elif periodic:
                    add((r, c), (r, 0))
    return sorted(edges)
