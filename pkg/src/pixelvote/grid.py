"""Radial cell grids: voting-filter and query-filter lookup tables.

A square window of odd side ``M`` around a pixel is partitioned into
concentric square rings of square cells whose side grows outward, so
nearby offsets are resolved finely and distant ones coarsely.  The
resulting table maps every integer offset ``(dy, dx)`` inside the window
to one of ``K`` cell indices.  Used as a voting filter it discretizes the
offset from a pixel to a candidate centroid; its spatial inversion (the
query filter) discretizes the offset from a centroid to a surrounding
pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "CellTable",
    "build_grid",
    "invert_grid",
    "lookup",
    "scheme",
    "SCHEMES",
]


@dataclass(frozen=True)
class GridSpec:
    """Layout of a radial cell grid.

    ring_extents: odd side lengths of the nested ring squares, innermost
        first and strictly increasing; the last entry is the window side.
    ring_cell_sizes: odd cell side length for each ring.

    The innermost extent must be a multiple of its cell size, and for every
    outer ring both the annulus width ``(e_l - e_{l-1}) / 2`` and the inner
    extent ``e_{l-1}`` must be multiples of that ring's cell size so the
    annulus tiles exactly into whole cells.
    """

    ring_extents: tuple[int, ...]
    ring_cell_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ring_extents", tuple(int(e) for e in self.ring_extents))
        object.__setattr__(self, "ring_cell_sizes", tuple(int(s) for s in self.ring_cell_sizes))
        extents, sizes = self.ring_extents, self.ring_cell_sizes
        if not extents:
            raise ValueError("grid needs at least one ring")
        if len(extents) != len(sizes):
            raise ValueError(
                f"{len(extents)} ring extents but {len(sizes)} cell sizes; need one size per ring"
            )
        for ring, (extent, size) in enumerate(zip(extents, sizes)):
            if extent <= 0 or extent % 2 == 0:
                raise ValueError(f"ring {ring}: extent {extent} must be odd and positive")
            if size <= 0 or size % 2 == 0:
                raise ValueError(f"ring {ring}: cell size {size} must be odd and positive")
            if ring == 0:
                if extent % size != 0:
                    raise ValueError(
                        f"ring 0: extent {extent} is not divisible by cell size {size}"
                    )
                continue
            inner = extents[ring - 1]
            if extent <= inner:
                raise ValueError(
                    f"ring {ring}: extent {extent} must exceed inner extent {inner}"
                )
            width = (extent - inner) // 2
            if width % size != 0:
                raise ValueError(
                    f"ring {ring}: annulus width {width} is not divisible by cell size {size}"
                )
            if inner % size != 0:
                raise ValueError(
                    f"ring {ring}: inner extent {inner} is not aligned to cell size {size}"
                )

    @property
    def side(self) -> int:
        """Full window side length (the outermost extent)."""
        return self.ring_extents[-1]

    @property
    def reach(self) -> int:
        """Largest offset magnitude covered by the window."""
        return (self.side - 1) // 2

    @property
    def num_rings(self) -> int:
        return len(self.ring_extents)

    @property
    def num_cells(self) -> int:
        """Total cell count over all rings."""
        total = (self.ring_extents[0] // self.ring_cell_sizes[0]) ** 2
        for ring in range(1, self.num_rings):
            size = self.ring_cell_sizes[ring]
            outer = self.ring_extents[ring] // size
            inner = self.ring_extents[ring - 1] // size
            total += outer * outer - inner * inner
        return total


# Named layouts.  The 233-cell grid is the unique radial layout with side
# 243 and cell sizes drawn from {1, 3, 9, 27}; the 41-cell one adds one
# 3x3 shell of cells per ring instead.
SCHEMES: dict[str, GridSpec] = {
    "default": GridSpec((3, 27, 81, 243), (1, 3, 9, 27)),
    "simple": GridSpec((3, 9, 27, 81, 243), (1, 3, 9, 27, 81)),
    "uniform": GridSpec((225,), (15,)),
    "toy": GridSpec((3, 9), (1, 3)),
}


def scheme(name: str) -> GridSpec:
    """Look up a named grid layout."""
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown grid scheme {name!r}; choose from {sorted(SCHEMES)}") from None


@dataclass(frozen=True)
class CellTable:
    """Offset-to-cell lookup table over an ``side x side`` window.

    index_of_offset: (side, side) int array; entry ``[dy + reach, dx + reach]``
        is the cell index of offset ``(dy, dx)``.
    cell_center: (num_cells, 2) int array of each cell's center-pixel offset.
    cell_size: (num_cells,) int array of cell side lengths.
    cells_by_size: cell indices grouped by side length, for size-grouped
        scatter during vote aggregation.

    Tables are immutable after construction and safe to share across
    threads.
    """

    index_of_offset: np.ndarray
    cell_center: np.ndarray
    cell_size: np.ndarray
    cells_by_size: dict[int, np.ndarray]

    @property
    def side(self) -> int:
        return self.index_of_offset.shape[0]

    @property
    def reach(self) -> int:
        return (self.side - 1) // 2

    @property
    def num_cells(self) -> int:
        return self.cell_size.shape[0]

    @property
    def cell_origin(self) -> np.ndarray:
        """(num_cells, 2) top-left offset of each cell's block."""
        return self.cell_center - ((self.cell_size - 1) // 2)[:, None]

    def __post_init__(self) -> None:
        for arr in (self.index_of_offset, self.cell_center, self.cell_size):
            arr.flags.writeable = False
        for arr in self.cells_by_size.values():
            arr.flags.writeable = False


def build_grid(spec: GridSpec) -> CellTable:
    """Construct the voting-filter table for a grid layout.

    Cells are enumerated ring by ring from the center outward, row-major
    within each ring.  Every offset in the window belongs to exactly one
    cell, and each cell's entries form a contiguous square block.
    """
    side = spec.side
    reach = spec.reach
    index = np.full((side, side), -1, dtype=np.int32)
    centers: list[tuple[int, int]] = []
    sizes: list[int] = []

    inner = 0
    for extent, size in zip(spec.ring_extents, spec.ring_cell_sizes):
        n = extent // size
        m = inner // size  # cells per side occupied by the previous rings
        skip_lo = (n - m) // 2
        skip_hi = skip_lo + m
        lo = -(extent - 1) // 2
        half = (size - 1) // 2
        for i in range(n):
            for j in range(n):
                if skip_lo <= i < skip_hi and skip_lo <= j < skip_hi:
                    continue
                y0 = lo + i * size
                x0 = lo + j * size
                index[y0 + reach : y0 + reach + size, x0 + reach : x0 + reach + size] = len(sizes)
                centers.append((y0 + half, x0 + half))
                sizes.append(size)
        inner = extent

    assert len(sizes) == spec.num_cells
    assert index.min() >= 0

    size_arr = np.asarray(sizes, dtype=np.int32)
    groups = {
        int(s): np.flatnonzero(size_arr == s).astype(np.int32)
        for s in sorted(set(sizes))
    }
    return CellTable(
        index_of_offset=index,
        cell_center=np.asarray(centers, dtype=np.int32),
        cell_size=size_arr,
        cells_by_size=groups,
    )


def invert_grid(table: CellTable) -> CellTable:
    """Point-reflect a table about the window center.

    The result maps offset ``(dy, dx)`` to the cell the input maps
    ``(-dy, -dx)`` to; applying it twice returns the original table.
    """
    return CellTable(
        index_of_offset=np.ascontiguousarray(table.index_of_offset[::-1, ::-1]),
        cell_center=np.ascontiguousarray(-table.cell_center),
        cell_size=table.cell_size.copy(),
        cells_by_size={s: idx.copy() for s, idx in table.cells_by_size.items()},
    )


def lookup(table: CellTable, offset: tuple[int, int]) -> int | None:
    """Cell index for an integer offset, or None if outside the window."""
    dy, dx = offset
    reach = table.reach
    if abs(dy) > reach or abs(dx) > reach:
        return None
    return int(table.index_of_offset[dy + reach, dx + reach])
