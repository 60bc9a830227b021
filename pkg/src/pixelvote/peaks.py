"""Peak-region extraction: above-threshold connected components of a heatmap.

Each connected component of pixels whose vote count strictly exceeds the
threshold is one instance hypothesis.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

__all__ = ["PeakRegion", "find_peaks"]

_NEIGHBORS_4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
_NEIGHBORS_8 = _NEIGHBORS_4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass
class PeakRegion:
    """One connected above-threshold component of the heatmap.

    rows/cols: pixel coordinates in row-major order.
    total_vote: sum of heatmap values over the region.
    bbox_center: center of the enclosing bounding box (real-valued).
    """

    rows: np.ndarray
    cols: np.ndarray
    total_vote: float
    bbox_center: tuple[float, float]

    @property
    def pixel_count(self) -> int:
        return int(self.rows.shape[0])

    def pixel_set(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))


def find_peaks(heatmap: np.ndarray, threshold: float, connectivity: int = 8) -> list[PeakRegion]:
    """Maximal connected components of ``heatmap > threshold``.

    Regions are returned sorted by their (min row, min col).  Connectivity
    is 8 by default (diagonal neighbors merge); pass 4 for edge-adjacency
    only.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    neighbors = _NEIGHBORS_4 if connectivity == 4 else _NEIGHBORS_8

    mask = heatmap > threshold
    height, width = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    regions: list[PeakRegion] = []

    for start_r, start_c in zip(*np.nonzero(mask)):
        if seen[start_r, start_c]:
            continue
        queue = deque([(int(start_r), int(start_c))])
        seen[start_r, start_c] = True
        component: list[tuple[int, int]] = []
        while queue:
            r, c = queue.popleft()
            component.append((r, c))
            for dr, dc in neighbors:
                nr, nc = r + dr, c + dc
                if 0 <= nr < height and 0 <= nc < width and mask[nr, nc] and not seen[nr, nc]:
                    seen[nr, nc] = True
                    queue.append((nr, nc))
        component.sort()
        rows = np.asarray([p[0] for p in component], dtype=np.int32)
        cols = np.asarray([p[1] for p in component], dtype=np.int32)
        center = (
            (float(rows.min()) + float(rows.max())) / 2.0,
            (float(cols.min()) + float(cols.max())) / 2.0,
        )
        regions.append(
            PeakRegion(
                rows=rows,
                cols=cols,
                total_vote=float(heatmap[rows, cols].sum()),
                bbox_center=center,
            )
        )

    regions.sort(key=lambda region: (int(region.rows.min()), int(region.cols.min())))
    return regions
