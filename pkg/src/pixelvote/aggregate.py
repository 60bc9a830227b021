"""Vote aggregation: per-pixel cell probabilities into a heatmap.

Each pixel's probability for cell ``k`` is transferred to the cell's
footprint placed relative to that pixel and shared evenly among the
footprint's pixels.  The fast path groups cells by size and does one
shifted scatter per cell followed by a box sum per size group, mirroring
the dilated-deconvolution + average-pooling decomposition; the brute-force
path enumerates every (pixel, cell, target) triple and serves as the
reference oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CellTable

__all__ = ["VoteTensor", "aggregate_votes", "brute_force_aggregate"]


@dataclass
class VoteTensor:
    """Per-pixel distribution over K cells plus an abstention channel.

    probs: (H, W, K + 1) nonnegative array; the last channel is abstention.
    ignore: optional (H, W) bool mask of pixels excluded from aggregation.

    Non-ignored pixels must sum to 1 across channels (within 1e-5); call
    :meth:`validate` to enforce.
    """

    probs: np.ndarray
    ignore: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape[:2]  # type: ignore[return-value]

    @property
    def num_channels(self) -> int:
        return self.probs.shape[2]

    def validate(self, tol: float = 1e-5) -> None:
        if self.probs.ndim != 3:
            raise ValueError(f"vote tensor must be (H, W, K+1), got shape {self.probs.shape}")
        if not np.isfinite(self.probs).all():
            raise ValueError("vote tensor contains non-finite values")
        if self.probs.min() < 0:
            raise ValueError("vote tensor contains negative probabilities")
        sums = self.probs.sum(axis=2)
        if self.ignore is not None:
            if self.ignore.shape != self.shape:
                raise ValueError(
                    f"ignore mask shape {self.ignore.shape} does not match image {self.shape}"
                )
            sums = sums[~self.ignore]
        if sums.size and (np.abs(sums - 1.0) > tol).any():
            worst = float(np.abs(sums - 1.0).max())
            raise ValueError(f"per-pixel probabilities must sum to 1 (worst deviation {worst:g})")


def _effective_probs(votes: VoteTensor, table: CellTable) -> np.ndarray:
    if votes.probs.ndim != 3:
        raise ValueError(f"vote tensor must be (H, W, K+1), got shape {votes.probs.shape}")
    if votes.num_channels != table.num_cells + 1:
        raise ValueError(
            f"vote tensor has {votes.num_channels} channels but the grid needs "
            f"{table.num_cells + 1} (cells + abstention)"
        )
    probs = np.asarray(votes.probs, dtype=np.float64)
    if votes.ignore is not None:
        if votes.ignore.shape != votes.shape:
            raise ValueError(
                f"ignore mask shape {votes.ignore.shape} does not match image {votes.shape}"
            )
        probs = np.where(votes.ignore[:, :, None], 0.0, probs)
    return probs


def aggregate_votes(votes: VoteTensor, table: CellTable) -> np.ndarray:
    """Accumulate cell votes into an (H, W) float64 heatmap.

    Abstention contributes nothing; vote mass falling outside the image is
    dropped.  Matches :func:`brute_force_aggregate` to within 1e-6.
    """
    probs = _effective_probs(votes, table)
    height, width = probs.shape[:2]
    reach = table.reach
    pad_h, pad_w = height + 2 * reach, width + 2 * reach
    heat = np.zeros((height, width), dtype=np.float64)

    for size, cells in table.cells_by_size.items():
        centers = table.cell_center[cells]
        center_map = np.zeros((pad_h, pad_w), dtype=np.float64)
        for (dy, dx), k in zip(centers.tolist(), cells.tolist()):
            center_map[reach + dy : reach + dy + height, reach + dx : reach + dx + width] += probs[:, :, k]
        if size > 1:
            half = (size - 1) // 2
            # Separable box sum: spreading each center value over its s x s
            # block equals summing centers over the window around each target.
            rows = np.zeros_like(center_map)
            for d in range(-half, half + 1):
                rows[max(0, -d) : pad_h - max(0, d), :] += center_map[max(0, d) : pad_h - max(0, -d), :]
            summed = np.zeros_like(center_map)
            for d in range(-half, half + 1):
                summed[:, max(0, -d) : pad_w - max(0, d)] += rows[:, max(0, d) : pad_w - max(0, -d)]
            heat += summed[reach : reach + height, reach : reach + width] / (size * size)
        else:
            heat += center_map[reach : reach + height, reach : reach + width]
    return heat


def brute_force_aggregate(votes: VoteTensor, table: CellTable) -> np.ndarray:
    """Reference aggregation by direct per-pixel, per-cell, per-target loops."""
    probs = _effective_probs(votes, table)
    height, width = probs.shape[:2]
    num_cells = table.num_cells
    origin = table.cell_origin
    sizes = table.cell_size
    heat = np.zeros((height, width), dtype=np.float64)

    for r in range(height):
        for c in range(width):
            pixel = probs[r, c]
            for k in np.flatnonzero(pixel[:num_cells]).tolist():
                share = pixel[k] / float(sizes[k]) ** 2
                y0 = r + int(origin[k, 0])
                x0 = c + int(origin[k, 1])
                y1 = y0 + int(sizes[k])
                x1 = x0 + int(sizes[k])
                yc0, yc1 = max(y0, 0), min(y1, height)
                xc0, xc1 = max(x0, 0), min(x1, width)
                if yc0 < yc1 and xc0 < xc1:
                    heat[yc0:yc1, xc0:xc1] += share
    return heat
