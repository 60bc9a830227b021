"""Backprojection: collect the pixels whose top votes land in a peak region.

A pixel is claimed by a peak region if any of the pixel's top-ranked vote
cells, placed around the pixel, contains at least one pixel of the region.
Contested pixels go to the claiming peak with the highest total vote; when
several claiming peaks sit inside the same cell relative to the pixel,
the one whose bounding-box center is nearest wins that cell first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aggregate import VoteTensor
from .grid import CellTable
from .peaks import PeakRegion

__all__ = ["TopVotes", "InstanceMask", "top_votes", "backproject", "claim_masks"]


@dataclass
class TopVotes:
    """Per-pixel top-ranked non-abstention cell indices.

    indices: (H, W, depth) int array sorted by descending probability;
        -1 pads unused slots.  Cells with zero probability never occupy a
        slot, and abstention never appears.
    abstaining: (H, W) bool; True where abstention is the argmax channel
        (or the pixel is flagged ignore).  Such pixels vote for nothing.
    """

    indices: np.ndarray
    abstaining: np.ndarray

    @property
    def depth(self) -> int:
        return self.indices.shape[2]


@dataclass
class InstanceMask:
    """Category-agnostic pixel set backprojected from one peak region."""

    rows: np.ndarray
    cols: np.ndarray
    peak_index: int
    peak: PeakRegion

    @property
    def pixel_count(self) -> int:
        return int(self.rows.shape[0])

    def pixel_set(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))


def top_votes(votes: VoteTensor, depth: int = 3) -> TopVotes:
    """Rank each pixel's cell votes and keep the strongest ``depth`` of them."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    probs = np.asarray(votes.probs)
    height, width, channels = probs.shape
    num_cells = channels - 1

    abstaining = probs.argmax(axis=2) == num_cells
    if votes.ignore is not None:
        abstaining = abstaining | votes.ignore

    cells = probs[:, :, :num_cells]
    take = min(depth, num_cells)
    # Stable sort on negated probabilities: ties resolve to the lower index.
    order = np.argsort(-cells, axis=2, kind="stable")[:, :, :take]
    ranked = np.take_along_axis(cells, order, axis=2)
    indices = np.where(ranked > 0, order, -1).astype(np.int32)
    if take < depth:
        pad = np.full((height, width, depth - take), -1, dtype=np.int32)
        indices = np.concatenate([indices, pad], axis=2)
    indices[abstaining] = -1
    return TopVotes(indices=indices, abstaining=abstaining)


def _voting_block_bounds(query_filter: CellTable) -> tuple[np.ndarray, ...]:
    # Per-cell offset range of the voting filter's block, recovered by
    # point-reflecting the query filter.
    half = (query_filter.cell_size - 1) // 2
    cy = query_filter.cell_center[:, 0]
    cx = query_filter.cell_center[:, 1]
    return -cy - half, -cy + half, -cx - half, -cx + half


def _claim_slots(
    peaks: list[PeakRegion],
    top: TopVotes,
    query_filter: CellTable,
    shape: tuple[int, int],
) -> np.ndarray:
    """(n_peaks, depth, H, W) bool: peak i claims pixel p through slot t."""
    height, width = shape
    depth = top.depth
    claims = np.zeros((len(peaks), depth, height, width), dtype=bool)
    if not peaks:
        return claims

    y_lo, y_hi, x_lo, x_hi = _voting_block_bounds(query_filter)
    rows = np.arange(height, dtype=np.int64)[:, None]
    cols = np.arange(width, dtype=np.int64)[None, :]

    integrals = []
    for region in peaks:
        occupancy = np.zeros((height, width), dtype=np.int64)
        occupancy[region.rows, region.cols] = 1
        table = np.zeros((height + 1, width + 1), dtype=np.int64)
        table[1:, 1:] = occupancy.cumsum(axis=0).cumsum(axis=1)
        integrals.append(table)

    for t in range(depth):
        cell = top.indices[:, :, t].astype(np.int64)
        valid = cell >= 0
        safe = np.where(valid, cell, 0)
        y0 = np.maximum(rows + y_lo[safe], 0)
        y1 = np.minimum(rows + y_hi[safe], height - 1)
        x0 = np.maximum(cols + x_lo[safe], 0)
        x1 = np.minimum(cols + x_hi[safe], width - 1)
        inside = valid & (y0 <= y1) & (x0 <= x1)
        y0 = np.where(inside, y0, 0)
        y1 = np.where(inside, y1, 0)
        x0 = np.where(inside, x0, 0)
        x1 = np.where(inside, x1, 0)
        for i, table in enumerate(integrals):
            overlap = (
                table[y1 + 1, x1 + 1]
                - table[y0, x1 + 1]
                - table[y1 + 1, x0]
                + table[y0, x0]
            )
            claims[i, t] = inside & (overlap > 0)
    return claims


def claim_masks(
    peaks: list[PeakRegion],
    top: TopVotes,
    query_filter: CellTable,
    shape: tuple[int, int],
) -> np.ndarray:
    """(n_peaks, H, W) bool claim maps before conflict resolution."""
    return _claim_slots(peaks, top, query_filter, shape).any(axis=1)


def backproject(
    peaks: list[PeakRegion],
    top: TopVotes,
    query_filter: CellTable,
    heatmap: np.ndarray,
) -> list[InstanceMask]:
    """Resolve claims into one disjoint instance mask per peak region.

    ``query_filter`` must be the inversion of the voting filter the votes
    were ranked under.  Returns one (possibly empty) mask per peak, in peak
    order.
    """
    height, width = heatmap.shape
    if top.indices.shape[:2] != (height, width):
        raise ValueError(
            f"top-vote map shape {top.indices.shape[:2]} does not match heatmap {(height, width)}"
        )
    claims = _claim_slots(peaks, top, query_filter, (height, width))
    any_claim = claims.any(axis=1)
    claim_count = any_claim.sum(axis=0)

    assignment = np.full((height, width), -1, dtype=np.int32)
    for i in range(len(peaks)):
        assignment[(claim_count == 1) & any_claim[i]] = i

    totals = [region.total_vote for region in peaks]
    centers = [region.bbox_center for region in peaks]
    for r, c in np.argwhere(claim_count >= 2).tolist():
        # Same-cell contest first: within each claimed cell the nearest peak
        # (by bbox center) represents that cell; representatives then compete
        # on total vote.  Remaining ties fall back to peak order.
        by_cell: dict[int, list[tuple[float, int]]] = {}
        for i in range(len(peaks)):
            if not any_claim[i, r, c]:
                continue
            dist = math.hypot(centers[i][0] - r, centers[i][1] - c)
            for t in range(top.depth):
                if claims[i, t, r, c]:
                    by_cell.setdefault(int(top.indices[r, c, t]), []).append((dist, i))
        candidates = []
        for members in by_cell.values():
            dist, i = min(members)
            candidates.append((-totals[i], dist, i))
        assignment[r, c] = min(candidates)[2]

    masks = []
    for i, region in enumerate(peaks):
        rows, cols = np.nonzero(assignment == i)
        masks.append(
            InstanceMask(
                rows=rows.astype(np.int32),
                cols=cols.astype(np.int32),
                peak_index=i,
                peak=region,
            )
        )
    return masks
