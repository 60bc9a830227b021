"""Ground-truth encoding: per-pixel semantic and centroid-voting targets.

Converts a panoptic annotation into the labels a perfect per-pixel
classifier would output: a semantic category per pixel and, for pixels
belonging to an instance, the grid cell into which the instance centroid
falls.  Pixels of no instance vote for the abstention class; instance
pixels whose centroid lies beyond the grid window are marked IGNORE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import CellTable

__all__ = [
    "IGNORE",
    "SegmentInfo",
    "PanopticAnnotation",
    "LabelField",
    "centroid",
    "encode_labels",
    "downsample_annotation",
]

# Label value for pixels excluded from supervision: unlabeled pixels in the
# semantic map, out-of-window centroids in the vote map.
IGNORE = -1


@dataclass(frozen=True)
class SegmentInfo:
    category: int
    is_thing: bool


@dataclass
class PanopticAnnotation:
    """Ground-truth segment masks: an id map plus per-id records.

    segment_id_map: (H, W) int array; 0 marks unlabeled pixels.
    segments: record for every nonzero id appearing in the map.
    """

    segment_id_map: np.ndarray
    segments: dict[int, SegmentInfo] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.segment_id_map.shape  # type: ignore[return-value]

    def validate(self) -> None:
        ids = np.unique(self.segment_id_map)
        ids = ids[ids != 0]
        for seg_id in ids.tolist():
            if seg_id not in self.segments:
                raise ValueError(f"segment id {seg_id} appears in the map but has no record")
        if 0 in self.segments:
            raise ValueError("segment id 0 is reserved for unlabeled pixels")
        present = set(ids.tolist())
        for seg_id, info in self.segments.items():
            if info.is_thing and seg_id not in present:
                raise ValueError(f"thing segment {seg_id} has an empty mask")

    def categories(self) -> dict[int, bool]:
        """Category id -> is_thing over the segments present."""
        vocab: dict[int, bool] = {}
        for info in self.segments.values():
            if info.category in vocab and vocab[info.category] != info.is_thing:
                raise ValueError(f"category {info.category} is both thing and stuff")
            vocab[info.category] = info.is_thing
        return vocab


@dataclass
class LabelField:
    """Per-pixel targets at working resolution.

    semantic: (H, W) category index, IGNORE on unlabeled pixels.
    vote: (H, W) value in [0, K) for instance pixels, K for abstention
        (stuff and unlabeled), IGNORE where the centroid is out of reach.
    centroids: real-valued (row, col) center of mass per thing segment.
    """

    semantic: np.ndarray
    vote: np.ndarray
    centroids: dict[int, tuple[float, float]]
    num_cells: int

    @property
    def abstention(self) -> int:
        return self.num_cells


def centroid(pixels) -> tuple[float, float]:
    """Arithmetic mean of a set of (row, col) pixel coordinates."""
    coords = np.asarray(pixels, dtype=np.float64)
    if coords.size == 0:
        raise ValueError("centroid of an empty pixel set")
    coords = coords.reshape(-1, 2)
    mean = coords.mean(axis=0)
    return float(mean[0]), float(mean[1])


def round_half_away(x: float) -> int:
    """Round to nearest integer, ties away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def encode_labels(ann: PanopticAnnotation, voting_filter: CellTable) -> LabelField:
    """Read per-pixel targets off an annotation under a voting filter.

    For each instance pixel the target cell is the one containing the
    rounded instance centroid when the filter is overlaid on the pixel;
    centroids beyond the filter reach yield IGNORE.  Stuff and unlabeled
    pixels abstain.
    """
    id_map = ann.segment_id_map
    height, width = id_map.shape
    num_cells = voting_filter.num_cells
    reach = voting_filter.reach

    semantic = np.full((height, width), IGNORE, dtype=np.int32)
    vote = np.full((height, width), num_cells, dtype=np.int32)
    centroids: dict[int, tuple[float, float]] = {}

    for seg_id in np.unique(id_map).tolist():
        if seg_id == 0:
            continue
        info = ann.segments[seg_id]
        rows, cols = np.nonzero(id_map == seg_id)
        semantic[rows, cols] = info.category
        if not info.is_thing:
            continue
        cy, cx = centroid(np.stack([rows, cols], axis=1))
        centroids[seg_id] = (cy, cx)
        dy = round_half_away(cy) - rows
        dx = round_half_away(cx) - cols
        in_reach = (np.abs(dy) <= reach) & (np.abs(dx) <= reach)
        vote[rows[in_reach], cols[in_reach]] = voting_filter.index_of_offset[
            dy[in_reach] + reach, dx[in_reach] + reach
        ]
        vote[rows[~in_reach], cols[~in_reach]] = IGNORE

    return LabelField(semantic=semantic, vote=vote, centroids=centroids, num_cells=num_cells)


def downsample_annotation(ann: PanopticAnnotation, factor: int) -> PanopticAnnotation:
    """Nearest-neighbor downsample of an annotation; drops vanished segments."""
    if factor < 1:
        raise ValueError(f"downsample factor must be >= 1, got {factor}")
    small = np.ascontiguousarray(ann.segment_id_map[::factor, ::factor])
    kept = set(np.unique(small).tolist())
    segments = {sid: info for sid, info in ann.segments.items() if sid in kept}
    return PanopticAnnotation(segment_id_map=small, segments=segments)
