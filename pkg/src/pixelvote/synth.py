"""Synthetic panoptic scenes and the deterministic oracle pipeline.

Scenes are seeded and fully reproducible: instances (rectangles, ellipses,
blobs) are painted in z-order so later shapes occlude earlier ones, and
the leftover canvas is filled with stuff.  The oracle feeds ground-truth
labels through the full inference pipeline, measuring the ceiling of the
discretization itself independent of any learned predictor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregate import VoteTensor, aggregate_votes
from .backproject import backproject, top_votes
from .encode import IGNORE, LabelField, PanopticAnnotation, SegmentInfo, encode_labels
from .fuse import PanopticMap, annotation_to_map, fuse
from .grid import CellTable, GridSpec, build_grid, invert_grid
from .metrics import PQStats, evaluate
from .peaks import find_peaks

__all__ = ["SceneSpec", "generate", "one_hot_votes", "oracle_predict", "oracle_run"]


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for one reproducible synthetic scene.

    scale_range is the rough instance diameter in pixels.  With occlusion
    "none" instances are rejection-sampled to avoid overlap; "stacked"
    paints them in z-order and drops instances that end up fully hidden.
    cluster_fraction is the chance that an instance is planted next to an
    earlier one, which produces close centroid pairs and partial occlusion.
    """

    height: int = 256
    width: int = 256
    instance_count: tuple[int, int] = (3, 8)
    shapes: tuple[str, ...] = ("rectangle", "ellipse", "blob")
    scale_range: tuple[float, float] = (12.0, 96.0)
    occlusion: str = "none"
    stuff_layout: str = "split"
    thing_categories: tuple[int, ...] = (1, 2, 3, 4, 5)
    stuff_categories: tuple[int, ...] = (20, 21)
    cluster_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.occlusion not in ("none", "stacked"):
            raise ValueError(f"occlusion mode must be 'none' or 'stacked', got {self.occlusion!r}")
        if self.stuff_layout not in ("uniform", "split"):
            raise ValueError(f"stuff layout must be 'uniform' or 'split', got {self.stuff_layout!r}")
        if self.stuff_layout == "split" and len(self.stuff_categories) < 2:
            raise ValueError("split stuff layout needs at least two stuff categories")
        lo, hi = self.instance_count
        if lo < 0 or hi < lo:
            raise ValueError(f"bad instance count range {self.instance_count}")


def _shape_mask(
    kind: str,
    center: tuple[float, float],
    scale: float,
    shape: tuple[int, int],
    rng: np.random.Generator,
) -> np.ndarray:
    yy = np.arange(shape[0], dtype=np.float64)[:, None]
    xx = np.arange(shape[1], dtype=np.float64)[None, :]
    cy, cx = center
    if kind == "rectangle":
        half_h = scale * rng.uniform(0.3, 0.5)
        half_w = scale * rng.uniform(0.3, 0.5)
        return (np.abs(yy - cy) <= half_h) & (np.abs(xx - cx) <= half_w)
    if kind == "ellipse":
        a = max(scale * rng.uniform(0.3, 0.5), 1.0)
        b = max(scale * rng.uniform(0.3, 0.5), 1.0)
        return ((yy - cy) / a) ** 2 + ((xx - cx) / b) ** 2 <= 1.0
    if kind == "blob":
        mask = np.zeros(shape, dtype=bool)
        for _ in range(3):
            oy = cy + scale * rng.uniform(-0.2, 0.2)
            ox = cx + scale * rng.uniform(-0.2, 0.2)
            a = max(scale * rng.uniform(0.2, 0.4), 1.0)
            b = max(scale * rng.uniform(0.2, 0.4), 1.0)
            mask |= ((yy - oy) / a) ** 2 + ((xx - ox) / b) ** 2 <= 1.0
        return mask
    raise ValueError(f"unknown shape kind {kind!r}")


def generate(spec: SceneSpec) -> PanopticAnnotation:
    """Paint a seeded scene; identical specs yield identical annotations."""
    rng = np.random.default_rng(spec.seed)
    height, width = spec.height, spec.width
    id_map = np.zeros((height, width), dtype=np.int32)
    segments: dict[int, SegmentInfo] = {}

    lo, hi = spec.instance_count
    wanted = int(rng.integers(lo, hi, endpoint=True)) if hi > 0 else 0
    anchors: list[tuple[float, float, float]] = []  # (cy, cx, scale) of placed instances

    next_id = 1
    for _ in range(wanted):
        scale = float(rng.uniform(*spec.scale_range))
        kind = spec.shapes[int(rng.integers(len(spec.shapes)))]
        category = int(spec.thing_categories[int(rng.integers(len(spec.thing_categories)))])
        placed = False
        for _ in range(60):
            if anchors and rng.random() < spec.cluster_fraction:
                ay, ax, ascale = anchors[int(rng.integers(len(anchors)))]
                gap = rng.uniform(0.35, 0.85) * max(scale, ascale)
                angle = rng.uniform(0.0, 2.0 * np.pi)
                cy = float(np.clip(ay + gap * np.sin(angle), 0, height - 1))
                cx = float(np.clip(ax + gap * np.cos(angle), 0, width - 1))
            else:
                margin = min(scale * 0.3, height / 4, width / 4)
                cy = float(rng.uniform(margin, height - 1 - margin))
                cx = float(rng.uniform(margin, width - 1 - margin))
            mask = _shape_mask(kind, (cy, cx), scale, (height, width), rng)
            if not mask.any():
                continue
            if spec.occlusion == "none" and (id_map[mask] != 0).any():
                continue
            id_map[mask] = next_id
            segments[next_id] = SegmentInfo(category=category, is_thing=True)
            anchors.append((cy, cx, scale))
            next_id += 1
            placed = True
            break
        if not placed and spec.occlusion == "none":
            continue

    present = set(np.unique(id_map).tolist())
    segments = {sid: info for sid, info in segments.items() if sid in present}
    if wanted > 0 and not segments:
        raise ValueError("scene spec could not place any instance")

    background = id_map == 0
    if spec.stuff_layout == "uniform":
        stuff_regions = [(background, spec.stuff_categories[0])]
    else:
        half = width // 2
        left = background.copy()
        left[:, half:] = False
        right = background.copy()
        right[:, :half] = False
        stuff_regions = [(left, spec.stuff_categories[0]), (right, spec.stuff_categories[1])]
    for region, category in stuff_regions:
        if not region.any():
            continue
        id_map[region] = next_id
        segments[next_id] = SegmentInfo(category=int(category), is_thing=False)
        next_id += 1

    ann = PanopticAnnotation(segment_id_map=id_map, segments=segments)
    ann.validate()
    return ann


def one_hot_votes(labels: LabelField, table: CellTable) -> VoteTensor:
    """Perfect vote tensor for a label field: probability 1 on the target.

    Pixels whose voting label is IGNORE abstain.
    """
    height, width = labels.vote.shape
    channels = table.num_cells + 1
    channel = np.where(labels.vote == IGNORE, labels.abstention, labels.vote)
    probs = np.zeros((height, width, channels), dtype=np.float64)
    np.put_along_axis(probs, channel[:, :, None].astype(np.int64), 1.0, axis=2)
    return VoteTensor(probs=probs)


def _as_table(grid: GridSpec | CellTable) -> CellTable:
    return build_grid(grid) if isinstance(grid, GridSpec) else grid


def oracle_predict(
    ann: PanopticAnnotation,
    grid: GridSpec | CellTable,
    threshold: float = 4.0,
    depth: int = 3,
    min_stuff_area: int = 4096,
    scale_factor: int = 4,
    connectivity: int = 8,
) -> PanopticMap:
    """Run the full pipeline on ground-truth labels at working resolution."""
    table = _as_table(grid)
    labels = encode_labels(ann, table)
    votes = one_hot_votes(labels, table)
    heat = aggregate_votes(votes, table)
    regions = find_peaks(heat, threshold, connectivity)
    masks = backproject(regions, top_votes(votes, depth), invert_grid(table), heat)
    thing_categories = {info.category for info in ann.segments.values() if info.is_thing}
    return fuse(masks, labels.semantic, thing_categories, min_stuff_area, scale_factor)


def oracle_run(
    ann: PanopticAnnotation,
    grid: GridSpec | CellTable,
    threshold: float = 4.0,
    depth: int = 3,
    min_stuff_area: int = 4096,
    scale_factor: int = 4,
    connectivity: int = 8,
) -> tuple[PanopticMap, PQStats]:
    """Oracle prediction plus its PQ against the same-resolution ground truth."""
    pred = oracle_predict(ann, grid, threshold, depth, min_stuff_area, scale_factor, connectivity)
    stats = evaluate(pred, annotation_to_map(ann), ann.categories())
    return pred, stats
