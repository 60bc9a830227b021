"""Panoptic fusion: merge instance masks with a semantic map.

Instance masks take the majority thing category voted by the semantic map
inside the mask; remaining pixels form whole-category stuff segments, with
small stuff (measured at full resolution) relabeled void.  Leftover pixels
carrying a thing category, and masks with no thing-category support, fall
back to void.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backproject import InstanceMask
from .encode import IGNORE, PanopticAnnotation

__all__ = ["VOID", "SegmentRecord", "PanopticMap", "assign_category", "fuse", "annotation_to_map", "upsample_map"]

VOID = -1


@dataclass(frozen=True)
class SegmentRecord:
    id: int
    category: int
    area: int
    is_thing: bool


@dataclass
class PanopticMap:
    """Per-pixel panoptic output plus segment metadata.

    category: (H, W) category index, VOID where unlabeled.
    instance_id: (H, W) segment id for thing pixels, 0 for stuff and void.
    segments: one record per segment; thing records carry the ids used in
        the instance_id map, stuff records carry ids unique in the list.
    """

    category: np.ndarray
    instance_id: np.ndarray
    segments: list[SegmentRecord]

    @property
    def shape(self) -> tuple[int, int]:
        return self.category.shape  # type: ignore[return-value]


def assign_category(mask: InstanceMask, semantic: np.ndarray, thing_categories: set[int]) -> int | None:
    """Majority thing category of the semantic labels inside a mask.

    Returns None when no mask pixel carries a thing category (the mask is
    then dropped by fusion).  Count ties break toward the lower category.
    """
    if mask.pixel_count == 0:
        raise ValueError("cannot assign a category to an empty mask")
    labels = semantic[mask.rows, mask.cols]
    values, counts = np.unique(labels, return_counts=True)
    best: tuple[int, int] | None = None
    for value, count in zip(values.tolist(), counts.tolist()):
        if value not in thing_categories:
            continue
        if best is None or count > best[0] or (count == best[0] and value < best[1]):
            best = (count, value)
    return None if best is None else best[1]


def fuse(
    masks: list[InstanceMask],
    semantic: np.ndarray,
    thing_categories: set[int],
    min_stuff_area: int = 4096,
    scale_factor: int = 4,
) -> PanopticMap:
    """Merge disjoint instance masks and a semantic map into a panoptic map.

    Stuff areas are compared against ``min_stuff_area`` at full resolution,
    i.e. working-resolution pixel counts times ``scale_factor ** 2``.
    """
    height, width = semantic.shape
    category = np.full((height, width), VOID, dtype=np.int32)
    instance_id = np.zeros((height, width), dtype=np.int32)
    segments: list[SegmentRecord] = []

    next_id = 1
    for mask in masks:
        if mask.pixel_count == 0:
            continue
        cat = assign_category(mask, semantic, thing_categories)
        if cat is None:
            continue
        category[mask.rows, mask.cols] = cat
        instance_id[mask.rows, mask.cols] = next_id
        segments.append(SegmentRecord(next_id, cat, mask.pixel_count, True))
        next_id += 1

    leftover = instance_id == 0
    leftover_cats = np.unique(semantic[leftover])
    for cat in leftover_cats.tolist():
        if cat == IGNORE or cat in thing_categories:
            continue  # unassigned thing-category pixels stay void
        pixels = leftover & (semantic == cat)
        area = int(pixels.sum())
        if area * scale_factor * scale_factor < min_stuff_area:
            continue
        category[pixels] = cat
        segments.append(SegmentRecord(next_id, cat, area, False))
        next_id += 1

    return PanopticMap(category=category, instance_id=instance_id, segments=segments)


def annotation_to_map(ann: PanopticAnnotation) -> PanopticMap:
    """Ground-truth annotation as a panoptic map.

    Thing segments get fresh sequential ids (ascending original id); stuff
    segments of one category merge into a single whole-category segment,
    per panoptic convention.
    """
    id_map = ann.segment_id_map
    category = np.full(id_map.shape, VOID, dtype=np.int32)
    instance_id = np.zeros(id_map.shape, dtype=np.int32)
    segments: list[SegmentRecord] = []

    present = [sid for sid in sorted(ann.segments) if (id_map == sid).any()]
    next_id = 1
    stuff_areas: dict[int, int] = {}
    for sid in present:
        info = ann.segments[sid]
        pixels = id_map == sid
        category[pixels] = info.category
        if info.is_thing:
            instance_id[pixels] = next_id
            segments.append(SegmentRecord(next_id, info.category, int(pixels.sum()), True))
            next_id += 1
        else:
            stuff_areas[info.category] = stuff_areas.get(info.category, 0) + int(pixels.sum())
    for cat in sorted(stuff_areas):
        segments.append(SegmentRecord(next_id, cat, stuff_areas[cat], False))
        next_id += 1
    return PanopticMap(category=category, instance_id=instance_id, segments=segments)


def upsample_map(pmap: PanopticMap, factor: int) -> PanopticMap:
    """Nearest-neighbor upsample; areas scale by ``factor ** 2`` exactly."""
    if factor < 1:
        raise ValueError(f"upsample factor must be >= 1, got {factor}")
    category = np.repeat(np.repeat(pmap.category, factor, axis=0), factor, axis=1)
    instance_id = np.repeat(np.repeat(pmap.instance_id, factor, axis=0), factor, axis=1)
    segments = [
        SegmentRecord(seg.id, seg.category, seg.area * factor * factor, seg.is_thing)
        for seg in pmap.segments
    ]
    return PanopticMap(category=category, instance_id=instance_id, segments=segments)
