"""Panoptic Quality evaluation.

Predicted and ground-truth segments of the same category match when their
IoU exceeds 0.5 (such matches are necessarily one-to-one).  Per category,
PQ = sum of matched IoUs / (TP + FP/2 + FN/2); SQ is the mean matched IoU
and RQ the F1 of the matching, so PQ = SQ x RQ.  Reported values average
per-category scores over categories with any activity, as percentages.

Void handling follows the standard protocol: ground-truth void pixels are
excluded from match denominators, and unmatched predictions lying more
than half on void are ignored rather than counted as false positives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fuse import PanopticMap

__all__ = ["CategoryStats", "PQStats", "evaluate", "semantic_miou"]

_MATCH_THRESHOLD = 0.5


@dataclass
class CategoryStats:
    iou_sum: float = 0.0
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def merge(self, other: "CategoryStats") -> None:
        self.iou_sum += other.iou_sum
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn


@dataclass
class PQStats:
    """Accumulable raw match statistics plus the category vocabulary."""

    per_category: dict[int, CategoryStats] = field(default_factory=dict)
    is_thing: dict[int, bool] = field(default_factory=dict)

    def _bucket(self, category: int, thing: bool) -> CategoryStats:
        if category not in self.per_category:
            self.per_category[category] = CategoryStats()
            self.is_thing[category] = thing
        return self.per_category[category]

    def __add__(self, other: "PQStats") -> "PQStats":
        merged = PQStats()
        for source in (self, other):
            for cat, stats in source.per_category.items():
                merged._bucket(cat, source.is_thing[cat]).merge(stats)
        return merged

    def __iadd__(self, other: "PQStats") -> "PQStats":
        for cat, stats in other.per_category.items():
            self._bucket(cat, other.is_thing[cat]).merge(stats)
        return self

    def category_scores(self, category: int) -> tuple[float, float, float]:
        """(PQ, SQ, RQ) percentages for one category."""
        stats = self.per_category[category]
        denom = stats.tp + 0.5 * stats.fp + 0.5 * stats.fn
        if denom == 0:
            return 0.0, 0.0, 0.0
        pq = 100.0 * stats.iou_sum / denom
        sq = 100.0 * stats.iou_sum / stats.tp if stats.tp > 0 else 0.0
        rq = 100.0 * stats.tp / denom
        return pq, sq, rq

    def to_dict(self) -> dict:
        """JSON-able summary plus raw accumulable per-category counts."""
        return {
            "summary": self.summarize(),
            "per_category": {
                str(cat): {
                    "iou_sum": stats.iou_sum,
                    "tp": stats.tp,
                    "fp": stats.fp,
                    "fn": stats.fn,
                    "is_thing": self.is_thing[cat],
                }
                for cat, stats in sorted(self.per_category.items())
            },
        }

    def summarize(self) -> dict[str, float]:
        """Means over active categories, overall and split by things/stuff."""
        def mean(categories: list[int], index: int) -> float:
            if not categories:
                return 0.0
            return sum(self.category_scores(c)[index] for c in categories) / len(categories)

        active = [
            cat
            for cat, stats in sorted(self.per_category.items())
            if stats.tp + stats.fp + stats.fn > 0
        ]
        things = [c for c in active if self.is_thing[c]]
        stuff = [c for c in active if not self.is_thing[c]]
        return {
            "PQ": mean(active, 0),
            "SQ": mean(active, 1),
            "RQ": mean(active, 2),
            "PQ_thing": mean(things, 0),
            "SQ_thing": mean(things, 1),
            "RQ_thing": mean(things, 2),
            "PQ_stuff": mean(stuff, 0),
            "SQ_stuff": mean(stuff, 1),
            "RQ_stuff": mean(stuff, 2),
            "n_categories": float(len(active)),
        }


def _segment_label_map(pmap: PanopticMap) -> tuple[np.ndarray, dict[int, tuple[int, bool]]]:
    """Per-pixel segment labels (0 = void) and label -> (category, is_thing)."""
    labels = np.zeros(pmap.shape, dtype=np.int64)
    info: dict[int, tuple[int, bool]] = {}
    for seg in pmap.segments:
        if seg.is_thing:
            pixels = pmap.instance_id == seg.id
        else:
            pixels = (pmap.instance_id == 0) & (pmap.category == seg.category)
        labels[pixels] = seg.id
        info[seg.id] = (seg.category, seg.is_thing)
    return labels, info


def evaluate(pred: PanopticMap, gt: PanopticMap, categories: dict[int, bool]) -> PQStats:
    """Match one image's segments and return accumulable statistics.

    ``categories`` maps category id to is_thing and must cover every
    ground-truth category; predicted categories outside it cannot match
    anything and count as false positives.
    """
    if pred.shape != gt.shape:
        raise ValueError(f"resolution mismatch: prediction {pred.shape} vs ground truth {gt.shape}")
    for seg in gt.segments:
        if seg.category not in categories:
            raise ValueError(f"ground-truth category {seg.category} missing from the vocabulary")
        if categories[seg.category] != seg.is_thing:
            raise ValueError(f"category {seg.category} thing/stuff flag disagrees with the vocabulary")

    pred_labels, pred_info = _segment_label_map(pred)
    gt_labels, gt_info = _segment_label_map(gt)

    pair_keys, pair_counts = np.unique(
        gt_labels.astype(np.int64) << 32 | pred_labels.astype(np.int64), return_counts=True
    )
    intersections: dict[tuple[int, int], int] = {}
    for key, count in zip(pair_keys.tolist(), pair_counts.tolist()):
        intersections[(key >> 32, key & 0xFFFFFFFF)] = count

    gt_areas = {label: 0 for label in gt_info}
    pred_areas = {label: 0 for label in pred_info}
    for (g, p), count in intersections.items():
        if g:
            gt_areas[g] += count
        if p:
            pred_areas[p] += count

    stats = PQStats()
    for cat, thing in sorted(categories.items()):
        stats._bucket(cat, thing)

    matched_gt: set[int] = set()
    matched_pred: set[int] = set()
    for (g, p), inter in sorted(intersections.items()):
        if g == 0 or p == 0:
            continue
        g_cat, g_thing = gt_info[g]
        p_cat, _ = pred_info[p]
        if g_cat != p_cat:
            continue
        void_overlap = intersections.get((0, p), 0)
        union = gt_areas[g] + pred_areas[p] - inter - void_overlap
        iou = inter / union
        if iou > _MATCH_THRESHOLD:
            assert g not in matched_gt and p not in matched_pred, "IoU > 0.5 matches must be unique"
            matched_gt.add(g)
            matched_pred.add(p)
            bucket = stats._bucket(g_cat, g_thing)
            bucket.tp += 1
            bucket.iou_sum += iou

    for g, (cat, thing) in gt_info.items():
        if g not in matched_gt:
            stats._bucket(cat, thing).fn += 1
    for p, (cat, thing) in pred_info.items():
        if p in matched_pred:
            continue
        if intersections.get((0, p), 0) > 0.5 * pred_areas[p]:
            continue  # mostly over ground-truth void: ignored, not a false positive
        stats._bucket(cat, categories.get(cat, thing)).fp += 1
    return stats


def semantic_miou(pred: np.ndarray, gt: np.ndarray, num_categories: int) -> float:
    """Mean IoU of two semantic maps over categories present in either."""
    if pred.shape != gt.shape:
        raise ValueError("resolution mismatch between semantic maps")
    valid = (gt >= 0) & (gt < num_categories) & (pred >= 0) & (pred < num_categories)
    confusion = np.bincount(
        gt[valid].astype(np.int64) * num_categories + pred[valid].astype(np.int64),
        minlength=num_categories * num_categories,
    ).reshape(num_categories, num_categories)
    tp = np.diag(confusion).astype(np.float64)
    union = confusion.sum(axis=0) + confusion.sum(axis=1) - tp
    present = union > 0
    if not present.any():
        return 0.0
    return float((tp[present] / union[present]).mean() * 100.0)
