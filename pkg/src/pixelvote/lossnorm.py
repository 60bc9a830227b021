"""Segment-normalized cross-entropy weighting.

Each pixel's loss contribution is weighted by ``area ** -strength`` of the
segment it belongs to, then the weighted mean negative log-probability is
taken.  At strength 0 this is the plain pixel-averaged loss; at strength 1
every segment contributes equally regardless of area.  Stuff and thing
segments are treated identically; unlabeled and otherwise excluded pixels
carry weight 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encode import PanopticAnnotation

__all__ = ["SegmentWeights", "segment_weights", "normalized_loss"]


@dataclass
class SegmentWeights:
    """Per-pixel loss weights ``area ** -strength``; 0 on excluded pixels."""

    w: np.ndarray
    strength: float


def segment_weights(
    ann: PanopticAnnotation,
    strength: float,
    extra_ignore: np.ndarray | None = None,
) -> SegmentWeights:
    """Inverse-area weights for every labeled pixel of an annotation.

    ``extra_ignore`` optionally zeroes additional pixels (e.g. instance
    pixels whose voting target is out of the grid's reach).
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"normalization strength must be in [0, 1], got {strength}")
    id_map = ann.segment_id_map
    w = np.zeros(id_map.shape, dtype=np.float64)
    for seg_id in np.unique(id_map).tolist():
        if seg_id == 0:
            continue
        pixels = id_map == seg_id
        w[pixels] = float(pixels.sum()) ** -strength
    if extra_ignore is not None:
        w[extra_ignore] = 0.0
    return SegmentWeights(w=w, strength=strength)


def normalized_loss(true_label_probs: np.ndarray, weights: SegmentWeights) -> float:
    """Weighted mean negative log-probability of the true labels.

    ``true_label_probs`` holds, per pixel, the probability predicted for
    that pixel's ground-truth label; values must lie in (0, 1] wherever the
    weight is nonzero.  Perfect prediction gives 0.
    """
    w = weights.w
    probs = np.asarray(true_label_probs, dtype=np.float64)
    if probs.shape != w.shape:
        raise ValueError(f"probability map shape {probs.shape} does not match weights {w.shape}")
    active = w > 0
    total = w[active].sum()
    if total <= 0:
        raise ValueError("all pixels are excluded: total weight is zero")
    p = probs[active]
    if (p <= 0).any() or (p > 1).any():
        raise ValueError("true-label probabilities must lie in (0, 1]")
    return float((w[active] * -np.log(p)).sum() / total)
