"""PNG renderers for grids, heatmaps, peak regions, and instance masks."""

from __future__ import annotations

import colorsys
from pathlib import Path

import numpy as np
from PIL import Image

from .backproject import InstanceMask
from .grid import CellTable
from .peaks import PeakRegion

__all__ = ["color_table", "grid_image", "heatmap_image", "regions_image", "masks_image", "save_png"]

_GOLDEN_ANGLE = 0.6180339887498949


def color_table(n: int) -> np.ndarray:
    """(n, 3) uint8 palette; index i always maps to the same color."""
    colors = np.empty((max(n, 1), 3), dtype=np.uint8)
    for i in range(max(n, 1)):
        hue = (i * _GOLDEN_ANGLE) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.95)
        colors[i] = (int(r * 255), int(g * 255), int(b * 255))
    return colors


def grid_image(table: CellTable, target_side: int = 486) -> Image.Image:
    """Cell partition of a filter window, one color per cell, black seams."""
    index = table.index_of_offset
    colors = color_table(table.num_cells)
    rgb = colors[index]
    seams = np.zeros(index.shape, dtype=bool)
    seams[:-1, :] |= index[:-1, :] != index[1:, :]
    seams[:, :-1] |= index[:, :-1] != index[:, 1:]
    rgb[seams] = 0
    zoom = max(1, target_side // table.side)
    rgb = np.repeat(np.repeat(rgb, zoom, axis=0), zoom, axis=1)
    return Image.fromarray(rgb, mode="RGB")


def heatmap_image(heatmap: np.ndarray) -> Image.Image:
    """Heatmap normalized to its maximum as 8-bit grayscale."""
    peak = float(heatmap.max())
    if peak <= 0:
        gray = np.zeros(heatmap.shape, dtype=np.uint8)
    else:
        gray = np.clip(heatmap / peak * 255.0, 0, 255).astype(np.uint8)
    return Image.fromarray(gray, mode="L")


def _paint(shape: tuple[int, int], groups: list[tuple[np.ndarray, np.ndarray]], colors: np.ndarray) -> Image.Image:
    rgb = np.zeros(shape + (3,), dtype=np.uint8)
    for i, (rows, cols) in enumerate(groups):
        rgb[rows, cols] = colors[i]
    return Image.fromarray(rgb, mode="RGB")


def regions_image(shape: tuple[int, int], regions: list[PeakRegion]) -> Image.Image:
    """Peak regions over a black background, one color per region."""
    colors = color_table(len(regions))
    return _paint(shape, [(r.rows, r.cols) for r in regions], colors)


def masks_image(shape: tuple[int, int], masks: list[InstanceMask], num_peaks: int) -> Image.Image:
    """Instance masks colored to match their source regions in regions_image."""
    colors = color_table(num_peaks)
    rgb = np.zeros(shape + (3,), dtype=np.uint8)
    for mask in masks:
        rgb[mask.rows, mask.cols] = colors[mask.peak_index]
    return Image.fromarray(rgb, mode="RGB")


def save_png(image: Image.Image, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    image.save(path, format="PNG")
    return path
