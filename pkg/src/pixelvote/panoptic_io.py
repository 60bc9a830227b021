"""COCO-panoptic archives and raw tensor interchange files.

An archive is a JSON index plus one RGB PNG per image in which the segment
id is encoded as ``R + 256*G + 256**2*B`` (id 0 is void).  The JSON lists,
per image, the segment records (id, category_id, area, isthing) and a
global category table.

Tensor files carry externally produced network outputs for ``infer``: a
single-line JSON header (shape, dtype, optional channel legend) followed
by the raw little-endian C-order array bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .encode import PanopticAnnotation, SegmentInfo, downsample_annotation
from .fuse import PanopticMap

__all__ = [
    "ArchiveError",
    "MissingImageError",
    "IdMismatchError",
    "MalformedPngError",
    "AreaMismatchError",
    "PanopticArchive",
    "ArchiveWriter",
    "read_annotation",
    "write_prediction",
    "segment_ids_to_rgb",
    "rgb_to_segment_ids",
    "save_tensor",
    "load_tensor",
]

_MAX_ID = 256 ** 3 - 1


class ArchiveError(Exception):
    """Base error for panoptic archive problems."""


class MissingImageError(ArchiveError):
    """The requested image id has no entry or no PNG."""


class IdMismatchError(ArchiveError):
    """PNG segment ids and JSON segment records disagree."""


class MalformedPngError(ArchiveError):
    """The per-image PNG cannot be decoded as a segment id map."""


class AreaMismatchError(ArchiveError):
    """A JSON area field disagrees with the PNG pixel count."""


def segment_ids_to_rgb(id_map: np.ndarray) -> np.ndarray:
    """(H, W) segment ids to (H, W, 3) uint8, id = R + 256*G + 256**2*B."""
    ids = np.asarray(id_map, dtype=np.int64)
    if ids.min() < 0 or ids.max() > _MAX_ID:
        raise ValueError(f"segment ids must lie in [0, {_MAX_ID}]")
    rgb = np.empty(ids.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = ids % 256
    rgb[..., 1] = (ids >> 8) % 256
    rgb[..., 2] = ids >> 16
    return rgb


def rgb_to_segment_ids(rgb: np.ndarray) -> np.ndarray:
    """(H, W, 3) uint8 back to (H, W) int32 segment ids."""
    pixels = rgb.astype(np.int64)
    return (pixels[..., 0] + (pixels[..., 1] << 8) + (pixels[..., 2] << 16)).astype(np.int32)


def _prediction_id_map(pmap: PanopticMap) -> np.ndarray:
    """Per-pixel segment ids of a panoptic map (stuff pixels get their
    whole-category segment's id)."""
    ids = pmap.instance_id.astype(np.int32).copy()
    for seg in pmap.segments:
        if not seg.is_thing:
            ids[(pmap.instance_id == 0) & (pmap.category == seg.category)] = seg.id
    return ids


def write_prediction(pmap: PanopticMap, png_path: str | Path, image_id: int) -> dict:
    """Write one panoptic map as an archive PNG; returns its JSON entry."""
    png_path = Path(png_path)
    try:
        png_path.parent.mkdir(parents=True, exist_ok=True)
        image = Image.fromarray(segment_ids_to_rgb(_prediction_id_map(pmap)), mode="RGB")
        image.save(png_path, format="PNG")
    except OSError as exc:
        raise ArchiveError(f"cannot write {png_path}: {exc}") from exc
    return {
        "image_id": int(image_id),
        "file_name": png_path.name,
        "segments_info": [
            {"id": seg.id, "category_id": seg.category, "area": seg.area, "isthing": int(seg.is_thing)}
            for seg in pmap.segments
        ],
    }


@dataclass
class PanopticArchive:
    """Read side of a JSON + PNG-directory panoptic archive."""

    json_path: Path
    png_dir: Path
    entries: dict[int, dict]
    category_table: dict[int, bool]

    @classmethod
    def open(cls, json_path: str | Path, png_dir: str | Path | None = None) -> "PanopticArchive":
        json_path = Path(json_path)
        if png_dir is None:
            png_dir = json_path.with_suffix("")
        try:
            index = json.loads(json_path.read_text())
        except OSError as exc:
            raise ArchiveError(f"cannot read archive index {json_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ArchiveError(f"archive index {json_path} is not valid JSON: {exc}") from exc
        entries = {int(entry["image_id"]): entry for entry in index.get("annotations", [])}
        categories = {
            int(cat["id"]): bool(cat.get("isthing", 0)) for cat in index.get("categories", [])
        }
        return cls(json_path=json_path, png_dir=Path(png_dir), entries=entries, category_table=categories)

    def image_ids(self) -> list[int]:
        return sorted(self.entries)

    def read(self, image_id: int, downsample: int = 1) -> PanopticAnnotation:
        if image_id not in self.entries:
            raise MissingImageError(f"image {image_id} is not in {self.json_path}")
        entry = self.entries[image_id]
        png_path = self.png_dir / entry["file_name"]
        if not png_path.exists():
            raise MissingImageError(f"image {image_id}: PNG {png_path} does not exist")
        try:
            with Image.open(png_path) as image:
                rgb = np.asarray(image.convert("RGB"))
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise MalformedPngError(f"image {image_id}: cannot decode {png_path}: {exc}") from exc
        id_map = rgb_to_segment_ids(rgb)

        png_ids, png_counts = np.unique(id_map, return_counts=True)
        areas = dict(zip(png_ids.tolist(), png_counts.tolist()))
        areas.pop(0, None)
        json_segments = {int(seg["id"]): seg for seg in entry["segments_info"]}
        orphans_png = sorted(set(areas) - set(json_segments))
        orphans_json = sorted(set(json_segments) - set(areas))
        if orphans_png or orphans_json:
            raise IdMismatchError(
                f"image {image_id}: ids {orphans_png} only in PNG, ids {orphans_json} only in JSON"
            )
        for seg_id, seg in json_segments.items():
            if "area" in seg and int(seg["area"]) != areas[seg_id]:
                raise AreaMismatchError(
                    f"image {image_id}: segment {seg_id} area {seg['area']} != pixel count {areas[seg_id]}"
                )

        segments = {}
        for seg_id, seg in json_segments.items():
            category = int(seg["category_id"])
            if "isthing" in seg:
                is_thing = bool(seg["isthing"])
            else:
                is_thing = self.category_table.get(category, False)
            segments[seg_id] = SegmentInfo(category=category, is_thing=is_thing)
        ann = PanopticAnnotation(segment_id_map=id_map, segments=segments)
        if downsample > 1:
            ann = downsample_annotation(ann, downsample)
        return ann


def read_annotation(archive: PanopticArchive, image_id: int, downsample: int = 1) -> PanopticAnnotation:
    """Read one image's annotation out of an archive."""
    return archive.read(image_id, downsample=downsample)


@dataclass
class ArchiveWriter:
    """Accumulates per-image predictions, then writes the JSON index."""

    json_path: Path
    categories: dict[int, bool]
    png_dir: Path | None = None
    _entries: list[dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.json_path = Path(self.json_path)
        if self.png_dir is None:
            self.png_dir = self.json_path.with_suffix("")
        self.png_dir = Path(self.png_dir)

    def add(self, image_id: int, pmap: PanopticMap) -> dict:
        entry = write_prediction(pmap, self.png_dir / f"{image_id:012d}.png", image_id)
        self._entries.append(entry)
        return entry

    def finish(self) -> Path:
        index = {
            "annotations": sorted(self._entries, key=lambda e: e["image_id"]),
            "categories": [
                {"id": cat, "isthing": int(flag)} for cat, flag in sorted(self.categories.items())
            ],
        }
        self.json_path.parent.mkdir(parents=True, exist_ok=True)
        self.json_path.write_text(json.dumps(index, indent=2, sort_keys=True))
        return self.json_path


def save_tensor(path: str | Path, array: np.ndarray, legend: dict | None = None) -> Path:
    """Write an array as a JSON-header + raw little-endian bytes file."""
    path = Path(path)
    arr = np.ascontiguousarray(array)
    dtype = arr.dtype.newbyteorder("<")
    header: dict = {"dtype": dtype.str, "shape": list(arr.shape), "order": "C"}
    if legend:
        header["legend"] = legend
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        handle.write(arr.astype(dtype, copy=False).tobytes(order="C"))
    return path


def load_tensor(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read a tensor file back; returns (array, header)."""
    data = Path(path).read_bytes()
    newline = data.find(b"\n")
    if newline < 0:
        raise ValueError(f"{path}: missing tensor header line")
    try:
        header = json.loads(data[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: bad tensor header: {exc}") from exc
    shape = tuple(int(n) for n in header["shape"])
    dtype = np.dtype(header["dtype"])
    expected = dtype.itemsize * int(np.prod(shape)) if shape else dtype.itemsize
    raw = data[newline + 1 :]
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy(), header
