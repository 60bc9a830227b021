"""Command-line front end for batch experiments and rendering.

Subcommands: ``gridinfo`` (inspect and render a grid layout), ``oracle``
(seeded synthetic oracle runs with a quarter-resolution ceiling),
``eval-pq`` (score a prediction archive against a ground-truth archive),
``render`` (heatmap / peak / mask PNGs for one scene), and ``infer``
(run the pipeline on externally supplied vote and semantic tensors).

Runs are self-describing: a config echo is written beside every report.
Reports depend only on result-affecting settings, so a fixed seed gives
byte-identical output for any ``--jobs`` value.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .aggregate import VoteTensor, aggregate_votes
from .backproject import backproject, top_votes
from .encode import encode_labels
from .fuse import annotation_to_map, fuse
from .grid import SCHEMES, GridSpec, build_grid, invert_grid, scheme
from .harness import OracleSettings, corpus_specs, run_corpus
from .metrics import PQStats, evaluate
from .panoptic_io import ArchiveWriter, PanopticArchive, load_tensor
from .peaks import find_peaks
from .render import grid_image, heatmap_image, masks_image, regions_image, save_png
from .synth import SceneSpec, generate, one_hot_votes

__all__ = ["RunConfig", "main"]


@dataclass(frozen=True)
class RunConfig:
    """Result-affecting settings shared by the pipeline subcommands.

    Defaults pin the published operating point: detection threshold 4.0,
    top-3 vote matching, 4096-pixel stuff-area floor, and a x4 working
    scale.
    """

    scheme: str = "default"
    ring_extents: tuple[int, ...] | None = None
    ring_cell_sizes: tuple[int, ...] | None = None
    threshold: float = 4.0
    top: int = 3
    min_stuff_area: int = 4096
    scale: int = 4
    connectivity: int = 8
    seed: int = 0

    def grid_spec(self) -> GridSpec:
        if self.ring_extents is not None or self.ring_cell_sizes is not None:
            if self.ring_extents is None or self.ring_cell_sizes is None:
                raise ValueError("--extents and --cell-sizes must be given together")
            return GridSpec(self.ring_extents, self.ring_cell_sizes)
        return scheme(self.scheme)

    def settings(self) -> OracleSettings:
        return OracleSettings(
            threshold=self.threshold,
            depth=self.top,
            min_stuff_area=self.min_stuff_area,
            scale_factor=self.scale,
            connectivity=self.connectivity,
        )

    def echo(self) -> dict:
        data = asdict(self)
        if data["ring_extents"] is not None:
            data["ring_extents"] = list(data["ring_extents"])
        if data["ring_cell_sizes"] is not None:
            data["ring_cell_sizes"] = list(data["ring_cell_sizes"])
        return data


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", choices=sorted(SCHEMES), default="default", help="named grid layout")
    parser.add_argument("--extents", type=_int_list, default=None, metavar="E0,E1,...",
                        help="custom ring extents (overrides --scheme, needs --cell-sizes)")
    parser.add_argument("--cell-sizes", type=_int_list, default=None, metavar="S0,S1,...",
                        help="custom per-ring cell sizes")


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    _add_grid_flags(parser)
    parser.add_argument("--threshold", type=float, default=4.0, help="peak detection threshold")
    parser.add_argument("--top", type=int, default=3, help="top-k vote depth for backprojection")
    parser.add_argument("--min-stuff-area", type=int, default=4096,
                        help="minimum stuff segment area at full resolution")
    parser.add_argument("--scale", type=int, default=4, help="working-resolution scale factor")
    parser.add_argument("--connectivity", type=int, choices=(4, 8), default=8,
                        help="peak region connectivity")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    defaults = RunConfig()
    return RunConfig(
        scheme=args.scheme,
        ring_extents=args.extents,
        ring_cell_sizes=args.cell_sizes,
        threshold=getattr(args, "threshold", defaults.threshold),
        top=getattr(args, "top", defaults.top),
        min_stuff_area=getattr(args, "min_stuff_area", defaults.min_stuff_area),
        scale=getattr(args, "scale", defaults.scale),
        connectivity=getattr(args, "connectivity", defaults.connectivity),
        seed=getattr(args, "seed", defaults.seed),
    )


def _write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _write_config_echo(report_path: Path, config: dict) -> Path:
    return _write_json(report_path.with_name(report_path.stem + ".config.json"), config)


_TABLE_COLUMNS = ["PQ", "SQ", "RQ", "PQ_thing", "SQ_thing", "RQ_thing", "PQ_stuff", "SQ_stuff", "RQ_stuff"]


def _print_summary_table(rows: list[tuple[str, dict[str, float]]]) -> None:
    header = ["", "PQ", "SQ", "RQ", "PQ_th", "SQ_th", "RQ_th", "PQ_st", "SQ_st", "RQ_st"]
    print("  ".join(f"{h:>8s}" for h in header))
    for label, summary in rows:
        cells = [f"{label:>8s}"] + [f"{summary[c]:8.2f}" for c in _TABLE_COLUMNS]
        print("  ".join(cells))


def _cmd_gridinfo(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    spec = config.grid_spec()
    table = build_grid(spec)
    label = args.scheme if args.extents is None else "custom"
    print(f"grid {label}: side {spec.side}, {spec.num_cells} cells, {spec.num_rings} rings")
    inner = 0
    for ring, (extent, size) in enumerate(zip(spec.ring_extents, spec.ring_cell_sizes)):
        count = (extent // size) ** 2 - (inner // size) ** 2
        print(f"  ring {ring}: extent {extent}, cell size {size}, {count} cells")
        inner = extent
    print(f"K = {spec.num_cells}")
    if args.out:
        path = save_png(grid_image(table), Path(args.out))
        print(f"wrote {path}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    grid = config.grid_spec()
    specs = corpus_specs(args.scenes, seed=args.seed, size=args.image_size)
    oracle_stats, ceiling_stats = run_corpus(specs, grid, config.settings(), jobs=args.jobs)

    config_echo = config.echo()
    config_echo.update({"command": "oracle", "scenes": args.scenes, "image_size": args.image_size})
    report = {
        "config": config_echo,
        "num_cells": grid.num_cells,
        "oracle": oracle_stats.to_dict(),
        "ceiling": ceiling_stats.to_dict(),
    }
    _print_summary_table(
        [("oracle", oracle_stats.summarize()), ("1/4 gt", ceiling_stats.summarize())]
    )
    if args.report:
        path = _write_json(Path(args.report), report)
        _write_config_echo(path, config_echo)
        print(f"wrote {path}")
    return 0


def _cmd_eval_pq(args: argparse.Namespace) -> int:
    pred_archive = PanopticArchive.open(args.pred, args.pred_dir)
    gt_archive = PanopticArchive.open(args.gt, args.gt_dir)
    vocabulary = gt_archive.category_table
    if not vocabulary:
        raise ValueError(f"{args.gt}: ground-truth archive has no category table")

    totals = PQStats()
    for image_id in gt_archive.image_ids():
        gt_map = annotation_to_map(gt_archive.read(image_id))
        pred_map = annotation_to_map(pred_archive.read(image_id))
        totals += evaluate(pred_map, gt_map, vocabulary)
    _print_summary_table([("all", totals.summarize())])
    print(f"images: {len(gt_archive.image_ids())}")
    if args.report:
        config_echo = {"command": "eval-pq", "pred": str(args.pred), "gt": str(args.gt)}
        path = _write_json(Path(args.report), {"config": config_echo, "result": totals.to_dict()})
        _write_config_echo(path, config_echo)
        print(f"wrote {path}")
    return 0


def _load_votes(args: argparse.Namespace, num_cells: int) -> VoteTensor:
    array, header = load_tensor(args.votes)
    if array.ndim != 3:
        raise ValueError(f"{args.votes}: vote tensor must be (H, W, K+1), got shape {array.shape}")
    if array.shape[2] != num_cells + 1:
        raise ValueError(
            f"{args.votes}: {array.shape[2]} channels but the grid needs {num_cells + 1}"
        )
    votes = VoteTensor(probs=array.astype(np.float64))
    votes.validate()
    return votes


def _scene_pipeline(config: RunConfig, args: argparse.Namespace):
    """Synthetic working-resolution scene -> (votes, semantic, annotation)."""
    table = build_grid(config.grid_spec())
    spec = SceneSpec(
        height=args.image_size,
        width=args.image_size,
        occlusion="stacked",
        cluster_fraction=0.35,
        scale_range=(4.0, args.image_size / 2.5),
        seed=args.seed,
    )
    ann = generate(spec)
    labels = encode_labels(ann, table)
    return table, one_hot_votes(labels, table), labels.semantic, ann


def _cmd_render(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    out_dir = Path(args.out_dir)
    wants = [name for name in ("heatmap", "peaks", "masks") if getattr(args, name)]
    if not wants:
        wants = ["heatmap", "peaks", "masks"]

    if args.votes:
        table = build_grid(config.grid_spec())
        votes = _load_votes(args, table.num_cells)
    else:
        table, votes, _, _ = _scene_pipeline(config, args)
    heat = aggregate_votes(votes, table)
    regions = find_peaks(heat, config.threshold, config.connectivity)

    written = []
    if "heatmap" in wants:
        written.append(save_png(heatmap_image(heat), out_dir / "heatmap.png"))
    if "peaks" in wants:
        written.append(save_png(regions_image(heat.shape, regions), out_dir / "peaks.png"))
    if "masks" in wants:
        masks = backproject(regions, top_votes(votes, config.top), invert_grid(table), heat)
        written.append(save_png(masks_image(heat.shape, masks, len(regions)), out_dir / "masks.png"))
    config_echo = config.echo()
    config_echo.update({"command": "render", "artifacts": [p.name for p in written]})
    _write_json(out_dir / "config.json", config_echo)
    for path in written:
        print(f"wrote {path}")
    print(f"{len(regions)} peak regions")
    return 0


def _load_categories(path: str | Path) -> dict[int, bool]:
    payload = json.loads(Path(path).read_text())
    if isinstance(payload, dict):
        payload = payload.get("categories", [])
    return {int(cat["id"]): bool(cat.get("isthing", 0)) for cat in payload}


def _cmd_infer(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    table = build_grid(config.grid_spec())
    votes = _load_votes(args, table.num_cells)

    semantic, _ = load_tensor(args.semantic)
    if semantic.ndim == 3:
        semantic = semantic.argmax(axis=2)
    if semantic.shape != votes.shape:
        raise ValueError(
            f"semantic map shape {semantic.shape} does not match votes {votes.shape}"
        )
    semantic = semantic.astype(np.int32)
    categories = _load_categories(args.categories)
    thing_categories = {cat for cat, flag in categories.items() if flag}

    heat = aggregate_votes(votes, table)
    regions = find_peaks(heat, config.threshold, config.connectivity)
    masks = backproject(regions, top_votes(votes, config.top), invert_grid(table), heat)
    pmap = fuse(masks, semantic, thing_categories, config.min_stuff_area, config.scale)

    out_dir = Path(args.out_dir)
    writer = ArchiveWriter(out_dir / "panoptic.json", categories, out_dir / "panoptic")
    writer.add(args.image_id, pmap)
    index_path = writer.finish()
    config_echo = config.echo()
    config_echo.update({"command": "infer", "votes": str(args.votes), "semantic": str(args.semantic)})
    _write_config_echo(index_path, config_echo)
    print(f"wrote {index_path}")
    print(f"{len(regions)} peak regions, {sum(1 for s in pmap.segments if s.is_thing)} instances")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pixelvote", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gridinfo", help="print a grid layout and render its cell partition")
    _add_grid_flags(p)
    p.add_argument("--out", default=None, help="write the cell partition PNG here")
    p.set_defaults(func=_cmd_gridinfo)

    p = sub.add_parser("oracle", help="seeded synthetic oracle experiment with 1/4-gt ceiling")
    _add_pipeline_flags(p)
    p.add_argument("--scenes", type=int, default=50, help="number of corpus scenes")
    p.add_argument("--seed", type=int, default=0, help="corpus seed")
    p.add_argument("--image-size", type=int, default=256, help="full-resolution scene side")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (result-invariant)")
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("eval-pq", help="score a prediction archive against ground truth")
    p.add_argument("--pred", required=True, help="prediction archive JSON")
    p.add_argument("--pred-dir", default=None, help="prediction PNG directory")
    p.add_argument("--gt", required=True, help="ground-truth archive JSON")
    p.add_argument("--gt-dir", default=None, help="ground-truth PNG directory")
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.set_defaults(func=_cmd_eval_pq)

    p = sub.add_parser("render", help="write heatmap / peak / mask PNGs for one scene")
    _add_pipeline_flags(p)
    p.add_argument("--seed", type=int, default=0, help="synthetic scene seed")
    p.add_argument("--image-size", type=int, default=128, help="scene side (working resolution)")
    p.add_argument("--votes", default=None, help="render a vote tensor file instead of a scene")
    p.add_argument("--out-dir", required=True, help="directory for the PNGs")
    p.add_argument("--heatmap", action="store_true", help="write heatmap.png")
    p.add_argument("--peaks", action="store_true", help="write peaks.png")
    p.add_argument("--masks", action="store_true", help="write masks.png")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("infer", help="run the pipeline on supplied vote/semantic tensors")
    _add_pipeline_flags(p)
    p.add_argument("--votes", required=True, help="vote tensor file (H, W, K+1)")
    p.add_argument("--semantic", required=True, help="semantic tensor file (H, W) or (H, W, C)")
    p.add_argument("--categories", required=True, help="category table JSON with isthing flags")
    p.add_argument("--image-id", type=int, default=1, help="image id for the output archive")
    p.add_argument("--out-dir", required=True, help="directory for the panoptic archive")
    p.set_defaults(func=_cmd_infer)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean message, nonzero exit
        print(f"pixelvote {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
