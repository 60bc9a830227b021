import json

import numpy as np
import pytest

from pixelvote.cli import main
from pixelvote.encode import encode_labels
from pixelvote.fuse import annotation_to_map
from pixelvote.grid import build_grid, scheme
from pixelvote.panoptic_io import ArchiveWriter, PanopticArchive, save_tensor
from pixelvote.synth import SceneSpec, generate, one_hot_votes


class TestGridinfo:
    def test_prints_k_233(self, capsys):
        assert main(["gridinfo", "--scheme", "default"]) == 0
        out = capsys.readouterr().out
        assert "K = 233" in out

    def test_writes_partition_png(self, tmp_path, capsys):
        assert main(["gridinfo", "--scheme", "toy", "--out", str(tmp_path / "grid.png")]) == 0
        assert (tmp_path / "grid.png").exists()

    def test_custom_layout(self, capsys):
        assert main(["gridinfo", "--extents", "3,9", "--cell-sizes", "1,3"]) == 0
        assert "K = 17" in capsys.readouterr().out

    def test_invalid_layout_fails(self, capsys):
        assert main(["gridinfo", "--extents", "3,13", "--cell-sizes", "1,3"]) == 1
        assert "ring 1" in capsys.readouterr().err


class TestOracleCommand:
    def _run(self, tmp_path, name, jobs):
        report = tmp_path / name
        code = main(
            [
                "oracle", "--scheme", "toy", "--scenes", "6", "--seed", "11",
                "--image-size", "96", "--jobs", str(jobs), "--report", str(report),
            ]
        )
        assert code == 0
        return report.read_bytes()

    def test_repeat_runs_byte_identical(self, tmp_path, capsys):
        first = self._run(tmp_path, "a.json", 1)
        second = self._run(tmp_path, "b.json", 1)
        assert first == second

    def test_jobs_invariant(self, tmp_path, capsys):
        serial = self._run(tmp_path, "serial.json", 1)
        parallel = self._run(tmp_path, "parallel.json", 2)
        assert serial == parallel

    def test_config_echo_beside_report(self, tmp_path, capsys):
        self._run(tmp_path, "run.json", 1)
        echo = json.loads((tmp_path / "run.config.json").read_text())
        assert echo["threshold"] == 4.0
        assert echo["top"] == 3
        assert echo["min_stuff_area"] == 4096
        assert echo["scale"] == 4
        assert echo["scenes"] == 6
        report = json.loads((tmp_path / "run.json").read_text())
        assert report["config"] == echo


class TestEvalPq:
    def _archive(self, tmp_path, name, seeds):
        categories = {1: True, 2: True, 3: True, 4: True, 5: True, 20: False, 21: False}
        writer = ArchiveWriter(tmp_path / name, categories)
        for image_id, seed in enumerate(seeds, start=1):
            ann = generate(SceneSpec(height=48, width=48, seed=seed, occlusion="stacked"))
            writer.add(image_id, annotation_to_map(ann))
        writer.finish()
        return tmp_path / name

    def test_identical_archives_score_100(self, tmp_path, capsys):
        gt = self._archive(tmp_path, "gt.json", [4, 9])
        pred = self._archive(tmp_path, "pred.json", [4, 9])
        report = tmp_path / "eval.json"
        assert main(["eval-pq", "--pred", str(pred), "--gt", str(gt), "--report", str(report)]) == 0
        out = capsys.readouterr().out
        assert "100.00" in out
        payload = json.loads(report.read_text())
        assert payload["result"]["summary"]["PQ"] == 100.0

    def test_missing_archive_errors(self, tmp_path, capsys):
        gt = self._archive(tmp_path, "gt.json", [4])
        assert main(["eval-pq", "--pred", str(tmp_path / "nope.json"), "--gt", str(gt)]) == 1
        assert "eval-pq" in capsys.readouterr().err


class TestRender:
    def test_writes_all_artifacts(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            ["render", "--scheme", "toy", "--seed", "2", "--image-size", "48", "--out-dir", str(out)]
        )
        assert code == 0
        for name in ("heatmap.png", "peaks.png", "masks.png", "config.json"):
            assert (out / name).exists()

    def test_selective_artifacts(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(
            ["render", "--scheme", "toy", "--image-size", "32", "--out-dir", str(out), "--heatmap"]
        ) == 0
        assert (out / "heatmap.png").exists()
        assert not (out / "masks.png").exists()


class TestInfer:
    def test_pipeline_from_tensor_files(self, tmp_path, capsys):
        table = build_grid(scheme("toy"))
        ann = generate(SceneSpec(height=48, width=48, seed=3, scale_range=(6.0, 16.0)))
        labels = encode_labels(ann, table)
        votes = one_hot_votes(labels, table)
        save_tensor(tmp_path / "votes.bin", votes.probs, {"abstention_channel": table.num_cells})
        save_tensor(tmp_path / "semantic.bin", labels.semantic)
        cats = [{"id": cat, "isthing": int(flag)} for cat, flag in sorted(ann.categories().items())]
        (tmp_path / "cats.json").write_text(json.dumps({"categories": cats}))

        out = tmp_path / "out"
        code = main(
            [
                "infer", "--scheme", "toy",
                "--votes", str(tmp_path / "votes.bin"),
                "--semantic", str(tmp_path / "semantic.bin"),
                "--categories", str(tmp_path / "cats.json"),
                "--min-stuff-area", "1",
                "--out-dir", str(out),
            ]
        )
        assert code == 0
        archive = PanopticArchive.open(out / "panoptic.json", out / "panoptic")
        back = archive.read(1)
        things = [sid for sid, info in back.segments.items() if info.is_thing]
        wanted = [sid for sid, info in ann.segments.items() if info.is_thing]
        assert len(things) == len(wanted)
        assert (out / "panoptic.config.json").exists()

    def test_channel_mismatch_fails(self, tmp_path, capsys):
        save_tensor(tmp_path / "votes.bin", np.zeros((4, 4, 5)))
        save_tensor(tmp_path / "semantic.bin", np.zeros((4, 4), dtype=np.int32))
        (tmp_path / "cats.json").write_text(json.dumps([{"id": 1, "isthing": 1}]))
        code = main(
            [
                "infer", "--scheme", "toy",
                "--votes", str(tmp_path / "votes.bin"),
                "--semantic", str(tmp_path / "semantic.bin"),
                "--categories", str(tmp_path / "cats.json"),
                "--out-dir", str(tmp_path / "out"),
            ]
        )
        assert code == 1
        assert "channels" in capsys.readouterr().err

    def test_missing_votes_file(self, tmp_path, capsys):
        (tmp_path / "cats.json").write_text("[]")
        code = main(
            [
                "infer", "--votes", str(tmp_path / "absent.bin"),
                "--semantic", str(tmp_path / "absent2.bin"),
                "--categories", str(tmp_path / "cats.json"),
                "--out-dir", str(tmp_path / "out"),
            ]
        )
        assert code == 1


class TestArgumentErrors:
    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["oracle", "--frobnicate"])
        assert excinfo.value.code == 2

    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["transmogrify"])
        assert excinfo.value.code == 2
