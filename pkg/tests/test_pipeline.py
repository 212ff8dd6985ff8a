"""Per-frame pipeline and sequence synthesis."""

from dataclasses import replace

import numpy as np
import pytest

from conftest import tiny_sequence
from layercast.formats import (
    layer_paths,
    read_layer_index,
    read_manifest,
    write_gray_pgm,
)
from layercast.fusion import fuse, load_grid
from layercast.images import DepthImage
from layercast.metrics import _TAG_INIT, _TAG_LIVE
from layercast.pipeline import (
    PipelineConfig,
    process_frame,
    synthesize_depth,
    synthesize_sequence,
    worker_count,
)
from layercast.scene import render_rgbd
from layercast.segmentation import build_background_model

STAGES = {"fuse", "cast_primary", "segment", "cast_secondary", "compose"}


class TestWorkerCount:
    def test_default_caps_at_eight(self, monkeypatch):
        monkeypatch.delenv("LAYERED_DR_THREADS", raising=False)
        import os

        assert worker_count() == max(1, min(8, os.cpu_count() or 1))

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("LAYERED_DR_THREADS", "3")
        assert worker_count() == 3

    def test_zero_clamps_to_one(self, monkeypatch):
        monkeypatch.setenv("LAYERED_DR_THREADS", "0")
        assert worker_count() == 1

    def test_garbage_raises(self, monkeypatch):
        monkeypatch.setenv("LAYERED_DR_THREADS", "many")
        with pytest.raises(ValueError):
            worker_count()


@pytest.fixture(scope="module")
def rig():
    """One live frame pair plus a background model for the tiny sequence."""
    seq = tiny_sequence()
    config = replace(PipelineConfig(), grid=seq.grid)
    cam_a, cam_b = seq.side_cameras
    bare = seq.scene.without_occluders()
    init_depths = [
        synthesize_depth(
            render_rgbd(bare, cam_a, i, seq.noise, camera_tag=_TAG_INIT),
            render_rgbd(bare, cam_b, i, seq.noise, camera_tag=_TAG_INIT + 1),
            seq.target_camera,
            config,
        )
        for i in range(seq.n_init)
    ]
    model = build_background_model(init_depths)
    pair = (
        render_rgbd(seq.scene, cam_a, 0, seq.noise, camera_tag=_TAG_LIVE),
        render_rgbd(seq.scene, cam_b, 0, seq.noise, camera_tag=_TAG_LIVE + 1),
    )
    xray = np.zeros((seq.target_camera.height, seq.target_camera.width), np.uint8)
    return seq, config, model, pair, xray


class TestSynthesizeDepth:
    def test_returns_target_view_depth(self, rig):
        seq, config, _, pair, _ = rig
        depth = synthesize_depth(pair[0], pair[1], seq.target_camera, config)
        assert isinstance(depth, DepthImage)
        assert depth.data.shape == (seq.target_camera.height, seq.target_camera.width)
        assert np.count_nonzero(depth.data) > 1000


class TestProcessFrame:
    def test_layers_and_timings(self, rig):
        seq, config, model, pair, xray = rig
        result = process_frame(pair[0], pair[1], seq.target_camera, model, xray,
                               config, index=7)
        assert result.index == 7
        layers = result.layers
        h, w = seq.target_camera.height, seq.target_camera.width
        assert layers.fg_color.data.shape == (h, w, 3)
        assert layers.mask.shape == (h, w)
        assert set(result.timings_ms) == STAGES
        assert all(ms >= 0.0 for ms in result.timings_ms.values())
        # The slab must be segmented and mostly recovered.
        assert layers.mask.sum() > 50
        assert (layers.mask & layers.bg_valid).sum() > 0.5 * layers.mask.sum()

    def test_dump_grid_round_trips(self, rig, tmp_path):
        seq, config, model, pair, xray = rig
        path = tmp_path / "frame.grid"
        process_frame(pair[0], pair[1], seq.target_camera, model, xray, config,
                      dump_grid_path=path)
        loaded, header = load_grid(path)
        direct = fuse(pair[0], pair[1], config.grid, config.fusion)
        assert header["visibility_rule"] == config.fusion.visibility_rule
        assert loaded.spec == config.grid
        assert np.array_equal(loaded.tsdf, direct.tsdf)
        assert np.array_equal(loaded.weight_sum, direct.weight_sum)
        assert np.array_equal(loaded.color, direct.color)


class TestSynthesizeSequence:
    def test_outputs_per_frame_layers_and_index(self, tiny_rig, tmp_path):
        seq, manifest_path = tiny_rig
        manifest = read_manifest(manifest_path)
        config = replace(PipelineConfig(), grid=seq.grid)
        out = tmp_path / "layers"
        results = synthesize_sequence(manifest, manifest_path.parent, out, config)
        assert [r.index for r in results] == [0, 1, 2]
        for index in range(3):
            for name in layer_paths(index).values():
                assert (out / name).exists(), name
        assert (out / "xray.pgm").exists()
        index_doc = read_layer_index(out)
        assert index_doc["sequence"] == "tiny-slab"
        assert [f["index"] for f in index_doc["frames"]] == [0, 1, 2]
        assert index_doc["xray"] == "xray.pgm"

    def test_missing_live_frame_file_is_named(self, tiny_rig, tmp_path):
        seq, manifest_path = tiny_rig
        manifest = read_manifest(manifest_path)
        bad_entry = replace(
            manifest.frames[1], depth_paths=("does_not_exist.pgm",
                                             manifest.frames[1].depth_paths[1])
        )
        bad = replace(manifest, frames=(manifest.frames[0], bad_entry))
        config = replace(PipelineConfig(), grid=seq.grid)
        with pytest.raises(FileNotFoundError, match="frame 1.*does_not_exist"):
            synthesize_sequence(bad, manifest_path.parent, tmp_path / "out", config)

    def test_empty_init_frames_raise(self, tiny_rig, tmp_path):
        seq, manifest_path = tiny_rig
        manifest = replace(read_manifest(manifest_path), init_frames=())
        config = replace(PipelineConfig(), grid=seq.grid)
        with pytest.raises(ValueError, match="initialization"):
            synthesize_sequence(manifest, manifest_path.parent, tmp_path / "out",
                                config)

    def test_wrong_size_overlay_raises(self, tiny_rig, tmp_path):
        seq, manifest_path = tiny_rig
        write_gray_pgm(tmp_path / "bad_xray.pgm", np.zeros((6, 8), np.uint8))
        manifest = replace(read_manifest(manifest_path), xray_path="bad_xray.pgm")
        config = replace(PipelineConfig(), grid=seq.grid)
        with pytest.raises(ValueError, match="overlay"):
            synthesize_sequence(manifest, tmp_path, tmp_path / "out", config)

    def test_worker_count_does_not_change_bytes(self, tiny_rig, tmp_path,
                                                monkeypatch):
        seq, manifest_path = tiny_rig
        manifest = read_manifest(manifest_path)
        config = replace(PipelineConfig(), grid=seq.grid)
        outputs = {}
        for workers in ("1", "4"):
            monkeypatch.setenv("LAYERED_DR_THREADS", workers)
            out = tmp_path / f"w{workers}"
            synthesize_sequence(manifest, manifest_path.parent, out, config)
            outputs[workers] = {
                p.name: p.read_bytes() for p in sorted(out.iterdir())
            }
        assert outputs["1"].keys() == outputs["4"].keys()
        for name in outputs["1"]:
            assert outputs["1"][name] == outputs["4"][name], name
