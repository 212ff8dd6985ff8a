"""Shared plumbing for the demo scripts: output folder and a quick rig."""

from __future__ import annotations

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from layercast.fusion import GridSpec
from layercast.geometry import Camera, CameraIntrinsics, look_at
from layercast.scene import BenchmarkSequence, benchmark_suite


def output_dir(demo_name: str, description: str) -> Path:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument(
        "--out",
        default=f"demo_output/{demo_name}",
        help="directory for the demo's artifacts (default: %(default)s)",
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def camera_looking_down(eye, width=160, height=120, fx=140.0) -> Camera:
    """Camera at ``eye`` looking straight along +z (image axes = world x/y)."""
    intr = CameraIntrinsics(
        fx=fx, fy=fx, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
        width=width, height=height,
    )
    eye = np.asarray(eye, dtype=np.float64)
    return Camera(intr, look_at(eye, eye + np.array([0.0, 0.0, 1.0])))


def quick_rig() -> BenchmarkSequence:
    """Benchmark sequence 1 (open hand, 20 cm standoff) on a half-resolution
    grid, so every demo finishes in seconds on one core."""
    seq = benchmark_suite()[0]
    grid = GridSpec(dims=(109, 90, 140), voxel_size=0.003, origin=seq.grid.origin)
    seq.scene.validate_bounds(grid)
    return replace(seq, grid=grid)


def quick_layers(seq: BenchmarkSequence, n_init: int = 3):
    """One processed frame of the quick rig (enough to feed the compositor)."""
    from layercast.pipeline import PipelineConfig, process_frame, synthesize_depth
    from layercast.scene import overlay_image, render_rgbd
    from layercast.segmentation import build_background_model

    config = PipelineConfig(grid=seq.grid)
    bare = seq.scene.without_occluders()
    init = []
    for i in range(n_init):
        fa = render_rgbd(bare, seq.side_cameras[0], i, seq.noise, camera_tag=10)
        fb = render_rgbd(bare, seq.side_cameras[1], i, seq.noise, camera_tag=11)
        init.append(synthesize_depth(fa, fb, seq.target_camera, config))
    model = build_background_model(init)
    frame_a = render_rgbd(seq.scene, seq.side_cameras[0], 0, seq.noise, camera_tag=0)
    frame_b = render_rgbd(seq.scene, seq.side_cameras[1], 0, seq.noise, camera_tag=1)
    xray = overlay_image(seq.scene, seq.target_camera)
    return process_frame(frame_a, frame_b, seq.target_camera, model, xray, config).layers
