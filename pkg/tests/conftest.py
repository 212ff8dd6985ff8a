"""Shared fixtures: small camera rigs, a tiny exported sequence, and the
benchmark runs.

The two full benchmark reports (noisy and noise-free) take minutes each, so
they are session-scoped and computed at most once per test session; the
acceptance tests and the cross-module invariant tests share them.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from layercast.formats import read_manifest
from layercast.fusion import GridSpec, RgbdFrame
from layercast.geometry import Camera, CameraIntrinsics, look_at
from layercast.images import ColorImage, DepthImage
from layercast.metrics import run_benchmark
from layercast.pipeline import PipelineConfig, synthesize_sequence
from layercast.scene import (
    PLANE_Z,
    BenchmarkSequence,
    Marking,
    NoiseModel,
    Occluder,
    Scene,
    benchmark_suite,
    export_sequence,
)


def downward_camera(eye, width=64, height=48, fx=70.0, fy=None) -> Camera:
    """Camera at ``eye`` looking straight along +z (image axes = world x/y)."""
    intr = CameraIntrinsics(
        fx=fx,
        fy=fx if fy is None else fy,
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
        width=width,
        height=height,
    )
    eye = np.asarray(eye, dtype=np.float64)
    return Camera(intr, look_at(eye, eye + np.array([0.0, 0.0, 1.0])))


def aimed_camera(eye, target=(0.0, 0.0, PLANE_Z), width=128, height=96,
                 fx=110.0) -> Camera:
    """Small camera at ``eye`` aimed at ``target``."""
    intr = CameraIntrinsics(
        fx=fx, fy=fx, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
        width=width, height=height,
    )
    return Camera(intr, look_at(eye, target))


def constant_depth_frame(camera: Camera, depth_m: float,
                         color=(90, 120, 150)) -> RgbdFrame:
    """Ideal observation of a fronto-parallel plane: constant axis depth."""
    h, w = camera.height, camera.width
    depth = DepthImage(np.full((h, w), float(depth_m)))
    rgb = np.tile(np.asarray(color, dtype=np.uint8), (h, w, 1))
    return RgbdFrame(depth, ColorImage(rgb), camera)


def tiny_grid() -> GridSpec:
    # Voxels must stay comfortably below the 6 mm visibility tolerance or
    # the one voxel layer behind a surface gets culled under noise and the
    # interpolation cells there lose their far corners.
    return GridSpec(dims=(144, 144, 160), voxel_size=0.003, origin=(0.0, 0.0, 0.72))


def tiny_sequence(n_frames: int = 3, n_init: int = 3,
                  seed: int = 42) -> BenchmarkSequence:
    """A fast three-frame sequence: one drifting slab over a marked plane."""
    grid = tiny_grid()
    half = (0.05, 0.04, 0.015)
    z = PLANE_Z - 0.18 - half[2]
    xs = np.linspace(-0.01, 0.01, n_frames)
    occluder = Occluder("box", half, "glove",
                        tuple((float(x), 0.0, z) for x in xs))
    scene = Scene(
        PLANE_Z,
        "skin",
        (Marking(-0.03, -0.01, 0.05, -0.01, 0.004),),
        None,
        (occluder,),
    )
    scene.validate_bounds(grid)
    return BenchmarkSequence(
        name="tiny-slab",
        scene=scene,
        # Wide enough a baseline that each side camera sees past the slab;
        # most of the hidden patch is then genuinely recoverable.
        side_cameras=(aimed_camera((-0.30, 0.0, 0.0)), aimed_camera((0.30, 0.0, 0.0))),
        target_camera=aimed_camera((0.0, 0.02, 0.0)),
        grid=grid,
        noise=NoiseModel(seed=seed),
        n_init=n_init,
    )


@pytest.fixture(scope="session")
def noisy_bench() -> dict:
    """Full noisy benchmark report, with per-frame layers kept in memory."""
    return run_benchmark(benchmark_suite(), noise=True, collect_layers=True)


@pytest.fixture(scope="session")
def clean_bench() -> dict:
    """Full noise-free benchmark report."""
    return run_benchmark(benchmark_suite(), noise=False)


@pytest.fixture(scope="session")
def tiny_rig(tmp_path_factory) -> tuple[BenchmarkSequence, Path]:
    """A tiny sequence exported to disk; returns (sequence, manifest path)."""
    seq = tiny_sequence()
    out = tmp_path_factory.mktemp("tiny-seq")
    manifest_path = export_sequence(seq, out)
    return seq, Path(manifest_path)


@pytest.fixture(scope="session")
def tiny_layers_dir(tiny_rig, tmp_path_factory) -> Path:
    """Layers synthesized once from the tiny sequence, for CLI/service tests."""
    seq, manifest_path = tiny_rig
    out = tmp_path_factory.mktemp("tiny-layers")
    manifest = read_manifest(manifest_path)
    config = replace(PipelineConfig(), grid=seq.grid)
    synthesize_sequence(manifest, manifest_path.parent, out, config)
    return out
