"""Frame pipeline: fuse, synthesize, segment, recover, package layers.

Per-frame work is a pure function of its inputs, so frames can run on a
thread pool; outputs are byte-identical for any worker count.  The
``LAYERED_DR_THREADS`` environment variable caps the pool size.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .formats import (SequenceManifest, layer_paths, read_color_ppm,
                      read_depth_pgm, read_gray_pgm, write_color_ppm,
                      write_depth_pgm, write_gray_pgm, write_layer_index)
from .fusion import FusionParams, GridSpec, RgbdFrame, fuse, save_grid
from .geometry import Camera
from .images import DepthImage
from .raycast import (LayerSet, RaycastParams, cast_primary, cast_secondary,
                      compose_background)
from .segmentation import (BackgroundModel, SegmentationParams,
                           build_background_model, segment)

logger = logging.getLogger(__name__)

THREADS_ENV = "LAYERED_DR_THREADS"


def worker_count() -> int:
    """Worker pool size, capped by the LAYERED_DR_THREADS variable."""
    cap = os.environ.get(THREADS_ENV)
    available = os.cpu_count() or 1
    if cap is None:
        return max(1, min(8, available))
    try:
        return max(1, int(cap))
    except ValueError:
        raise ValueError(f"{THREADS_ENV}={cap!r} is not an integer") from None


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the per-frame pipeline needs besides the data."""

    grid: GridSpec = GridSpec()
    fusion: FusionParams = FusionParams()
    raycast: RaycastParams = RaycastParams()
    segmentation: SegmentationParams = SegmentationParams()


@dataclass
class FrameResult:
    index: int
    layers: LayerSet
    timings_ms: dict = field(default_factory=dict)


def synthesize_depth(frame_a: RgbdFrame, frame_b: RgbdFrame, target_camera: Camera,
                     config: PipelineConfig) -> DepthImage:
    """Fuse one frame pair and render only the depth from the target view.

    Used on initialization frames to feed the background model.
    """
    grid = fuse(frame_a, frame_b, config.grid, config.fusion)
    _, depth = cast_primary(grid, target_camera, config.raycast)
    return depth


def process_frame(frame_a: RgbdFrame, frame_b: RgbdFrame, target_camera: Camera,
                  model: BackgroundModel, xray, config: PipelineConfig,
                  index: int = 0, dump_grid_path=None) -> FrameResult:
    """Run the full per-frame pipeline and assemble a layer set."""
    timings = {}

    start = time.perf_counter()
    grid = fuse(frame_a, frame_b, config.grid, config.fusion)
    timings["fuse"] = (time.perf_counter() - start) * 1e3

    start = time.perf_counter()
    fg_color, fg_depth = cast_primary(grid, target_camera, config.raycast)
    timings["cast_primary"] = (time.perf_counter() - start) * 1e3

    start = time.perf_counter()
    mask = segment(fg_depth, model, config.segmentation)
    timings["segment"] = (time.perf_counter() - start) * 1e3

    start = time.perf_counter()
    recovered, recovered_valid = cast_secondary(grid, target_camera, fg_depth, mask,
                                                config.raycast)
    timings["cast_secondary"] = (time.perf_counter() - start) * 1e3

    start = time.perf_counter()
    bg_color, bg_valid = compose_background(fg_color, mask, recovered, recovered_valid)
    timings["compose"] = (time.perf_counter() - start) * 1e3

    if dump_grid_path is not None:
        save_grid(dump_grid_path, grid, config.fusion)

    layers = LayerSet(
        fg_color=fg_color,
        fg_depth=fg_depth,
        mask=mask,
        bg_color=bg_color,
        bg_valid=bg_valid,
        xray=xray,
    )
    return FrameResult(index=index, layers=layers, timings_ms=timings)


def _load_frame_pair(base_dir: Path, manifest: SequenceManifest, entry) -> tuple:
    pair = []
    for k in range(2):
        depth_path = base_dir / entry.depth_paths[k]
        color_path = base_dir / entry.color_paths[k]
        for p in (depth_path, color_path):
            if not p.exists():
                raise FileNotFoundError(f"frame {entry.index}: missing file {p}")
        pair.append(
            RgbdFrame(
                depth=read_depth_pgm(depth_path),
                color=read_color_ppm(color_path),
                camera=manifest.side_cameras[k],
            )
        )
    return tuple(pair)


def write_layers(out_dir, result: FrameResult) -> None:
    out = Path(out_dir)
    names = layer_paths(result.index)
    write_color_ppm(out / names["fg_color"], result.layers.fg_color)
    write_depth_pgm(out / names["fg_depth"], result.layers.fg_depth)
    write_gray_pgm(out / names["mask"], result.layers.mask)
    write_color_ppm(out / names["bg_color"], result.layers.bg_color)
    write_gray_pgm(out / names["bg_valid"], result.layers.bg_valid)


def synthesize_sequence(manifest: SequenceManifest, base_dir, out_dir,
                        config: PipelineConfig = PipelineConfig(),
                        dump_grids: bool = False) -> list[FrameResult]:
    """Synthesize layer sets for every frame of a sequence.

    ``base_dir`` anchors the manifest's relative paths; results land in
    ``out_dir`` (per-frame PPM/PGM layers plus a layers.json index).
    """
    base = Path(base_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    xray_path = base / manifest.xray_path
    if not xray_path.exists():
        raise FileNotFoundError(f"missing overlay image {xray_path}")
    xray = read_gray_pgm(xray_path)
    target = manifest.target_camera
    if xray.shape != (target.height, target.width):
        raise ValueError(
            f"overlay image {xray.shape} does not match the target view "
            f"{target.height}x{target.width}"
        )

    workers = worker_count()
    logger.info("synthesizing %d frames (%d workers)", len(manifest.frames), workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        init_pairs = [_load_frame_pair(base, manifest, e) for e in manifest.init_frames]
        if not init_pairs:
            raise ValueError("manifest has no initialization frames")
        init_depths = list(
            pool.map(lambda pair: synthesize_depth(pair[0], pair[1], target, config),
                     init_pairs)
        )
        model = build_background_model(init_depths)

        def run(entry):
            pair = _load_frame_pair(base, manifest, entry)
            dump = out / f"grid_{entry.index:04d}.bin" if dump_grids else None
            result = process_frame(pair[0], pair[1], target, model, xray, config,
                                   index=entry.index, dump_grid_path=dump)
            write_layers(out, result)
            return result

        results = list(pool.map(run, manifest.frames))

    write_gray_pgm(out / "xray.pgm", xray)
    write_layer_index(out, [r.index for r in results], "xray.pgm",
                      extra={"sequence": manifest.name})
    return results
