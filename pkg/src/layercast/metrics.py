"""Quality metrics and the benchmark runner.

Recovery percentage counts only genuinely recovered pixels: the scanline
hole fill never raises it because filled pixels keep ``bg_valid`` False.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .images import ColorImage
from .pipeline import PipelineConfig, process_frame, synthesize_depth, worker_count
from .raycast import LayerSet
from .scene import (BenchmarkSequence, background_visibility, ground_truth_mask,
                    overlay_image, render_background_truth, render_rgbd)
from .segmentation import build_background_model

# Camera tags keep the noise streams of the two side cameras and the
# initialization phase decorrelated.
_TAG_LIVE = 0
_TAG_INIT = 10


def recovery_percentage(mask: np.ndarray, bg_valid: np.ndarray) -> float:
    """Share of foreground pixels whose background was genuinely recovered.

    An empty foreground counts as fully recovered (100.0).
    """
    total = int(np.count_nonzero(mask))
    if total == 0:
        return 100.0
    recovered = int(np.count_nonzero(mask & bg_valid))
    return 100.0 * recovered / total


def background_error(recovered: ColorImage, truth: ColorImage,
                     eval_mask: np.ndarray):
    """Per-channel mean absolute color error over the evaluated pixels.

    Returns a float array (r, g, b) in [0, 255], or None when the mask is
    empty and the error is undefined.
    """
    if recovered.data.shape != truth.data.shape:
        raise ValueError("image sizes differ")
    if not np.any(eval_mask):
        return None
    diff = np.abs(recovered.data.astype(np.float64) - truth.data.astype(np.float64))
    return diff[eval_mask].mean(axis=0)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two boolean masks; 1.0 when both empty."""
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    return float(np.count_nonzero(a & b)) / union


def _run_sequence(sequence: BenchmarkSequence, noise: bool,
                  config: PipelineConfig, pool: ThreadPoolExecutor,
                  collect_layers: bool) -> dict:
    scene = sequence.scene
    target = sequence.target_camera
    cam_a, cam_b = sequence.side_cameras
    noise_model = sequence.noise if noise else None
    bare = scene.without_occluders()
    xray = overlay_image(scene, target)
    stage_totals: dict[str, float] = {}
    totals_lock = threading.Lock()

    def add_time(stage: str, ms: float):
        with totals_lock:
            stage_totals[stage] = stage_totals.get(stage, 0.0) + ms

    def render_pair(s, index, tag_base):
        start = time.perf_counter()
        pair = (
            render_rgbd(s, cam_a, index, noise_model, camera_tag=tag_base),
            render_rgbd(s, cam_b, index, noise_model, camera_tag=tag_base + 1),
        )
        add_time("render", (time.perf_counter() - start) * 1e3)
        return pair

    start = time.perf_counter()
    if noise_model is None:
        # Noise-free initialization frames are all identical; their mean is
        # any one of them.
        pair = render_pair(bare, 0, _TAG_INIT)
        init_depths = [synthesize_depth(pair[0], pair[1], target, config)]
    else:
        init_pairs = [render_pair(bare, i, _TAG_INIT) for i in range(sequence.n_init)]
        init_depths = list(
            pool.map(lambda p: synthesize_depth(p[0], p[1], target, config), init_pairs)
        )
    model = build_background_model(init_depths)
    add_time("init_model", (time.perf_counter() - start) * 1e3)

    truth = render_background_truth(scene, target)

    def run_frame(index: int):
        try:
            pair = render_pair(scene, index, _TAG_LIVE)
            result = process_frame(pair[0], pair[1], target, model, xray, config,
                                   index=index)
            layers = result.layers

            gt_mask = ground_truth_mask(scene, target, index)
            visible = background_visibility(scene, target, sequence.side_cameras, index)
            n_mask = int(np.count_nonzero(layers.mask))
            oracle_pct = (
                100.0 if n_mask == 0
                else 100.0 * int(np.count_nonzero(layers.mask & visible)) / n_mask
            )
            mae = background_error(layers.bg_color, truth,
                                   layers.mask & layers.bg_valid)
            record = {
                "index": index,
                "recovery_pct": recovery_percentage(layers.mask, layers.bg_valid),
                "oracle_pct": oracle_pct,
                "mask_iou": mask_iou(layers.mask, gt_mask),
                "bg_mae": None if mae is None else [float(c) for c in mae],
                "occluder_height_m": float(scene.occluder_height(index)),
            }
            return record, result, layers if collect_layers else None
        except Exception as exc:  # noqa: BLE001 - a bad frame must not kill the run
            return {"index": index, "error": f"{type(exc).__name__}: {exc}"}, None, None

    outcomes = list(pool.map(run_frame, range(sequence.n_frames)))

    records = []
    layer_sets: dict[int, LayerSet] = {}
    for record, result, layers in outcomes:
        records.append(record)
        if result is not None:
            for stage, ms in result.timings_ms.items():
                add_time(stage, ms)
        if layers is not None:
            layer_sets[record["index"]] = layers

    ok = [r for r in records if "error" not in r]
    maes = [np.mean(r["bg_mae"]) for r in ok if r["bg_mae"] is not None]
    summary = {
        "sequence": sequence.name,
        "frames": len(records),
        "failed_frames": len(records) - len(ok),
        "mean_recovery_pct": float(np.mean([r["recovery_pct"] for r in ok])) if ok else None,
        "mean_bg_mae": float(np.mean(maes)) if maes else None,
        "mean_mask_iou": float(np.mean([r["mask_iou"] for r in ok])) if ok else None,
        "stage_timings_ms": {k: round(v, 3) for k, v in sorted(stage_totals.items())},
        "per_frame": records,
    }
    if collect_layers:
        summary["_layers"] = layer_sets
    return summary


def run_benchmark(sequences, noise: bool = True,
                  config: PipelineConfig = PipelineConfig(),
                  grid=None, collect_layers: bool = False) -> dict:
    """Run benchmark sequences through the full pipeline.

    Args:
        sequences: BenchmarkSequence iterable.
        noise: apply each sequence's sensor noise model.
        config: pipeline parameters; the grid field is ignored in favor of
            each sequence's own grid unless ``grid`` overrides it.
        grid: optional GridSpec forced onto every sequence.
        collect_layers: keep per-frame LayerSets in the result (memory
            permitting) under the "_layers" key of each sequence entry.

    Returns:
        A JSON-ready report dict (aside from "_layers" when collected).
    """
    start = time.perf_counter()
    results = []
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for sequence in sequences:
            seq_config = replace(config, grid=grid if grid is not None else sequence.grid)
            results.append(
                _run_sequence(sequence, noise, seq_config, pool, collect_layers)
            )
    return {
        "noise": noise,
        "wall_s": round(time.perf_counter() - start, 3),
        "sequences": results,
    }


def write_report(path, report: dict) -> None:
    """Write a benchmark report as JSON, dropping in-memory layer data."""
    doc = dict(report)
    doc["sequences"] = [
        {k: v for k, v in seq.items() if not k.startswith("_")}
        for seq in report["sequences"]
    ]
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
