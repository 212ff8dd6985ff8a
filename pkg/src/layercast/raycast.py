"""View synthesis by raycasting a fused voxel grid.

The primary cast renders the full scene from an arbitrary (typically
occluded) viewpoint: every pixel ray marches through the grid and bisects
the first positive-to-negative crossing of the interpolated field.  The
secondary cast restarts foreground rays a safety margin behind the surface
they first hit and finds the next crossing, recovering the background that
the foreground object occludes.  ``compose_background`` merges both runs
into a complete background image and records which pixels are genuine.

Depths produced here are Euclidean distances from the viewpoint's optical
center (0 = miss), the same convention depth images use, so a synthesized
view is directly comparable to a measured one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import march_rays
from .fusion import VoxelGrid
from .geometry import Camera, pixel_rays
from .images import ColorImage, DepthImage

MISS_COLOR = (0, 0, 0)


@dataclass(frozen=True)
class RaycastParams:
    """Marching parameters.

    coarse_step: bracket search step in meters; None means one voxel size.
    refine_iters: bisection iterations inside a bracket.
    t_min, t_max: ray interval in meters, further clipped to the grid bounds.
    second_run_margin: restart offset behind the foreground surface for the
        background-recovery cast, in meters.
    """

    coarse_step: float | None = None
    refine_iters: int = 24
    t_min: float = 0.0
    t_max: float = np.inf
    second_run_margin: float = 0.04

    def __post_init__(self):
        if self.coarse_step is not None and self.coarse_step <= 0.0:
            raise ValueError(f"coarse_step must be positive, got {self.coarse_step}")
        if self.refine_iters < 0:
            raise ValueError(f"refine_iters must be >= 0, got {self.refine_iters}")
        if self.t_min < 0.0 or self.t_max < self.t_min:
            raise ValueError(f"invalid ray interval [{self.t_min}, {self.t_max}]")
        if self.second_run_margin < 0.0:
            raise ValueError(f"second_run_margin must be >= 0, got {self.second_run_margin}")


@dataclass
class LayerSet:
    """All per-frame layers required for blending.

    fg_color / fg_depth: the primary cast (foreground and visible scene).
    mask: True where a pixel shows foreground.
    bg_color: complete background image (recovered + hole-filled).
    bg_valid: True where bg_color is genuine (seen by a camera), False for
        hole-filled or unknown pixels.
    xray: 8-bit grayscale overlay registered to this view.
    """

    fg_color: ColorImage
    fg_depth: DepthImage
    mask: np.ndarray
    bg_color: ColorImage
    bg_valid: np.ndarray
    xray: np.ndarray

    def __post_init__(self):
        shape = self.fg_color.data.shape[:2]
        for name in ("mask", "bg_valid"):
            arr = getattr(self, name)
            if arr.shape != shape or arr.dtype != bool:
                raise ValueError(f"{name} must be bool with shape {shape}")
        if self.xray.shape != shape or self.xray.dtype != np.uint8:
            raise ValueError(f"xray must be uint8 with shape {shape}")
        if self.fg_depth.data.shape != shape or self.bg_color.data.shape[:2] != shape:
            raise ValueError("layer image sizes differ")


def _grid_ray_interval(grid: VoxelGrid, origin: np.ndarray, directions: np.ndarray):
    """Clip rays to the voxel-center hull; returns (t_enter, t_exit) arrays."""
    spec = grid.spec
    lo = spec.min_center
    hi = spec.max_center
    flat = directions.reshape(-1, 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / flat
        t_a = (lo - origin) * inv
        t_b = (hi - origin) * inv
    t_enter = np.nanmax(np.minimum(t_a, t_b), axis=1)
    t_exit = np.nanmin(np.maximum(t_a, t_b), axis=1)
    return t_enter, t_exit


def _march(grid: VoxelGrid, origin, directions, t_start, t_end, active,
           params: RaycastParams) -> np.ndarray:
    coarse = params.coarse_step if params.coarse_step is not None else grid.spec.voxel_size
    hit_t = np.zeros(directions.shape[0], dtype=np.float64)
    march_rays(
        grid.tsdf,
        grid.weight_sum,
        np.asarray(grid.spec.min_center, dtype=np.float64),
        1.0 / grid.spec.voxel_size,
        np.asarray(origin, dtype=np.float64),
        np.ascontiguousarray(directions, dtype=np.float64),
        np.ascontiguousarray(t_start, dtype=np.float64),
        np.ascontiguousarray(t_end, dtype=np.float64),
        np.ascontiguousarray(active, dtype=np.bool_),
        float(coarse),
        int(params.refine_iters),
        hit_t,
    )
    return hit_t


def _colors_at(grid: VoxelGrid, points: np.ndarray) -> np.ndarray:
    """Fused color of the voxel nearest to each point (uint8, N x 3)."""
    spec = grid.spec
    g = (points - spec.min_center) / spec.voxel_size
    idx = np.floor(g + 0.5).astype(np.int64)
    idx = np.clip(idx, 0, np.array(spec.dims) - 1)
    return grid.color[idx[:, 0], idx[:, 1], idx[:, 2]]


def cast_primary(grid: VoxelGrid, camera: Camera,
                 params: RaycastParams = RaycastParams()) -> tuple[ColorImage, DepthImage]:
    """Render color and depth of the fused field from a camera.

    Missed pixels get color (0, 0, 0) and depth 0.
    """
    h, w = camera.height, camera.width
    origin, directions = pixel_rays(camera)
    flat_dirs = directions.reshape(-1, 3)
    t_enter, t_exit = _grid_ray_interval(grid, origin, flat_dirs)
    t_start = np.maximum(t_enter, params.t_min)
    t_end = np.minimum(t_exit, params.t_max)
    active = t_end >= t_start

    hit_t = _march(grid, origin, flat_dirs, t_start, t_end, active, params)
    hit = hit_t > 0.0

    color = np.zeros((h * w, 3), dtype=np.uint8)
    if np.any(hit):
        points = origin + hit_t[hit, None] * flat_dirs[hit]
        color[hit] = _colors_at(grid, points)
    depth = np.where(hit, hit_t, 0.0).reshape(h, w)
    return ColorImage(color.reshape(h, w, 3)), DepthImage(depth)


def cast_secondary(grid: VoxelGrid, camera: Camera, fg_depth: DepthImage,
                   mask: np.ndarray,
                   params: RaycastParams = RaycastParams()) -> tuple[ColorImage, np.ndarray]:
    """Recover the background behind foreground pixels.

    Only pixels with ``mask`` set are traced.  Each ray restarts at the
    foreground depth plus ``params.second_run_margin`` and searches for the
    next crossing.  Returns the recovered color image and a boolean validity
    mask; pixels whose ray found no further crossing stay invalid.
    """
    h, w = camera.height, camera.width
    if mask.shape != (h, w):
        raise ValueError(f"mask shape {mask.shape} != image {h}x{w}")
    origin, directions = pixel_rays(camera)
    flat_dirs = directions.reshape(-1, 3)
    t_enter, t_exit = _grid_ray_interval(grid, origin, flat_dirs)

    flat_mask = mask.reshape(-1)
    flat_fg = fg_depth.data.reshape(-1)
    t_start = np.maximum(flat_fg + params.second_run_margin, np.maximum(t_enter, params.t_min))
    t_end = np.minimum(t_exit, params.t_max)
    active = flat_mask & (flat_fg > 0.0) & (t_end >= t_start)

    hit_t = _march(grid, origin, flat_dirs, t_start, t_end, active, params)
    hit = hit_t > 0.0

    color = np.zeros((h * w, 3), dtype=np.uint8)
    if np.any(hit):
        points = origin + hit_t[hit, None] * flat_dirs[hit]
        color[hit] = _colors_at(grid, points)
    return ColorImage(color.reshape(h, w, 3)), hit.reshape(h, w)


def compose_background(fg_color: ColorImage, mask: np.ndarray,
                       recovered: ColorImage, recovered_valid: np.ndarray
                       ) -> tuple[ColorImage, np.ndarray]:
    """Assemble the complete background image.

    Background pixels keep the primary-cast color; foreground pixels take
    the recovered color where the second run succeeded.  Remaining holes are
    filled with the nearest genuine background color along the same image
    row (ties pick the left neighbor) purely for display; ``bg_valid`` stays
    False there so they are never counted as recovered.
    """
    h, w = fg_color.data.shape[:2]
    bg = np.where(mask[..., None], recovered.data, fg_color.data).astype(np.uint8)
    bg_valid = ~mask | recovered_valid

    holes = mask & ~recovered_valid
    if np.any(holes):
        cols = np.arange(w)
        for row in np.flatnonzero(holes.any(axis=1)):
            valid_cols = np.flatnonzero(bg_valid[row])
            if valid_cols.size == 0:
                continue
            ins = np.searchsorted(valid_cols, cols)
            left = valid_cols[np.clip(ins - 1, 0, valid_cols.size - 1)]
            right = valid_cols[np.clip(ins, 0, valid_cols.size - 1)]
            d_left = np.where(ins > 0, cols - left, np.iinfo(np.int64).max)
            d_right = np.where(ins < valid_cols.size, right - cols, np.iinfo(np.int64).max)
            nearest = np.where(d_left <= d_right, left, right)
            row_holes = holes[row]
            bg[row, row_holes] = bg[row, nearest[row_holes]]
    return ColorImage(bg), bg_valid
