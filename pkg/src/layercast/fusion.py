"""Volumetric fusion of two depth cameras into a truncated signed distance field.

Every voxel center is projected into each side camera.  The truncated signed
distance for camera ``i`` is

    s_i = depth_i(pixel) - dist(voxel, center_i)
    v_i = clamp(s_i / truncation, -1, +1)

where ``depth_i`` is sampled nearest-neighbor and ``dist`` is the Euclidean
distance to that camera's optical center.  A binary visibility weight keeps
only voxels supported by the measurement; the fused value is the
weight-averaged ``v_i`` and the fused color the weight-averaged camera color.
Voxels seen by no camera keep weight 0 and are "unobserved".

With the default ``visibility_rule="standard"`` a camera votes where
``s_i > -tolerance``: the voxel lies in observed free space or at most
``tolerance`` behind the measured surface.  ``"inverted"`` keeps the opposite
half-space (votes only deeper than ``tolerance`` behind the surface); it is
retained for comparison because it hollows out the field around the real
surface and is not useful for view synthesis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._kernels import fuse_grid
from .geometry import Camera, optical_center, project
from .images import ColorImage, DepthImage, sample_depth

VISIBILITY_RULES = ("standard", "inverted")


@dataclass(frozen=True)
class RgbdFrame:
    """One camera's registered depth + color measurement."""

    depth: DepthImage
    color: ColorImage
    camera: Camera

    def __post_init__(self):
        if (self.depth.width, self.depth.height) != (self.color.width, self.color.height):
            raise ValueError(
                f"depth {self.depth.width}x{self.depth.height} and color "
                f"{self.color.width}x{self.color.height} sizes differ"
            )
        if (self.depth.width, self.depth.height) != (
            self.camera.width,
            self.camera.height,
        ):
            raise ValueError("image size does not match camera intrinsics")


@dataclass(frozen=True)
class FusionParams:
    """Fusion constants.

    truncation: signed-distance clamp in meters (field saturates at +/-1
        beyond it).
    visibility_tolerance: how far behind the measured surface a voxel may
        lie and still receive a vote, in meters.
    visibility_rule: "standard" or "inverted", see module docstring.
    """

    truncation: float = 0.002
    visibility_tolerance: float = 0.006
    visibility_rule: str = "standard"

    def __post_init__(self):
        if self.truncation <= 0.0:
            raise ValueError(f"truncation must be positive, got {self.truncation}")
        if self.visibility_tolerance < 0.0:
            raise ValueError(
                f"visibility tolerance must be non-negative, got {self.visibility_tolerance}"
            )
        if self.visibility_rule not in VISIBILITY_RULES:
            raise ValueError(
                f"visibility_rule must be one of {VISIBILITY_RULES}, got {self.visibility_rule!r}"
            )


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a cubic-voxel grid.

    dims: voxel counts (nx, ny, nz).
    voxel_size: edge length in meters.
    origin: world coordinates of the grid center.
    """

    dims: tuple[int, int, int] = (256, 256, 256)
    voxel_size: float = 0.002
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d <= 0 for d in dims):
            raise ValueError(f"dims must be three positive ints, got {self.dims}")
        if self.voxel_size <= 0.0:
            raise ValueError(f"voxel_size must be positive, got {self.voxel_size}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))

    @property
    def min_center(self) -> np.ndarray:
        """World position of voxel (0, 0, 0)'s center."""
        dims = np.array(self.dims, dtype=np.float64)
        return np.asarray(self.origin) - (dims - 1.0) / 2.0 * self.voxel_size

    @property
    def max_center(self) -> np.ndarray:
        """World position of the last voxel's center."""
        dims = np.array(self.dims, dtype=np.float64)
        return np.asarray(self.origin) + (dims - 1.0) / 2.0 * self.voxel_size

    def voxel_centers(self) -> np.ndarray:
        """World centers of all voxels, shape (nx, ny, nz, 3)."""
        nx, ny, nz = self.dims
        ii, jj, kk = np.meshgrid(
            np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"
        )
        idx = np.stack([ii, jj, kk], axis=-1).astype(np.float64)
        return self.min_center + idx * self.voxel_size


@dataclass
class VoxelGrid:
    """Fused field storage: per-voxel value, accumulated weight and color.

    Arrays are indexed ``[i, j, k]`` = (x, y, z).  ``weight_sum == 0`` marks
    unobserved voxels; their value and color are meaningless.
    """

    spec: GridSpec
    tsdf: np.ndarray = field(default=None)
    weight_sum: np.ndarray = field(default=None)
    color: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.tsdf is None:
            self.tsdf = np.ones(self.spec.dims, dtype=np.float32)
        if self.weight_sum is None:
            self.weight_sum = np.zeros(self.spec.dims, dtype=np.float32)
        if self.color is None:
            self.color = np.zeros(self.spec.dims + (3,), dtype=np.uint8)
        for name, arr in (("tsdf", self.tsdf), ("weight_sum", self.weight_sum)):
            if arr.shape != self.spec.dims:
                raise ValueError(f"{name} shape {arr.shape} != dims {self.spec.dims}")
        if self.color.shape != self.spec.dims + (3,):
            raise ValueError(f"color shape {self.color.shape} != dims + (3,)")


def truncated_distance_profile(s: np.ndarray, truncation: float) -> np.ndarray:
    """Clamp a signed distance to [-1, 1] in units of the truncation band."""
    return np.clip(np.asarray(s, dtype=np.float64) / truncation, -1.0, 1.0)


def truncated_signed_distance(frame: RgbdFrame, point, params: FusionParams):
    """Truncated signed distance of a world point w.r.t. one camera.

    Returns the clamped value in [-1, 1], or None when the point is out of
    view or the depth pixel holds no measurement.
    """
    result = project(frame.camera, point)
    if result is None:
        return None
    (u, v), _ = result
    depth = sample_depth(frame.depth, u, v)
    if depth is None:
        return None
    dist = float(np.linalg.norm(np.asarray(point, dtype=np.float64) - optical_center(frame.camera)))
    return float(truncated_distance_profile(depth - dist, params.truncation))


def visibility_weight(frame: RgbdFrame, point, params: FusionParams) -> int:
    """Binary vote of one camera for a world point (0 or 1)."""
    result = project(frame.camera, point)
    if result is None:
        return 0
    (u, v), _ = result
    depth = sample_depth(frame.depth, u, v)
    if depth is None:
        return 0
    dist = float(np.linalg.norm(np.asarray(point, dtype=np.float64) - optical_center(frame.camera)))
    s = depth - dist
    if params.visibility_rule == "standard":
        return int(s > -params.visibility_tolerance)
    return int(s < -params.visibility_tolerance)


def _kernel_args(frame: RgbdFrame):
    """Per-camera argument pack for the fusion kernel."""
    cam = frame.camera
    intr = cam.intrinsics
    return (
        np.ascontiguousarray(frame.depth.data),
        np.ascontiguousarray(frame.color.data),
        np.ascontiguousarray(cam.pose.rotation),
        np.ascontiguousarray(cam.pose.translation),
        np.ascontiguousarray(optical_center(cam)),
        float(intr.fx),
        float(intr.fy),
        float(intr.cx),
        float(intr.cy),
    )


def fuse(frame_a: RgbdFrame, frame_b: RgbdFrame, spec: GridSpec,
         params: FusionParams = FusionParams()) -> VoxelGrid:
    """Fuse two registered RGBD frames into a voxel grid.

    The result is symmetric in the frame order.  Repeated calls with the
    same inputs produce identical grids.
    """
    grid = VoxelGrid(spec)
    fuse_grid(
        *_kernel_args(frame_a),
        *_kernel_args(frame_b),
        np.ascontiguousarray(spec.min_center),
        float(spec.voxel_size),
        float(params.visibility_tolerance),
        float(params.truncation),
        params.visibility_rule == "inverted",
        grid.tsdf,
        grid.weight_sum,
        grid.color,
    )
    return grid


def field_at(grid: VoxelGrid, point) -> float | None:
    """Trilinearly interpolated field value at a world point.

    Returns None when the point lies outside the voxel-center hull or any
    of the eight surrounding voxels is unobserved.
    """
    value = field_at_many(grid, np.asarray(point, dtype=np.float64).reshape(1, 3))[0]
    if np.isnan(value):
        return None
    return float(value)


def field_at_many(grid: VoxelGrid, points: np.ndarray) -> np.ndarray:
    """Vectorized trilinear interpolation; NaN marks unobserved/outside."""
    spec = grid.spec
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    g = (pts - spec.min_center) / spec.voxel_size
    dims = np.array(spec.dims)
    inside = np.all((g >= 0.0) & (g <= dims - 1.0), axis=1)

    base = np.minimum(np.floor(g).astype(np.int64), dims - 2)
    base = np.clip(base, 0, None)
    frac = g - base

    out = np.full(pts.shape[0], np.nan)
    if not np.any(inside):
        return out

    b = base[inside]
    f = frac[inside]
    tsdf = grid.tsdf
    wsum = grid.weight_sum
    acc = np.zeros(b.shape[0])
    observed = np.ones(b.shape[0], dtype=bool)
    for di in (0, 1):
        for dj in (0, 1):
            for dk in (0, 1):
                ii, jj, kk = b[:, 0] + di, b[:, 1] + dj, b[:, 2] + dk
                w = (
                    (f[:, 0] if di else 1.0 - f[:, 0])
                    * (f[:, 1] if dj else 1.0 - f[:, 1])
                    * (f[:, 2] if dk else 1.0 - f[:, 2])
                )
                acc += w * tsdf[ii, jj, kk]
                observed &= wsum[ii, jj, kk] > 0.0
    out[inside] = np.where(observed, acc, np.nan)
    return out


# ---------------------------------------------------------------------------
# Grid dumps
# ---------------------------------------------------------------------------


def save_grid(path, grid: VoxelGrid, params: FusionParams = FusionParams()) -> None:
    """Dump a grid: one JSON header line, then raw little-endian arrays.

    Array order is x-fastest: tsdf (float32), weight_sum (float32), color
    (uint8 RGB per voxel).
    """
    spec = grid.spec
    header = {
        "dims": list(spec.dims),
        "voxel_size": spec.voxel_size,
        "origin": list(spec.origin),
        "truncation": params.truncation,
        "visibility_tolerance": params.visibility_tolerance,
        "visibility_rule": params.visibility_rule,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header).encode("ascii") + b"\n")
        f.write(grid.tsdf.astype("<f4").ravel(order="F").tobytes())
        f.write(grid.weight_sum.astype("<f4").ravel(order="F").tobytes())
        # RGB triples per voxel, voxels ordered x-fastest.
        f.write(np.ascontiguousarray(grid.color.transpose(2, 1, 0, 3)).tobytes())


def load_grid(path) -> tuple[VoxelGrid, dict]:
    """Load a grid dump; returns the grid and its JSON header."""
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("ascii"))
        dims = tuple(header["dims"])
        n = dims[0] * dims[1] * dims[2]
        tsdf = np.frombuffer(f.read(4 * n), dtype="<f4")
        wsum = np.frombuffer(f.read(4 * n), dtype="<f4")
        color = np.frombuffer(f.read(3 * n), dtype=np.uint8)
    spec = GridSpec(dims=dims, voxel_size=header["voxel_size"], origin=tuple(header["origin"]))
    nx, ny, nz = dims
    grid = VoxelGrid(
        spec,
        tsdf=tsdf.reshape(dims, order="F").copy(),
        weight_sum=wsum.reshape(dims, order="F").copy(),
        color=color.reshape(nz, ny, nx, 3).transpose(2, 1, 0, 3).copy(),
    )
    return grid, header
