"""Pinhole camera geometry.

Conventions used throughout the package:

* World and camera frames are right-handed.  A camera looks down its own
  +z axis; +x goes right and +y goes down in the image.
* A pose maps world points into the camera frame: ``x_cam = R @ x_world + t``.
  ``R`` must be orthonormal with determinant +1.
* Pixel coordinates are continuous ``(u, v)`` with ``u`` horizontal and
  ``v`` vertical.  Integer coordinates are pixel centers, so the point that
  projects exactly to ``(3.0, 7.0)`` lands on the center of pixel column 3,
  row 7.  Image arrays are indexed ``data[v, u]``.
* No lens distortion is modeled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_POSE_TOL = 1e-9


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal lengths, principal point and image size.

    Focal lengths are in pixels.  ``width`` and ``height`` are the image
    dimensions in pixels.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0.0 or self.fy <= 0.0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        if not (0.0 <= self.cx < self.width and 0.0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image "
                f"{self.width}x{self.height}"
            )

    def to_matrix(self) -> np.ndarray:
        """Return the 3x3 calibration matrix K."""
        return np.array(
            [
                [self.fx, 0.0, self.cx],
                [0.0, self.fy, self.cy],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class CameraPose:
    """World-to-camera rigid transform ``x_cam = R @ x_world + t``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if r.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {r.shape}")
        if not np.allclose(r.T @ r, np.eye(3), atol=_POSE_TOL):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-6:
            raise ValueError(f"rotation determinant {np.linalg.det(r)} != +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "CameraPose":
        return CameraPose(np.eye(3), np.zeros(3))


@dataclass(frozen=True)
class Camera:
    """A calibrated camera: intrinsics plus world-to-camera pose."""

    intrinsics: CameraIntrinsics
    pose: CameraPose

    @property
    def width(self) -> int:
        return self.intrinsics.width

    @property
    def height(self) -> int:
        return self.intrinsics.height


def optical_center(camera: Camera) -> np.ndarray:
    """World coordinates of the camera's optical center, ``-R.T @ t``."""
    pose = camera.pose
    return -pose.rotation.T @ pose.translation


def pixel_in_bounds(intrinsics: CameraIntrinsics, u: float, v: float) -> bool:
    """True when ``(u, v)`` rounds to a pixel inside the image.

    The valid continuous range is ``[-0.5, size - 0.5)`` per axis so that
    nearest-neighbor rounding always yields a legal array index.
    """
    return (-0.5 <= u < intrinsics.width - 0.5) and (-0.5 <= v < intrinsics.height - 0.5)


def project(camera: Camera, point: np.ndarray):
    """Project a world point into the image.

    Args:
        camera: the observing camera.
        point: world point, shape (3,).

    Returns:
        ``((u, v), cam_depth)`` where ``cam_depth`` is the distance along the
        camera's optical axis, or ``None`` when the point lies behind the
        camera or projects outside the image bounds.
    """
    p = np.asarray(point, dtype=np.float64).reshape(3)
    x_cam = camera.pose.rotation @ p + camera.pose.translation
    z = x_cam[2]
    if z <= 0.0:
        return None
    intr = camera.intrinsics
    u = intr.fx * x_cam[0] / z + intr.cx
    v = intr.fy * x_cam[1] / z + intr.cy
    if not pixel_in_bounds(intr, u, v):
        return None
    return (u, v), z


def project_many(camera: Camera, points: np.ndarray):
    """Vectorized projection of an (N, 3) array of world points.

    Returns:
        Tuple ``(uv, depth, valid)``: continuous pixel coordinates (N, 2),
        optical-axis depth (N,), and a boolean validity mask that is False
        for points behind the camera or outside the image bounds.  Pixel
        coordinates and depths of invalid points are unspecified.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    x_cam = pts @ camera.pose.rotation.T + camera.pose.translation
    z = x_cam[:, 2]
    in_front = z > 0.0
    safe_z = np.where(in_front, z, 1.0)
    intr = camera.intrinsics
    u = intr.fx * x_cam[:, 0] / safe_z + intr.cx
    v = intr.fy * x_cam[:, 1] / safe_z + intr.cy
    valid = (
        in_front
        & (u >= -0.5)
        & (u < intr.width - 0.5)
        & (v >= -0.5)
        & (v < intr.height - 0.5)
    )
    return np.stack([u, v], axis=1), z, valid


def ray_through_pixel(camera: Camera, u: float, v: float):
    """World-space ray through a pixel.

    Args:
        camera: the camera.
        u, v: continuous pixel coordinates; must lie inside the image.

    Returns:
        ``(origin, direction)``: the optical center and a unit direction such
        that points ``origin + s * direction`` (s > 0) project back to (u, v).

    Raises:
        ValueError: if the pixel lies outside the image bounds.
    """
    intr = camera.intrinsics
    if not pixel_in_bounds(intr, u, v):
        raise ValueError(f"pixel ({u}, {v}) outside image {intr.width}x{intr.height}")
    d_cam = np.array([(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0])
    d_cam /= np.linalg.norm(d_cam)
    direction = camera.pose.rotation.T @ d_cam
    return optical_center(camera), direction


def pixel_rays(camera: Camera):
    """Unit ray directions for every pixel center of a camera.

    Returns:
        ``(origin, directions)`` with directions shaped (height, width, 3).
        Row ``v``, column ``u`` holds the ray through pixel center (u, v).
    """
    intr = camera.intrinsics
    u = np.arange(intr.width, dtype=np.float64)
    v = np.arange(intr.height, dtype=np.float64)
    uu, vv = np.meshgrid(u, v)
    d_cam = np.stack(
        [(uu - intr.cx) / intr.fx, (vv - intr.cy) / intr.fy, np.ones_like(uu)], axis=-1
    )
    d_cam /= np.linalg.norm(d_cam, axis=-1, keepdims=True)
    directions = d_cam @ camera.pose.rotation
    return optical_center(camera), directions


def look_at(eye, target, up=(0.0, 1.0, 0.0)) -> CameraPose:
    """Pose of a camera at ``eye`` with the optical axis toward ``target``.

    ``up`` picks the image orientation (world direction that maps near the
    image +v axis).  It must not be parallel to the viewing direction.
    """
    eye = np.asarray(eye, dtype=np.float64).reshape(3)
    target = np.asarray(target, dtype=np.float64).reshape(3)
    up = np.asarray(up, dtype=np.float64).reshape(3)
    z = target - eye
    nz = np.linalg.norm(z)
    if nz == 0.0:
        raise ValueError("eye and target coincide")
    z = z / nz
    x = np.cross(up, z)
    nx = np.linalg.norm(x)
    if nx < 1e-12:
        raise ValueError("up direction parallel to the viewing direction")
    x = x / nx
    y = np.cross(z, x)
    r = np.stack([x, y, z], axis=0)
    return CameraPose(r, -r @ eye)
