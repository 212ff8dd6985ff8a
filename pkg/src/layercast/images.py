"""Depth and color image containers with nearest-neighbor sampling.

Depth images store meters as float64 with 0.0 marking "no measurement".
Depth values are Euclidean distances from the camera's optical center to
the surface along each pixel's ray, matching what fusion subtracts and
what raycasting reports.  Color images are 8-bit RGB.  Sampling is nearest-neighbor by design: a
depth map interpolated across an object silhouette would manufacture
phantom surfaces between foreground and background, so each lookup sticks
to a single measured pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Round to nearest integer with ties going up (0.5 -> 1, 1.5 -> 2)."""
    return np.floor(np.asarray(values) + 0.5).astype(np.int64)


@dataclass(frozen=True)
class DepthImage:
    """Per-pixel depth in meters; 0.0 means no measurement."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2:
            raise ValueError(f"depth image must be 2-D, got shape {d.shape}")
        if np.any(d < 0.0):
            raise ValueError("depth image contains negative values")
        object.__setattr__(self, "data", d)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class ColorImage:
    """8-bit RGB image."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 3 or d.shape[2] != 3:
            raise ValueError(f"color image must be (h, w, 3), got shape {d.shape}")
        if d.dtype != np.uint8:
            raise ValueError(f"color image must be uint8, got {d.dtype}")
        object.__setattr__(self, "data", d)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def _nearest_index(image_shape, u: float, v: float):
    """Nearest pixel (col, row) for continuous (u, v), or None if outside."""
    col = int(np.floor(u + 0.5))
    row = int(np.floor(v + 0.5))
    h, w = image_shape[:2]
    if col < 0 or col >= w or row < 0 or row >= h:
        return None
    return col, row

def sample_depth(image: DepthImage, u: float, v: float):
    """Nearest-neighbor depth lookup.

    Returns the depth in meters, or None when (u, v) falls outside the
    image or the nearest pixel holds no measurement.
    """
    idx = _nearest_index(image.data.shape, u, v)
    if idx is None:
        return None
    value = image.data[idx[1], idx[0]]
    if value == 0.0:
        return None
    return float(value)


def sample_color(image: ColorImage, u: float, v: float):
    """Nearest-neighbor color lookup.

    Returns an (r, g, b) uint8 triple, or None when (u, v) falls outside
    the image.
    """
    idx = _nearest_index(image.data.shape, u, v)
    if idx is None:
        return None
    return tuple(int(c) for c in image.data[idx[1], idx[0]])
