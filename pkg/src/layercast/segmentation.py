"""Depth-based foreground segmentation against a static background model.

The background model is the per-pixel mean of an initialization sequence of
depth images showing the bare scene.  A live pixel is foreground when its
depth is more than a margin closer to the camera than the modeled
background.  A morphological opening removes speckle.  Pixels without a
measurement (in the live frame or the model) are treated as background so
missing data never spawns phantom foreground.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .images import DepthImage


@dataclass(frozen=True)
class SegmentationParams:
    """margin: meters a pixel must rise above the background to count as
    foreground.  opening_radius: disc radius in pixels (0 disables the
    opening).  opening_iterations: erosion/dilation repetitions."""

    margin: float = 0.03
    opening_radius: int = 2
    opening_iterations: int = 1

    def __post_init__(self):
        if self.margin < 0.0:
            raise ValueError(f"margin must be >= 0, got {self.margin}")
        if self.opening_radius < 0 or self.opening_iterations < 0:
            raise ValueError("opening radius and iterations must be >= 0")


@dataclass(frozen=True)
class BackgroundModel:
    """Per-pixel mean background depth.

    ``valid_count`` holds how many initialization frames contributed a
    measurement to each pixel; a count of zero marks the model invalid
    there.
    """

    mean_depth: np.ndarray
    valid_count: np.ndarray

    def __post_init__(self):
        if self.mean_depth.shape != self.valid_count.shape:
            raise ValueError("mean_depth and valid_count shapes differ")

    @property
    def valid(self) -> np.ndarray:
        """Boolean mask of pixels with at least one contributing frame."""
        return self.valid_count > 0


def build_background_model(depth_images: Sequence[DepthImage]) -> BackgroundModel:
    """Average an initialization sequence into a background model.

    Each pixel averages only the frames where it carried a measurement.
    """
    if len(depth_images) == 0:
        raise ValueError("initialization sequence is empty")
    shape = depth_images[0].data.shape
    total = np.zeros(shape, dtype=np.float64)
    count = np.zeros(shape, dtype=np.int64)
    for img in depth_images:
        if img.data.shape != shape:
            raise ValueError("initialization frames have differing sizes")
        measured = img.data > 0.0
        total += np.where(measured, img.data, 0.0)
        count += measured
    mean = np.where(count > 0, total / np.maximum(count, 1), 0.0)
    return BackgroundModel(mean_depth=mean, valid_count=count)


def disc_element(radius: int) -> np.ndarray:
    """Boolean disc structuring element of the given pixel radius."""
    if radius == 0:
        return np.ones((1, 1), dtype=bool)
    span = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(span, span, indexing="ij")
    return xx * xx + yy * yy <= radius * radius


def segment_raw(depth: DepthImage, model: BackgroundModel,
                params: SegmentationParams = SegmentationParams()) -> np.ndarray:
    """Per-pixel foreground test before any morphology."""
    if depth.data.shape != model.mean_depth.shape:
        raise ValueError("depth image and background model sizes differ")
    measured = depth.data > 0.0
    return measured & model.valid & (depth.data < model.mean_depth - params.margin)


def segment(depth: DepthImage, model: BackgroundModel,
            params: SegmentationParams = SegmentationParams()) -> np.ndarray:
    """Foreground mask after morphological opening."""
    raw = segment_raw(depth, model, params)
    if params.opening_radius == 0 or params.opening_iterations == 0 or not raw.any():
        return raw
    return ndimage.binary_opening(
        raw,
        structure=disc_element(params.opening_radius),
        iterations=params.opening_iterations,
    )
