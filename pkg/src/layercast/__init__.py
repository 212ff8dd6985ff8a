"""Diminished-reality layer synthesis from a stereo pair of RGB-D cameras.

The package fuses two side RGB-D views into a truncated signed-distance
voxel grid, raycasts that grid from a virtual target viewpoint, segments
foreground occluders against a background depth model, recovers the
occluded background in a second raycast pass, and blends the resulting
layers with a procedural overlay image.

Typical flow::

    grid   = fuse(frame_a, frame_b, GridSpec(), FusionParams())
    color, depth = cast_primary(grid, target_camera, RaycastParams())
    mask   = segment(depth, background_model, SegmentationParams())
    ...

or at a higher level :func:`layercast.pipeline.process_frame` /
:func:`layercast.pipeline.synthesize_sequence`.
"""

from .compositor import BlendParams, BlendPreset, compose, find_preset, preset_table
from .fusion import (FusionParams, GridSpec, RgbdFrame, VISIBILITY_RULES,
                     VoxelGrid, fuse, load_grid, save_grid)
from .geometry import Camera, CameraIntrinsics, CameraPose, look_at
from .images import ColorImage, DepthImage
from .pipeline import (FrameResult, PipelineConfig, process_frame,
                       synthesize_depth, synthesize_sequence, worker_count)
from .raycast import (LayerSet, RaycastParams, cast_primary, cast_secondary,
                      compose_background)
from .segmentation import (BackgroundModel, SegmentationParams,
                           build_background_model, segment, segment_raw)

__version__ = "0.1.0"

__all__ = [
    "BackgroundModel",
    "BlendParams",
    "BlendPreset",
    "Camera",
    "CameraIntrinsics",
    "CameraPose",
    "ColorImage",
    "DepthImage",
    "FrameResult",
    "FusionParams",
    "GridSpec",
    "LayerSet",
    "PipelineConfig",
    "RaycastParams",
    "RgbdFrame",
    "VISIBILITY_RULES",
    "VoxelGrid",
    "build_background_model",
    "cast_primary",
    "cast_secondary",
    "compose",
    "compose_background",
    "find_preset",
    "fuse",
    "load_grid",
    "look_at",
    "preset_table",
    "process_frame",
    "save_grid",
    "segment",
    "segment_raw",
    "synthesize_depth",
    "synthesize_sequence",
    "worker_count",
    "__version__",
]
