"""On-disk interchange formats.

* Color images: binary PPM (P6), 8-bit.
* Depth images: binary PGM (P5), 16-bit big-endian, millimeters, 0 = invalid.
* Masks and grayscale images: binary PGM (P5), 8-bit.
* Sequence manifests: a JSON document naming, per frame, the two side-camera
  image files, the rigid calibration of both side cameras, the target-view
  camera, and the overlay image to blend in.

PNG encoding (for the HTTP service and optional CLI output) goes through
Pillow so the bytes are reproducible for identical pixel content.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import Camera, CameraIntrinsics, CameraPose
from .images import ColorImage, DepthImage

# ---------------------------------------------------------------------------
# Netpbm primitives
# ---------------------------------------------------------------------------


def _read_netpbm_header(stream) -> tuple[str, int, int, int]:
    """Parse a P5/P6 header, returning (magic, width, height, maxval)."""
    magic = stream.read(2).decode("ascii")
    if magic not in ("P5", "P6"):
        raise ValueError(f"unsupported netpbm magic {magic!r}")
    fields = []
    while len(fields) < 3:
        line = stream.readline()
        if not line:
            raise ValueError("truncated netpbm header")
        text = line.split(b"#", 1)[0]
        fields.extend(int(tok) for tok in text.split())
    width, height, maxval = fields[:3]
    return magic, width, height, maxval


def write_color_ppm(path, image: ColorImage) -> None:
    """Write an 8-bit RGB image as binary PPM (P6)."""
    with open(path, "wb") as f:
        f.write(f"P6\n{image.width} {image.height}\n255\n".encode("ascii"))
        f.write(image.data.tobytes())


def read_color_ppm(path) -> ColorImage:
    with open(path, "rb") as f:
        magic, width, height, maxval = _read_netpbm_header(f)
        if magic != "P6" or maxval != 255:
            raise ValueError(f"{path}: expected 8-bit P6, got {magic} maxval={maxval}")
        raw = f.read(width * height * 3)
    data = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
    return ColorImage(data.copy())


def write_depth_pgm(path, image: DepthImage) -> None:
    """Write depth as 16-bit big-endian PGM in millimeters (0 = invalid).

    Depths are rounded to the nearest millimeter; values beyond the 16-bit
    range (about 65.5 m) are clipped.
    """
    mm = np.floor(image.data * 1000.0 + 0.5)
    mm = np.clip(mm, 0, 65535).astype(">u2")
    with open(path, "wb") as f:
        f.write(f"P5\n{image.width} {image.height}\n65535\n".encode("ascii"))
        f.write(mm.tobytes())


def read_depth_pgm(path) -> DepthImage:
    with open(path, "rb") as f:
        magic, width, height, maxval = _read_netpbm_header(f)
        if magic != "P5" or maxval != 65535:
            raise ValueError(f"{path}: expected 16-bit P5, got {magic} maxval={maxval}")
        raw = f.read(width * height * 2)
    mm = np.frombuffer(raw, dtype=">u2").reshape(height, width)
    return DepthImage(mm.astype(np.float64) / 1000.0)


def write_gray_pgm(path, data: np.ndarray) -> None:
    """Write an 8-bit grayscale image (or 0/255 mask) as binary PGM."""
    arr = np.asarray(data)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    if arr.dtype != np.uint8 or arr.ndim != 2:
        raise ValueError("expected a 2-D uint8 or bool array")
    with open(path, "wb") as f:
        f.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii"))
        f.write(arr.tobytes())


def read_gray_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic, width, height, maxval = _read_netpbm_header(f)
        if magic != "P5" or maxval != 255:
            raise ValueError(f"{path}: expected 8-bit P5, got {magic} maxval={maxval}")
        raw = f.read(width * height)
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width).copy()


def read_mask_pgm(path) -> np.ndarray:
    """Read an 8-bit PGM as a boolean mask (255 = True)."""
    return read_gray_pgm(path) == 255


def encode_png(array: np.ndarray) -> bytes:
    """Encode an image array (grayscale or RGB uint8) as PNG bytes."""
    arr = np.asarray(array)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Camera / manifest serialization
# ---------------------------------------------------------------------------


def camera_to_dict(camera: Camera) -> dict:
    intr = camera.intrinsics
    return {
        "intrinsics": {
            "fx": intr.fx,
            "fy": intr.fy,
            "cx": intr.cx,
            "cy": intr.cy,
            "width": intr.width,
            "height": intr.height,
        },
        "rotation": camera.pose.rotation.tolist(),
        "translation": camera.pose.translation.tolist(),
    }


def camera_from_dict(d: dict) -> Camera:
    i = d["intrinsics"]
    intr = CameraIntrinsics(
        fx=float(i["fx"]),
        fy=float(i["fy"]),
        cx=float(i["cx"]),
        cy=float(i["cy"]),
        width=int(i["width"]),
        height=int(i["height"]),
    )
    pose = CameraPose(np.array(d["rotation"], dtype=np.float64),
                      np.array(d["translation"], dtype=np.float64))
    return Camera(intr, pose)


@dataclass(frozen=True)
class FrameEntry:
    """One manifest frame: per-side-camera image file paths."""

    index: int
    depth_paths: tuple[str, str]
    color_paths: tuple[str, str]


@dataclass(frozen=True)
class SequenceManifest:
    """A recorded or synthesized sequence, as stored on disk.

    ``init_frames`` show the bare background and feed the background model;
    ``frames`` are the live frames to synthesize.  Paths are relative to the
    manifest's directory.
    """

    name: str
    side_cameras: tuple[Camera, Camera]
    target_camera: Camera
    xray_path: str
    init_frames: tuple[FrameEntry, ...]
    frames: tuple[FrameEntry, ...]


def _frame_to_dict(entry: FrameEntry) -> dict:
    return {
        "index": entry.index,
        "views": [
            {"depth": entry.depth_paths[k], "color": entry.color_paths[k]}
            for k in range(2)
        ],
    }


def _frame_from_dict(d: dict) -> FrameEntry:
    views = d["views"]
    if len(views) != 2:
        raise ValueError(f"frame {d.get('index')}: expected 2 views, got {len(views)}")
    return FrameEntry(
        index=int(d["index"]),
        depth_paths=(views[0]["depth"], views[1]["depth"]),
        color_paths=(views[0]["color"], views[1]["color"]),
    )


def write_manifest(path, manifest: SequenceManifest) -> None:
    doc = {
        "name": manifest.name,
        "side_cameras": [camera_to_dict(c) for c in manifest.side_cameras],
        "target_camera": camera_to_dict(manifest.target_camera),
        "xray": manifest.xray_path,
        "init_frames": [_frame_to_dict(e) for e in manifest.init_frames],
        "frames": [_frame_to_dict(e) for e in manifest.frames],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def read_manifest(path) -> SequenceManifest:
    with open(path) as f:
        doc = json.load(f)
    cams = doc["side_cameras"]
    if len(cams) != 2:
        raise ValueError(f"{path}: expected 2 side cameras, got {len(cams)}")
    return SequenceManifest(
        name=doc["name"],
        side_cameras=(camera_from_dict(cams[0]), camera_from_dict(cams[1])),
        target_camera=camera_from_dict(doc["target_camera"]),
        xray_path=doc["xray"],
        init_frames=tuple(_frame_from_dict(d) for d in doc["init_frames"]),
        frames=tuple(_frame_from_dict(d) for d in doc["frames"]),
    )


# ---------------------------------------------------------------------------
# Synthesized layer sets on disk
# ---------------------------------------------------------------------------

LAYER_INDEX_NAME = "layers.json"


def layer_paths(frame_index: int) -> dict:
    """Canonical per-frame layer file names."""
    return {
        "fg_color": f"fg_color_{frame_index:04d}.ppm",
        "fg_depth": f"fg_depth_{frame_index:04d}.pgm",
        "mask": f"mask_{frame_index:04d}.pgm",
        "bg_color": f"bg_color_{frame_index:04d}.ppm",
        "bg_valid": f"bg_valid_{frame_index:04d}.pgm",
    }


def write_layer_index(out_dir, frame_indices, xray_name: str, extra: dict | None = None) -> None:
    doc = {
        "frames": [dict(layer_paths(i), index=i) for i in frame_indices],
        "xray": xray_name,
    }
    if extra:
        doc.update(extra)
    with open(Path(out_dir) / LAYER_INDEX_NAME, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def read_layer_index(layers_dir) -> dict:
    with open(Path(layers_dir) / LAYER_INDEX_NAME) as f:
        return json.load(f)
