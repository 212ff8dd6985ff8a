"""HTTP service exposing synthesized layer sets.

All endpoints are stateless ``GET`` routes keyed by URL, so responses are
cacheable:

``/api/frames``
    JSON list of available frame indices.
``/api/presets``
    JSON list of named blend presets with their weights.
``/api/frames/{i}/layer/{fg|bg|mask|xray}``
    One stored layer of frame ``i`` as PNG.
``/api/frames/{i}/compose?alpha=&beta=&gamma=&delta=``
    The blended image for frame ``i`` as PNG.  ``alpha``/``beta``/``gamma``
    weight foreground, recovered background, and overlay on foreground
    pixels and must sum to one; ``delta`` is the overlay opacity elsewhere.
    ``?preset=NAME`` may be used instead of explicit weights.
``/api/frames/{i}/metrics``
    JSON per-frame statistics (pixel counts, recovery percentage).

Invalid parameters yield ``400`` with a JSON body; unknown frames, layers,
or routes yield ``404``.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

import numpy as np

from .compositor import BlendParams, compose, find_preset, preset_table
from .formats import (encode_png, read_color_ppm, read_depth_pgm,
                      read_gray_pgm, read_layer_index, read_mask_pgm)
from .metrics import recovery_percentage
from .raycast import LayerSet

logger = logging.getLogger(__name__)

_ROUTE_FRAMES = re.compile(r"^/api/frames$")
_ROUTE_PRESETS = re.compile(r"^/api/presets$")
_ROUTE_LAYER = re.compile(r"^/api/frames/(\d+)/layer/(fg|bg|mask|xray)$")
_ROUTE_COMPOSE = re.compile(r"^/api/frames/(\d+)/compose$")
_ROUTE_METRICS = re.compile(r"^/api/frames/(\d+)/metrics$")


class LayerStore:
    """Loads layer sets from a synthesized output directory, with caching."""

    def __init__(self, layers_dir):
        self.root = Path(layers_dir)
        self.index = read_layer_index(self.root)
        self._entries = {entry["index"]: entry for entry in self.index["frames"]}
        self._xray = read_gray_pgm(self.root / self.index["xray"])
        self._cache: dict[int, LayerSet] = {}
        self._lock = threading.Lock()

    def frame_indices(self) -> list[int]:
        return sorted(self._entries)

    def __contains__(self, index: int) -> bool:
        return index in self._entries

    def layers(self, index: int) -> LayerSet:
        with self._lock:
            cached = self._cache.get(index)
        if cached is not None:
            return cached
        entry = self._entries[index]
        layers = LayerSet(
            fg_color=read_color_ppm(self.root / entry["fg_color"]),
            fg_depth=read_depth_pgm(self.root / entry["fg_depth"]),
            mask=read_mask_pgm(self.root / entry["mask"]),
            bg_color=read_color_ppm(self.root / entry["bg_color"]),
            bg_valid=read_mask_pgm(self.root / entry["bg_valid"]),
            xray=self._xray,
        )
        with self._lock:
            self._cache[index] = layers
        return layers

    def layer_png(self, index: int, name: str) -> bytes:
        layers = self.layers(index)
        if name == "fg":
            return encode_png(layers.fg_color.data)
        if name == "bg":
            return encode_png(layers.bg_color.data)
        if name == "mask":
            return encode_png(layers.mask)
        if name == "xray":
            return encode_png(layers.xray)
        raise KeyError(name)

    def metrics(self, index: int) -> dict:
        layers = self.layers(index)
        mask = layers.mask
        height, width = mask.shape
        foreground_px = int(mask.sum())
        recovered_px = int((mask & layers.bg_valid).sum())
        return {
            "index": index,
            "width": width,
            "height": height,
            "foreground_px": foreground_px,
            "recovered_px": recovered_px,
            "recovery_pct": recovery_percentage(mask, layers.bg_valid),
            "mean_fg_depth_m": (
                float(layers.fg_depth.data[mask & (layers.fg_depth.data > 0)].mean())
                if np.any(mask & (layers.fg_depth.data > 0)) else None
            ),
        }


class _BadRequest(Exception):
    pass


def _blend_params_from_query(query: dict) -> BlendParams:
    if "preset" in query:
        preset = find_preset(query["preset"][0])
        if preset is None:
            raise _BadRequest(f"unknown preset {query['preset'][0]!r}")
        return preset.params
    missing = [k for k in ("alpha", "beta", "gamma", "delta") if k not in query]
    if missing:
        raise _BadRequest(f"missing query parameters: {', '.join(missing)}")
    try:
        values = {k: float(query[k][0]) for k in ("alpha", "beta", "gamma", "delta")}
    except ValueError as exc:
        raise _BadRequest(f"non-numeric blend weight: {exc}") from exc
    try:
        return BlendParams(values["alpha"], values["beta"], values["gamma"],
                           values["delta"])
    except ValueError as exc:
        raise _BadRequest(str(exc)) from exc


def make_handler(store: LayerStore):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            logger.debug("%s %s", self.address_string(), fmt % args)

        def _send(self, status: int, content_type: str, body: bytes,
                  cache: str = "no-cache") -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Cache-Control", cache)
            self.end_headers()
            self.wfile.write(body)

        def _send_json(self, payload, status: int = 200) -> None:
            body = json.dumps(payload).encode("utf-8")
            self._send(status, "application/json", body)

        def _send_png(self, body: bytes) -> None:
            self._send(200, "image/png", body, cache="public, max-age=3600")

        def _send_error_json(self, status: int, message: str) -> None:
            self._send_json({"error": message}, status=status)

        def _frame_or_404(self, index_text: str):
            index = int(index_text)
            if index not in store:
                self._send_error_json(404, f"unknown frame {index}")
                return None
            return index

        def do_GET(self):  # noqa: N802 (http.server API)
            try:
                self._route()
            except BrokenPipeError:
                pass
            except Exception:
                logger.exception("request failed: %s", self.path)
                try:
                    self._send_error_json(500, "internal error")
                except Exception:
                    pass

        def _route(self) -> None:
            url = urlsplit(self.path)
            path = url.path.rstrip("/") or "/"

            if _ROUTE_FRAMES.match(path):
                self._send_json({"sequence": store.index.get("sequence"),
                                 "frames": store.frame_indices()})
                return
            if _ROUTE_PRESETS.match(path):
                self._send_json([
                    {"name": p.name, "alpha": p.params.alpha, "beta": p.params.beta,
                     "gamma": p.params.gamma, "delta": p.params.overlay_opacity}
                    for p in preset_table()
                ])
                return
            match = _ROUTE_LAYER.match(path)
            if match:
                index = self._frame_or_404(match.group(1))
                if index is not None:
                    self._send_png(store.layer_png(index, match.group(2)))
                return
            match = _ROUTE_COMPOSE.match(path)
            if match:
                index = self._frame_or_404(match.group(1))
                if index is None:
                    return
                try:
                    params = _blend_params_from_query(parse_qs(url.query))
                except _BadRequest as exc:
                    self._send_error_json(400, str(exc))
                    return
                image = compose(store.layers(index), params)
                self._send_png(encode_png(image.data))
                return
            match = _ROUTE_METRICS.match(path)
            if match:
                index = self._frame_or_404(match.group(1))
                if index is not None:
                    self._send_json(store.metrics(index))
                return
            self._send_error_json(404, f"no route for {url.path}")

    return Handler


def create_server(layers_dir, host: str = "127.0.0.1",
                  port: int = 8754) -> ThreadingHTTPServer:
    """Build a ready-to-run threading HTTP server over a layer directory."""
    store = LayerStore(layers_dir)
    server = ThreadingHTTPServer((host, port), make_handler(store))
    server.daemon_threads = True
    return server


def serve_forever(layers_dir, host: str = "127.0.0.1", port: int = 8754) -> None:
    server = create_server(layers_dir, host, port)
    host_shown, port_shown = server.server_address[:2]
    logger.info("serving layers from %s at http://%s:%s", layers_dir,
                host_shown, port_shown)
    print(f"serving on http://{host_shown}:{port_shown} (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
