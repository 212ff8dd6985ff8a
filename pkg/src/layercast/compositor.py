"""Per-pixel blending of foreground, background and overlay layers.

Foreground pixels mix all three layers with weights (alpha, beta, gamma)
that must sum to 1; background pixels cross-fade between the background and
the overlay with an independent opacity.  Changing the weights requires no
re-synthesis, so a composition is cheap enough to adjust interactively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .images import ColorImage
from .raycast import LayerSet

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class BlendParams:
    """Blend weights, all in [0, 1].

    alpha, beta, gamma: foreground-pixel weights for the foreground,
        background and overlay layers; must sum to 1 within 1e-9.
    overlay_opacity: overlay weight on background pixels (the background
        keeps the complement).
    """

    alpha: float
    beta: float
    gamma: float
    overlay_opacity: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "overlay_opacity"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name}={value} outside [0, 1]")
        total = self.alpha + self.beta + self.gamma
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"alpha + beta + gamma = {total}, expected 1")


@dataclass(frozen=True)
class BlendPreset:
    name: str
    params: BlendParams


def preset_table() -> tuple[BlendPreset, ...]:
    """Built-in blend configurations."""
    return (
        BlendPreset("xray-only", BlendParams(0.0, 0.0, 1.0, 1.0)),
        BlendPreset("background", BlendParams(0.0, 1.0, 0.0, 0.0)),
        BlendPreset("transparent-hands-on-background", BlendParams(0.4, 0.6, 0.0, 0.0)),
        BlendPreset("three-layer", BlendParams(0.2, 0.3, 0.5, 0.5)),
        BlendPreset("foreground", BlendParams(1.0, 0.0, 0.0, 0.0)),
        BlendPreset("opaque-hands-on-xray", BlendParams(1.0, 0.0, 0.0, 1.0)),
    )


def find_preset(name: str) -> BlendPreset | None:
    for preset in preset_table():
        if preset.name == name:
            return preset
    return None


def compose(layers: LayerSet, params: BlendParams) -> ColorImage:
    """Blend a layer set into the final 8-bit image.

    Rounding is half-up per channel, then clamped to [0, 255].
    """
    fg = layers.fg_color.data.astype(np.float64)
    bg = layers.bg_color.data.astype(np.float64)
    overlay = layers.xray.astype(np.float64)[..., None]

    fg_mix = params.alpha * fg + params.beta * bg + params.gamma * overlay
    bg_mix = (1.0 - params.overlay_opacity) * bg + params.overlay_opacity * overlay
    out = np.where(layers.mask[..., None], fg_mix, bg_mix)
    out = np.clip(np.floor(out + 0.5), 0.0, 255.0).astype(np.uint8)
    return ColorImage(out)
