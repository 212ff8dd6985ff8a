"""Blend the synthesized layers under every preset and a custom sweep.

A processed frame yields three blendable layers: the foreground view, the
recovered background, and a grayscale overlay registered to the same
viewpoint.  The compositor mixes them per pixel under weights
(alpha, beta, gamma) with alpha + beta + gamma = 1, plus an overlay opacity
that acts only outside the foreground mask.  This demo renders every
built-in preset and a gamma sweep so you can flip through the results.
"""

from common import output_dir, quick_layers, quick_rig
from layercast.compositor import BlendParams, compose, preset_table
from layercast.formats import encode_png


def main() -> None:
    out = output_dir("04_blend_presets", __doc__)
    print("synthesizing one frame of layers (quick rig) ...")
    layers = quick_layers(quick_rig())

    print("\nbuilt-in presets:")
    for preset in preset_table():
        image = compose(layers, preset.params)
        path = out / f"preset_{preset.name}.png"
        path.write_bytes(encode_png(image.data))
        p = preset.params
        print(f"  {preset.name:34s} alpha={p.alpha:.2f} beta={p.beta:.2f} "
              f"gamma={p.gamma:.2f} overlay={p.overlay_opacity:.2f} -> {path.name}")

    print("\nfading the foreground out while the overlay fades in:")
    for step in range(5):
        gamma = step / 4.0
        alpha = 1.0 - gamma
        image = compose(layers, BlendParams(alpha, 0.0, gamma, gamma))
        path = out / f"sweep_gamma_{gamma:.2f}.png"
        path.write_bytes(encode_png(image.data))
        print(f"  alpha={alpha:.2f} gamma={gamma:.2f} -> {path.name}")

    print(f"\nall images in {out}/")


if __name__ == "__main__":
    main()
