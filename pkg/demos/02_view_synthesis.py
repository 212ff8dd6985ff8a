"""Synthesize the view from a camera position where no camera exists.

The benchmark rig has two side cameras looking at a work surface and an
occluded central viewpoint between them.  We fuse one frame pair from the
side cameras into a volumetric field and then raycast that field from the
central viewpoint — producing the color and depth images a camera there
would have seen.
"""

import time

from common import output_dir, quick_rig
from layercast.formats import write_color_ppm, write_depth_pgm
from layercast.fusion import fuse
from layercast.raycast import cast_primary
from layercast.scene import render_rgbd


def main() -> None:
    out = output_dir("02_view_synthesis", __doc__)
    seq = quick_rig()
    print(f"scene: {seq.name}, grid {seq.grid.dims} at {seq.grid.voxel_size * 1e3:.1f} mm")

    frame_a = render_rgbd(seq.scene, seq.side_cameras[0], 0, seq.noise, camera_tag=0)
    frame_b = render_rgbd(seq.scene, seq.side_cameras[1], 0, seq.noise, camera_tag=1)
    print("rendered one noisy frame from each side camera")

    start = time.perf_counter()
    grid = fuse(frame_a, frame_b, seq.grid)
    print(f"fused both views in {time.perf_counter() - start:.2f}s")

    start = time.perf_counter()
    color, depth = cast_primary(grid, seq.target_camera)
    hit = depth.data > 0
    print(f"raycast the central view in {time.perf_counter() - start:.2f}s; "
          f"{hit.mean() * 100:.1f}% of pixels hit a surface")

    write_color_ppm(out / "synthesized_color.ppm", color)
    write_depth_pgm(out / "synthesized_depth.pgm", depth)
    # The side views, for comparison.
    write_color_ppm(out / "side_a_color.ppm", frame_a.color)
    write_color_ppm(out / "side_b_color.ppm", frame_b.color)
    print(f"images written to {out}/ — compare the synthesized view with the side views")


if __name__ == "__main__":
    main()
