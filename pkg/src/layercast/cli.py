"""Command-line interface.

Subcommands:
    synthesize  process a sequence manifest into per-frame layer sets
    compose     blend one synthesized frame into a final image
    bench       run the synthetic benchmark suite and report metrics
    export      write a synthetic benchmark sequence to disk as a manifest
    serve       expose synthesized layers over HTTP
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .compositor import BlendParams, compose, find_preset, preset_table
from .formats import (encode_png, read_layer_index, read_manifest,
                      write_color_ppm)
from .fusion import FusionParams, GridSpec, VISIBILITY_RULES
from .metrics import run_benchmark, write_report
from .pipeline import PipelineConfig, synthesize_sequence
from .raycast import RaycastParams
from .segmentation import SegmentationParams

logger = logging.getLogger(__name__)


def _grid_from_args(args, default: GridSpec) -> GridSpec:
    dims = default.dims
    if args.grid_dims is not None:
        if len(args.grid_dims) == 1:
            dims = (args.grid_dims[0],) * 3
        elif len(args.grid_dims) == 3:
            dims = tuple(args.grid_dims)
        else:
            raise ValueError("--grid-dims takes one or three integers")
    return GridSpec(
        dims=dims,
        voxel_size=args.voxel_size if args.voxel_size is not None else default.voxel_size,
        origin=tuple(args.grid_origin) if args.grid_origin is not None else default.origin,
    )


def _add_grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-dims", type=int, nargs="+", metavar="N",
                        help="voxel counts: one value for a cube or three for x y z")
    parser.add_argument("--voxel-size", type=float, metavar="METERS")
    parser.add_argument("--grid-origin", type=float, nargs=3, metavar=("X", "Y", "Z"),
                        help="world position of the grid center")


def _add_pipeline_args(parser: argparse.ArgumentParser) -> None:
    _add_grid_args(parser)
    parser.add_argument("--truncation", type=float, default=None, metavar="METERS",
                        help="signed-distance truncation band")
    parser.add_argument("--visibility-tolerance", type=float, default=None,
                        metavar="METERS")
    parser.add_argument("--visibility-rule", choices=VISIBILITY_RULES, default=None)
    parser.add_argument("--segmentation-margin", type=float, default=None,
                        metavar="METERS")
    parser.add_argument("--opening-radius", type=int, default=None, metavar="PIXELS")
    parser.add_argument("--second-run-margin", type=float, default=None,
                        metavar="METERS")


def _config_from_args(args, default_grid: GridSpec) -> PipelineConfig:
    fusion_kwargs = {}
    if args.truncation is not None:
        fusion_kwargs["truncation"] = args.truncation
    if args.visibility_tolerance is not None:
        fusion_kwargs["visibility_tolerance"] = args.visibility_tolerance
    if args.visibility_rule is not None:
        fusion_kwargs["visibility_rule"] = args.visibility_rule
    seg_kwargs = {}
    if args.segmentation_margin is not None:
        seg_kwargs["margin"] = args.segmentation_margin
    if args.opening_radius is not None:
        seg_kwargs["opening_radius"] = args.opening_radius
    ray_kwargs = {}
    if args.second_run_margin is not None:
        ray_kwargs["second_run_margin"] = args.second_run_margin
    return PipelineConfig(
        grid=_grid_from_args(args, default_grid),
        fusion=FusionParams(**fusion_kwargs),
        raycast=RaycastParams(**ray_kwargs),
        segmentation=SegmentationParams(**seg_kwargs),
    )


def _cmd_synthesize(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = read_manifest(manifest_path)
    config = _config_from_args(args, GridSpec())
    results = synthesize_sequence(manifest, manifest_path.parent, args.out, config,
                                  dump_grids=args.dump_grids)
    print(f"synthesized {len(results)} frames -> {args.out}")
    return 0


def _blend_params_from_args(parser, args) -> BlendParams:
    if args.preset is not None:
        preset = find_preset(args.preset)
        if preset is None:
            names = ", ".join(p.name for p in preset_table())
            parser.error(f"unknown preset {args.preset!r} (available: {names})")
        return preset.params
    values = (args.alpha, args.beta, args.gamma, args.delta)
    if any(v is None for v in values):
        parser.error("provide --preset or all of --alpha --beta --gamma --delta")
    try:
        return BlendParams(args.alpha, args.beta, args.gamma, args.delta)
    except ValueError as exc:
        parser.error(str(exc))


def _load_layer_set(layers_dir: Path, frame: int):
    from .formats import read_color_ppm, read_depth_pgm, read_gray_pgm, read_mask_pgm
    from .raycast import LayerSet

    index = read_layer_index(layers_dir)
    entry = next((e for e in index["frames"] if e["index"] == frame), None)
    if entry is None:
        raise KeyError(f"frame {frame} not present in {layers_dir}")
    return LayerSet(
        fg_color=read_color_ppm(layers_dir / entry["fg_color"]),
        fg_depth=read_depth_pgm(layers_dir / entry["fg_depth"]),
        mask=read_mask_pgm(layers_dir / entry["mask"]),
        bg_color=read_color_ppm(layers_dir / entry["bg_color"]),
        bg_valid=read_mask_pgm(layers_dir / entry["bg_valid"]),
        xray=read_gray_pgm(layers_dir / index["xray"]),
    )


def _cmd_compose(parser, args) -> int:
    params = _blend_params_from_args(parser, args)
    layers = _load_layer_set(Path(args.layers), args.frame)
    image = compose(layers, params)
    out = Path(args.out)
    if out.suffix.lower() == ".png":
        out.write_bytes(encode_png(image.data))
    else:
        write_color_ppm(out, image)
    print(f"composed frame {args.frame} -> {out}")
    return 0


def _cmd_bench(args) -> int:
    from .scene import benchmark_suite

    suite = benchmark_suite()
    if args.sequences:
        wanted = {int(tok) for tok in args.sequences.split(",")}
        bad = wanted - set(range(1, len(suite) + 1))
        if bad:
            raise ValueError(f"unknown sequence numbers {sorted(bad)} (1..{len(suite)})")
        suite = tuple(s for i, s in enumerate(suite, start=1) if i in wanted)

    grid = None
    if args.grid_dims is not None or args.voxel_size is not None or args.grid_origin is not None:
        grid = _grid_from_args(args, suite[0].grid)
    report = run_benchmark(suite, noise=args.noise == "on", grid=grid)
    for seq in report["sequences"]:
        print(
            f"{seq['sequence']}: recovery {seq['mean_recovery_pct']:.1f}% "
            f"mae {seq['mean_bg_mae']:.2f} iou {seq['mean_mask_iou']:.3f} "
            f"({seq['frames']} frames, {seq['failed_frames']} failed)"
        )
    print(f"total wall time {report['wall_s']:.1f}s")
    if args.report:
        write_report(args.report, report)
        print(f"report -> {args.report}")
    return 0


def _cmd_export(args) -> int:
    from .scene import benchmark_suite, export_sequence

    suite = benchmark_suite()
    if not (1 <= args.sequence <= len(suite)):
        raise ValueError(f"sequence must be in 1..{len(suite)}")
    sequence = suite[args.sequence - 1]
    path = export_sequence(sequence, args.out, apply_noise=args.noise == "on")
    print(f"exported {sequence.name} -> {path}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve_forever

    serve_forever(args.layers, args.host, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="layercast", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="process a manifest into layer sets")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-grids", action="store_true",
                   help="also dump the fused voxel grid per frame")
    _add_pipeline_args(p)

    p = sub.add_parser("compose", help="blend one frame into a final image")
    p.add_argument("--layers", required=True)
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--preset")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="run the synthetic benchmark suite")
    p.add_argument("--sequences", help="comma-separated sequence numbers, e.g. 1,3")
    p.add_argument("--noise", choices=("on", "off"), default="on")
    p.add_argument("--report", help="write the JSON report here")
    _add_grid_args(p)

    p = sub.add_parser("export", help="write a synthetic sequence as a manifest")
    p.add_argument("--sequence", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--noise", choices=("on", "off"), default="on")

    p = sub.add_parser("serve", help="serve synthesized layers over HTTP")
    p.add_argument("--layers", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8754)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synthesize":
            return _cmd_synthesize(args)
        if args.command == "compose":
            return _cmd_compose(parser, args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "export":
            return _cmd_export(args)
        if args.command == "serve":
            return _cmd_serve(args)
        parser.error(f"unknown command {args.command}")
    except (FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
