"""Command-line interface: render, reconstruct, level, inspect, compare,
and lightcheck subcommands.

Exit codes: 0 success, 1 input error (bad arguments, malformed or missing
files), 2 numerical failure (degenerate fits, missing contours).  All
diagnostics go to stderr; no output file is written when the exit code is
nonzero, because every subcommand computes its results fully before
touching the filesystem.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import formats
from .errors import ComputationError, InputError
from .geometry import ObjectiveSpec, SubstrateSpec, light_height_range
from .integration import integrate
from .leveling import LevelingParams, level_depth, surface_mean
from .metrology import compare_to_reference, measure_via
from .photometric import estimate_normals, normals_to_gradients
from .synthetic import render_scene


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the CLI contract
    reserves 2 for numerical failures, so usage errors are rethrown as
    input errors (exit 1)."""

    def error(self, message):
        raise InputError(message)


def _check_distinct(inputs, outputs):
    seen = {os.path.abspath(p) for p in inputs}
    for out in outputs:
        if os.path.abspath(out) in seen:
            raise InputError(f"output path {out} collides with an input path")


def _cmd_render(args) -> int:
    scene = formats.load_scene(args.scene)
    lights = formats.load_lights(args.lights)
    if args.noise is not None:
        if args.noise < 0:
            raise InputError("--noise must be >= 0")
        scene = replace(scene, noise_sigma=args.noise)
    stack = render_scene(scene, lights, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    for k in range(stack.count):
        formats.save_pgm(
            os.path.join(args.out_dir, f"img_{k:02d}.pgm"), stack.frames[k]
        )
    return 0


def _cmd_reconstruct(args) -> int:
    _check_distinct(list(args.images) + [args.lights], [args.out])
    lights = formats.load_lights(args.lights)
    stack = formats.load_image_stack(args.images, pixel_pitch=args.pitch)
    field = estimate_normals(stack, lights, shadow_threshold=args.threshold)
    depth_map = integrate(normals_to_gradients(field), stack.pixel_pitch)
    formats.save_depth_map(args.out, depth_map)
    return 0


def _cmd_level(args) -> int:
    _check_distinct([args.infile], [args.out])
    depth_map = formats.load_depth_map(args.infile)
    params = LevelingParams(
        spatial_sigma=args.spatial_sigma,
        depth_sigma=args.depth_sigma,
        window_radius=args.window_radius,
    )
    anchor = surface_mean(depth_map.z) if args.mean_region == "surface" else None
    leveled = level_depth(depth_map, params, mean_depth=anchor)
    formats.save_depth_map(args.out, leveled)
    return 0


def _cmd_inspect(args) -> int:
    _check_distinct([args.infile], [args.out])
    depth_map = formats.load_depth_map(args.infile)
    measurement = measure_via(depth_map, slice_count=args.slices)
    text = formats.emit_metrics(measurement)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return 0


def _cmd_compare(args) -> int:
    _check_distinct([args.infile, args.reference], [args.out])
    with open(args.infile, "r", encoding="utf-8", newline="") as fh:
        measured = formats.parse_measurement_csv(fh.read())
    with open(args.reference, "r", encoding="utf-8", newline="") as fh:
        references = formats.parse_reference_csv(fh.read())
    report = compare_to_reference([m for _, m in measured], references)
    text = formats.emit_metrics(report)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return 0


def _cmd_lightcheck(args) -> int:
    objective = ObjectiveSpec(
        numerical_aperture=args.na, immersion_index=args.immersion_index
    )
    substrate = SubstrateSpec(refractive_index=args.n_substrate)
    span = light_height_range(objective, substrate, args.offset_mm)
    if span is None:
        print("EMPTY")
    else:
        print(f"{span[0]:.6g} {span[1]:.6g}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="viametry",
        description="Micro-via depth reconstruction and inspection",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("render", help="render a synthetic scene to PGM images")
    p.add_argument("scene", help="scene JSON file")
    p.add_argument("--lights", required=True, help="light config JSON")
    p.add_argument("--out-dir", required=True, help="directory for img_NN.pgm")
    p.add_argument("--noise", type=float, default=None,
                   help="override the scene's noise sigma")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("reconstruct", help="depth map from an image stack")
    p.add_argument("images", nargs="+", help="PGM frames, one per light")
    p.add_argument("--lights", required=True, help="light config JSON")
    p.add_argument("--pitch", type=float, required=True,
                   help="pixel pitch in micrometers")
    p.add_argument("--threshold", type=float, default=0.01,
                   help="shadow intensity threshold")
    p.add_argument("--out", required=True, help="output FDM1 path")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("level", help="mean-proximity smoothing of a depth map")
    p.add_argument("--in", dest="infile", required=True, help="input FDM1")
    p.add_argument("--out", required=True, help="output FDM1")
    p.add_argument("--spatial-sigma", type=float, default=2.0)
    p.add_argument("--depth-sigma", type=float, default=None,
                   help="default: 10%% of the map's peak-to-valley")
    p.add_argument("--window-radius", type=int, default=None,
                   help="default: ceil(3 * spatial sigma)")
    p.add_argument("--mean-region", choices=("full", "surface"), default="full",
                   help="anchor the range kernel at the full-raster mean or "
                        "at the surface-half mean")
    p.set_defaults(func=_cmd_level)

    p = sub.add_parser("inspect", help="measure the via in a depth map")
    p.add_argument("--in", dest="infile", required=True, help="input FDM1")
    p.add_argument("--slices", type=int, default=5,
                   help="number of roundness slices")
    p.add_argument("--out", required=True, help="output metrics CSV")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("compare", help="compare metrics against references")
    p.add_argument("--reference", required=True,
                   help="CSV of via_id,depth_um,diameter_um")
    p.add_argument("--in", dest="infile", required=True, help="metrics CSV")
    p.add_argument("--out", required=True, help="output report CSV")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("lightcheck", help="admissible dark-field light heights")
    p.add_argument("--na", type=float, required=True, help="numerical aperture")
    p.add_argument("--n-substrate", type=float, required=True,
                   help="substrate refractive index")
    p.add_argument("--offset-mm", type=float, required=True,
                   help="lateral light offset in millimeters")
    p.add_argument("--immersion-index", type=float, default=1.0)
    p.set_defaults(func=_cmd_lightcheck)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return 0 if code is None else int(code)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
