"""Command-line interface exposing each pipeline stage as a subcommand.

Stage boundaries are file boundaries (VXG grids, MSK masks, PLY meshes,
PNG images, embeddings JSON) so external producers can interleave. A JSON
config file can supply defaults for any flag of a subcommand; explicit
flags win. Every run prints the resolved configuration to stderr.

Exit codes: 0 success, 1 usage error, 2 data or format error.
"""

from __future__ import annotations

import argparse
import difflib
import json
import os
import sys

import numpy as np

from . import io as vio
from .errors import VoxmergeError
from .fields import ChannelDecoder, decode_fields
from .grid import ColorSpec, extract_color_mask
from .merge import (
    MergeConfig,
    average_merge,
    average_merge_streamed,
    copy_paste_merge,
    corner_empty_feature,
)
from .mesh import chamfer, color_mesh, marching_cubes, sample_surface
from .metrics import all_scores
from .multiview import blend_features, downsample_mask, morph2d, paint_masks
from .prompts import PromptPair, prompt_diff
from .synth import make_edit_pair, rasterize, scene_from_dict
from .triplane import TriplaneSet, sample_triplane

THREADS_ENV = "VOXMERGE_THREADS"


class UsageError(Exception):
    def __init__(self, message, parser=None):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems through UsageError."""

    def error(self, message):
        raise UsageError(message, parser=self)


def _parse_color(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise UsageError(f"color needs 3 components, got {text!r}")
    return tuple(float(p) for p in parts)


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _out_paths(args_paths, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    return [os.path.join(out_dir, os.path.basename(p)) for p in args_paths]


# -- subcommand handlers -------------------------------------------------------


def _cmd_lift_mask(args):
    grid = vio.read_grid(args.input)
    spec = ColorSpec(_parse_color(args.color), args.tau)
    vio.write_mask(extract_color_mask(grid, spec), args.out)
    return 0


def _merge_config(args, original):
    empty = None
    if args.empty == "corners":
        empty = corner_empty_feature(original)
    return MergeConfig(
        dilation=args.dilation,
        theta=args.theta,
        connectivity=args.connectivity,
        empty_feature=empty,
        blend_from_pristine=args.blend_from_pristine,
    )


def _cmd_merge(args):
    original = vio.read_grid(args.original)
    mask_original = vio.read_mask(args.mask_original)
    mask_edited = vio.read_mask(args.mask_edited)
    config = _merge_config(args, original)
    if args.mode == "copy-paste":
        edited = vio.read_grid(args.edited)
        result = copy_paste_merge(original, edited, mask_original, mask_edited, config)
    elif args.in_place:
        slabs = vio.iter_grid_slabs(args.edited)
        result = average_merge_streamed(original, slabs, mask_original, mask_edited, config)
    else:
        edited = vio.read_grid(args.edited)
        result = average_merge(original, edited, mask_original, mask_edited, config)
    vio.write_grid(result, args.out)
    return 0


def _cmd_mesh(args):
    grid = vio.read_grid(args.input)
    if grid.channels == 1:
        mesh = marching_cubes(grid, args.iso)
    else:
        rgb_channels = tuple(int(c) for c in args.rgb_channels.split(","))
        decoder = ChannelDecoder(sdf_channel=args.sdf_channel, rgb_channels=rgb_channels)
        sdf, rgb = decode_fields(grid, decoder)
        mesh = marching_cubes(sdf, args.iso)
        if not args.no_color and not mesh.is_empty:
            mesh = color_mesh(mesh, rgb)
    vio.write_mesh_ply(mesh, args.out)
    print(f"vertices {mesh.n_vertices} faces {mesh.n_faces}")
    return 0


def _cmd_chamfer(args):
    cloud_a = sample_surface(vio.read_mesh_ply(args.mesh_a), args.samples, args.seed)
    cloud_b = sample_surface(vio.read_mesh_ply(args.mesh_b), args.samples, args.seed)
    value = chamfer(cloud_a, cloud_b, workers=args.threads)
    print(f"{value * 1e3:.3f}")
    return 0


def _cmd_metrics(args):
    embeddings = vio.read_embeddings(args.embeddings)
    scores = all_scores(embeddings, cosine_as_distance=args.cosine_as_distance)
    for name, result in scores.items():
        print(f"{name} {result.reported:.2f} skipped={result.skipped_views}")
    return 0


def _cmd_blend(args):
    edited = vio.read_image_stack(args.edited)
    original = vio.read_image_stack(args.original)
    mask = vio.read_mask_stack(args.masks)
    if (mask.height, mask.width) != (edited.height, edited.width):
        mask = downsample_mask(mask, edited.height, edited.width, args.mask_mode,
                               allow_resample=True)
    blended = blend_features(edited, original, mask)
    vio.write_image_stack(blended, _out_paths(args.edited, args.out_dir))
    return 0


def _cmd_paint(args):
    images = vio.read_image_stack(args.images)
    masks = vio.read_mask_stack(args.masks)
    painted = paint_masks(images, masks, ColorSpec(_parse_color(args.color)))
    vio.write_image_stack(painted, _out_paths(args.images, args.out_dir))
    return 0


def _cmd_prompt_diff(args):
    diff = prompt_diff(PromptPair(args.input_prompt, args.edit_prompt))
    doc = {
        "status": diff.status,
        "removed": diff.removed_text,
        "added": diff.added_text,
        "generic": diff.generic_text,
        "hunks": [
            {
                "removed": list(h.removed),
                "added": list(h.added),
                "removed_span": list(h.removed_span),
                "added_span": list(h.added_span),
            }
            for h in diff.hunks
        ],
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_mask_morph(args):
    masks = vio.read_mask_stack(args.masks)
    out = morph2d(masks, args.iterations, args.op)
    vio.write_mask_stack(out, _out_paths(args.masks, args.out_dir))
    return 0


def _cmd_synth(args):
    with open(args.scene) as fh:
        scene = scene_from_dict(json.load(fh))
    if args.edited_scene is None:
        grid, masks = rasterize(scene, args.resolution, args.channels)
        vio.write_grid(grid, args.out)
        if args.masks_dir:
            os.makedirs(args.masks_dir, exist_ok=True)
            for label, mask in masks.items():
                vio.write_mask(mask, os.path.join(args.masks_dir, f"{label}.msk"))
        return 0
    if not args.out_prefix:
        raise UsageError("--out-prefix is required with --edited-scene")
    with open(args.edited_scene) as fh:
        edited_scene = scene_from_dict(json.load(fh))
    pair = make_edit_pair(
        scene,
        edited_scene,
        corrupt_region=args.corrupt,
        resolution=args.resolution,
        channels=args.channels,
        seed=args.seed,
    )
    prefix = args.out_prefix
    vio.write_grid(pair.original, prefix + "original.vxg")
    vio.write_grid(pair.edited, prefix + "edited.vxg")
    vio.write_grid(pair.truth, prefix + "truth.vxg")
    vio.write_mask(pair.mask_original, prefix + "mask_original.msk")
    vio.write_mask(pair.mask_edited, prefix + "mask_edited.msk")
    return 0


def _cmd_triplane_sample(args):
    archive = np.load(args.planes)
    for key in ("xy", "xz", "yz"):
        if key not in archive:
            raise UsageError(f"{args.planes}: missing plane array {key!r}")
    planes = TriplaneSet(archive["xy"], archive["xz"], archive["yz"], mode=args.mode)
    vio.write_grid(sample_triplane(planes, args.resolution), args.out)
    return 0


# -- parser construction -------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="voxmerge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    def command(name, handler, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=handler)
        p.add_argument("--config", default=None, help="JSON file with flag defaults")
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help=f"worker cap (default ${THREADS_ENV} or 1)")
        return p

    p = command("lift-mask", _cmd_lift_mask, "threshold a color grid into a 3D mask")
    p.add_argument("input", help="VXG color grid (F=3)")
    p.add_argument("--out", required=True, help="output MSK path")
    p.add_argument("--color", default="0,1,0", help="target color r,g,b in [0,1]")
    p.add_argument("--tau", type=float, default=0.3, help="RGB distance threshold")

    p = command("merge", _cmd_merge, "merge edited and original voxel grids")
    p.add_argument("--original", required=True, help="original VXG grid")
    p.add_argument("--edited", required=True, help="edited VXG grid")
    p.add_argument("--mask-original", required=True, help="removal MSK")
    p.add_argument("--mask-edited", required=True, help="insertion MSK")
    p.add_argument("--out", required=True, help="output VXG path")
    p.add_argument("--mode", choices=("average", "copy-paste"), default="average")
    p.add_argument("--dilation", type=int, default=2, help="boundary shell width")
    p.add_argument("--theta", type=float, default=0.5,
                   help="original-grid weight inside the shell")
    p.add_argument("--connectivity", type=int, choices=(6, 26), default=26)
    p.add_argument("--empty", choices=("zeros", "corners"), default="zeros",
                   help="feature written into nullified voxels")
    p.add_argument("--blend-from-pristine", action="store_true",
                   help="blend against the untouched original grid")
    p.add_argument("--in-place", action="store_true",
                   help="mutate the original grid, streaming the edited grid in slabs")

    p = command("mesh", _cmd_mesh, "extract a textured mesh from a feature grid")
    p.add_argument("input", help="VXG grid (F=1 for a bare SDF, else channel layout)")
    p.add_argument("--out", required=True, help="output PLY path")
    p.add_argument("--iso", type=float, default=0.0, help="isosurface level")
    p.add_argument("--sdf-channel", type=int, default=0)
    p.add_argument("--rgb-channels", default="1,2,3")
    p.add_argument("--no-color", action="store_true", help="skip vertex coloring")

    p = command("chamfer", _cmd_chamfer, "chamfer distance between two mesh surfaces")
    p.add_argument("mesh_a", help="PLY mesh")
    p.add_argument("mesh_b", help="PLY mesh")
    p.add_argument("--samples", type=int, default=10000, help="points per surface")
    p.add_argument("--seed", type=int, default=0)

    p = command("metrics", _cmd_metrics, "directional embedding metric suite")
    p.add_argument("embeddings", help="embeddings JSON document")
    p.add_argument("--cosine-as-distance", action="store_true",
                   help="use 1 - cosine similarity in the cosine variants")

    p = command("blend", _cmd_blend, "mask-blend edited and original view images")
    p.add_argument("--edited", nargs="+", required=True, help="edited view PNGs")
    p.add_argument("--original", nargs="+", required=True, help="original view PNGs")
    p.add_argument("--masks", nargs="+", required=True, help="mask PNGs (>=128 set)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mask-mode", choices=("area_soft", "nearest_binary"),
                   default="area_soft", help="downsampling mode when sizes differ")

    p = command("paint", _cmd_paint, "paint masked pixels in a marker color")
    p.add_argument("--images", nargs="+", required=True, help="view PNGs")
    p.add_argument("--masks", nargs="+", required=True, help="mask PNGs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--color", default="0,1,0", help="marker color r,g,b in [0,1]")

    p = command("prompt-diff", _cmd_prompt_diff, "identify the changing prompt concept")
    p.add_argument("--input-prompt", required=True)
    p.add_argument("--edit-prompt", required=True)

    p = command("mask-morph", _cmd_mask_morph, "dilate or erode 2D masks")
    p.add_argument("--masks", nargs="+", required=True, help="mask PNGs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--op", choices=("dilate", "erode"), default="dilate")
    p.add_argument("--iterations", type=int, default=1,
                   help="iteration count; negative flips the operation")

    p = command("synth", _cmd_synth, "rasterize analytic scenes into grids and masks")
    p.add_argument("--scene", required=True, help="scene JSON")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--channels", type=int, default=40)
    p.add_argument("--out", default="scene.vxg", help="output VXG (plain mode)")
    p.add_argument("--masks-dir", default=None, help="write per-label masks here")
    p.add_argument("--edited-scene", default=None,
                   help="edited scene JSON; switches to edit-pair mode")
    p.add_argument("--corrupt", default=None, help="label to corrupt in the edited grid")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-prefix", default=None, help="prefix for edit-pair outputs")

    p = command("triplane-sample", _cmd_triplane_sample,
                "interpolate triplane features onto a voxel grid")
    p.add_argument("--planes", required=True, help="npz archive with arrays xy, xz, yz")
    p.add_argument("--mode", choices=("concat", "sum", "mean"), default="concat")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--out", required=True, help="output VXG path")

    return parser


def _apply_config(parser, argv):
    """Load --config JSON (if any) as subparser defaults; flags still win."""
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config needs a file argument")
    path = argv[idx + 1]
    try:
        with open(path) as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(values, dict):
        raise UsageError(f"config {path} must be a JSON object")

    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    subparser = None
    if argv and sub_actions and argv[0] in sub_actions[0].choices:
        subparser = sub_actions[0].choices[argv[0]]
    if subparser is None:
        raise UsageError("--config requires a subcommand")
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        raise UsageError(f"config {path} has unknown keys {unknown}")
    subparser.set_defaults(**values)


def _known_flags(parser) -> set[str]:
    known = set()
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            known.update(action.option_strings)
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
    return known


def _suggest_flag(message, parser) -> str:
    words = [w.strip(",") for w in message.split()]
    flags = [w for w in words if w.startswith("--")]
    if not flags or parser is None:
        return ""
    close = difflib.get_close_matches(flags[0], sorted(_known_flags(parser)), n=1)
    return f" (did you mean {close[0]}?)" if close else ""


def _print_resolved(args):
    resolved = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")
    }
    print("resolved config: " + json.dumps(resolved, default=str), file=sys.stderr)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.error("a subcommand is required")
        _print_resolved(args)
        return args.func(args)
    except UsageError as exc:
        suggestion = _suggest_flag(str(exc), exc.parser)
        print(f"usage error: {exc}{suggestion}", file=sys.stderr)
        return 1
    except VoxmergeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 2


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
