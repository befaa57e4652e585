"""Command-line surface: mask generation, Plücker export, scene rendering,
oracle-denoiser sampling, and evaluation.

Camera-set file (JSON)::

    {
      "fov_deg": 40.26,            # required, horizontal FOV in degrees
      "width": 256, "height": 256, # required, render resolution in pixels
      "views": [                   # required, one entry per camera
        {"elevation_deg": 0.0, "azimuth_deg": 0.0, "distance": 3.5},
        ...
      ],
      "resolution": 32,            # optional feature-grid resolution (8|16|32)
      "steps": 200,                # optional DDIM steps
      "blob_steps": 20,            # optional blob-initialized steps
      "seed": 0,                   # optional RNG seed
      "scale_t": 7.5,              # optional guidance scales
      "scale_c": 1.0, "scale_e": 1.0, "scale_p": 1.0
    }

Command-line flags override file values.  Subcommands:

- ``masks``   packed bitset of epipolar masks plus a PGM preview per pair
- ``plucker`` one binary Plücker grid per view
- ``render``  synthetic-scene PPM render plus 16-bit PGM depth per view
- ``sample``  joint multi-view DDIM sampling against the oracle denoiser
              built from the scene renders (guidance plumbing included;
              with the oracle all condition levels coincide)
- ``eval``    PSNR/SSIM CSV report comparing two directories of PPMs

Exit codes: 0 success, 2 malformed configuration or missing files,
1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import fileio
from .attention import FeatureGrid  # noqa: F401  (re-exported pipeline surface)
from .camera import CameraPose, intrinsics_from_fov, spherical_pose
from .diffusion import (
    CfgScales,
    cfg_compose,
    joint_multiview_sample,
    make_schedule,
    oracle_denoiser,
)
from .epipolar import build_mask_set
from .metrics import compare_images
from .plucker import plucker_grid
from .scene import build_scene, render_view

VALID_RESOLUTIONS = (8, 16, 32)

DEFAULT_RESOLUTION = 32
DEFAULT_STEPS = 200
DEFAULT_BLOB_STEPS = 20
DEFAULT_SEED = 0
DEFAULT_SCALES = CfgScales(7.5, 1.0, 1.0, 1.0)


class ConfigError(ValueError):
    """Configuration file or flag validation failure."""


@dataclass(frozen=True)
class ViewSpec:
    elevation_deg: float
    azimuth_deg: float
    distance: float


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration: camera set plus sampler settings."""

    path: str
    fov_deg: float
    width: int
    height: int
    views: tuple
    resolution: int = DEFAULT_RESOLUTION
    steps: int = DEFAULT_STEPS
    blob_steps: int = DEFAULT_BLOB_STEPS
    seed: int = DEFAULT_SEED
    scales: CfgScales = DEFAULT_SCALES

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ConfigError(f"fov_deg: must be in (0, 180), got {self.fov_deg}")
        if self.width < 1 or self.height < 1:
            raise ConfigError("width/height: must be at least 1")
        if len(self.views) < 1:
            raise ConfigError("views: need at least one view")
        if self.resolution not in VALID_RESOLUTIONS:
            raise ConfigError(
                f"resolution: must be one of {VALID_RESOLUTIONS}, got {self.resolution}"
            )
        if self.steps < 1:
            raise ConfigError(f"steps: must be >= 1, got {self.steps}")
        if not 0 <= self.blob_steps <= self.steps:
            raise ConfigError(
                f"blob_steps: must be in [0, steps], got {self.blob_steps}"
            )

    def poses(self) -> list[CameraPose]:
        return [
            spherical_pose(v.elevation_deg, v.azimuth_deg, v.distance)
            for v in self.views
        ]

    def image_intrinsics(self):
        return intrinsics_from_fov(self.fov_deg, self.width, self.height)

    def feature_intrinsics(self):
        return intrinsics_from_fov(self.fov_deg, self.resolution, self.resolution)


def _require(data: dict, key: str, kind, context: str):
    if key not in data:
        raise ConfigError(f"{context}: missing required field '{key}'")
    value = data[key]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{context}: field '{key}' has invalid value {value!r}")


def load_config(path) -> RunConfig:
    """Parse and validate a camera-set file, applying defaults."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"camera-set file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")

    raw_views = data.get("views")
    if not isinstance(raw_views, list) or not raw_views:
        raise ConfigError(f"{path}: field 'views' must be a non-empty list")
    views = []
    for idx, entry in enumerate(raw_views):
        if not isinstance(entry, dict):
            raise ConfigError(f"{path}: views[{idx}] must be an object")
        ctx = f"{path}: views[{idx}]"
        views.append(
            ViewSpec(
                elevation_deg=_require(entry, "elevation_deg", float, ctx),
                azimuth_deg=_require(entry, "azimuth_deg", float, ctx),
                distance=_require(entry, "distance", float, ctx),
            )
        )

    scales = CfgScales(
        s_t=float(data.get("scale_t", DEFAULT_SCALES.s_t)),
        s_c=float(data.get("scale_c", DEFAULT_SCALES.s_c)),
        s_e=float(data.get("scale_e", DEFAULT_SCALES.s_e)),
        s_p=float(data.get("scale_p", DEFAULT_SCALES.s_p)),
    )
    return RunConfig(
        path=str(path),
        fov_deg=_require(data, "fov_deg", float, str(path)),
        width=_require(data, "width", int, str(path)),
        height=_require(data, "height", int, str(path)),
        views=tuple(views),
        resolution=int(data.get("resolution", DEFAULT_RESOLUTION)),
        steps=int(data.get("steps", DEFAULT_STEPS)),
        blob_steps=int(data.get("blob_steps", DEFAULT_BLOB_STEPS)),
        seed=int(data.get("seed", DEFAULT_SEED)),
        scales=scales,
    )


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    if getattr(args, "res", None) is not None:
        updates["resolution"] = args.res
    if getattr(args, "steps", None) is not None:
        updates["steps"] = args.steps
    if getattr(args, "blob_steps", None) is not None:
        updates["blob_steps"] = args.blob_steps
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    scales = cfg.scales
    for flag, field in (
        ("scale_t", "s_t"),
        ("scale_c", "s_c"),
        ("scale_e", "s_e"),
        ("scale_p", "s_p"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            scales = replace(scales, **{field: value})
    if scales is not cfg.scales:
        updates["scales"] = scales
    return replace(cfg, **updates) if updates else cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_masks(args) -> int:
    cfg = _apply_overrides(load_config(args.cameras), args)
    if len(cfg.views) < 2:
        raise ConfigError("masks: need at least two views")
    out = _out_dir(args)
    masks = build_mask_set(cfg.poses(), cfg.feature_intrinsics())
    fileio.write_mask_bitset(out / "masks.bin", masks)
    for i, j in masks.ordered_pairs():
        preview = masks.pairs[(i, j)].astype(np.uint8) * 255
        fileio.write_pgm(out / f"mask_{i:02d}_{j:02d}.pgm", preview)
    n_pairs = len(masks.ordered_pairs())
    print(f"wrote masks.bin and {n_pairs} pair previews to {out}")
    return 0


def _cmd_plucker(args) -> int:
    cfg = _apply_overrides(load_config(args.cameras), args)
    out = _out_dir(args)
    intr = cfg.feature_intrinsics()
    for k, pose in enumerate(cfg.poses()):
        grid = plucker_grid(pose, intr)
        fileio.write_plucker_blob(out / f"plucker_{k:02d}.bin", grid.values)
    print(f"wrote {len(cfg.views)} Plücker grids to {out}")
    return 0


def _cmd_render(args) -> int:
    cfg = _apply_overrides(load_config(args.cameras), args)
    out = _out_dir(args)
    scene = build_scene(cfg.seed)
    intr = cfg.image_intrinsics()
    for k, pose in enumerate(cfg.poses()):
        image, depth = render_view(scene, pose, intr)
        fileio.write_ppm(out / f"view_{k:02d}.ppm", image)
        fileio.write_depth_pgm(out / f"depth_{k:02d}.pgm", depth)
    print(f"rendered {len(cfg.views)} views to {out}")
    return 0


def _guided(base, scales: CfgScales):
    """Wrap a pair denoiser with the four-level guidance composition.

    Each condition level drops one more conditioning input, null last.
    With the oracle denoiser every level coincides, so guidance is the
    identity; the composition path is still exercised end to end.
    """

    def denoise(x_a, x_b, t, *, view_a, view_b, condition=None, rel_pose=None,
                masks=None, pluckers=None):
        levels = [
            dict(condition=None, rel_pose=None, masks=None, pluckers=None),
            dict(condition=condition, rel_pose=None, masks=None, pluckers=None),
            dict(condition=condition, rel_pose=rel_pose, masks=None, pluckers=None),
            dict(condition=condition, rel_pose=rel_pose, masks=masks, pluckers=None),
            dict(condition=condition, rel_pose=rel_pose, masks=masks, pluckers=pluckers),
        ]
        outs = [base(x_a, x_b, t, view_a=view_a, view_b=view_b, **lv) for lv in levels]
        eps_a = cfg_compose(*(o[0] for o in outs), scales)
        eps_b = cfg_compose(*(o[1] for o in outs), scales)
        return eps_a, eps_b

    return denoise


def _cmd_sample(args) -> int:
    cfg = _apply_overrides(load_config(args.cameras), args)
    n_views = args.views if args.views is not None else len(cfg.views)
    if n_views < 2:
        raise ConfigError("sample: need at least two views")
    if n_views > len(cfg.views):
        raise ConfigError(
            f"sample: asked for {n_views} views, camera set has {len(cfg.views)}"
        )
    out = _out_dir(args)

    scene = build_scene(cfg.seed)
    intr = cfg.image_intrinsics()
    poses = cfg.poses()[:n_views]
    targets = [render_view(scene, pose, intr)[0] for pose in poses]

    sched = make_schedule(cfg.steps)
    condition = np.random.default_rng(cfg.seed).standard_normal(8)
    denoiser = _guided(oracle_denoiser(targets, sched), cfg.scales)
    samples = joint_multiview_sample(
        n_views,
        denoiser,
        poses,
        condition,
        sched,
        shape=(cfg.height, cfg.width, 3),
        steps=cfg.steps,
        blob_steps=cfg.blob_steps,
        seed=cfg.seed,
    )
    for k, image in enumerate(samples):
        fileio.write_ppm(out / f"view_{k:02d}.ppm", image)
    print(f"sampled {n_views} views ({cfg.steps} steps, seed {cfg.seed}) to {out}")
    return 0


def _cmd_eval(args) -> int:
    ref_dir = Path(args.reference)
    test_dir = Path(args.test)
    for d in (ref_dir, test_dir):
        if not d.is_dir():
            raise FileNotFoundError(f"not a directory: {d}")
    names = sorted(
        {p.name for p in ref_dir.glob("*.ppm")} & {p.name for p in test_dir.glob("*.ppm")}
    )
    if not names:
        raise ConfigError("eval: the directories share no .ppm files")
    pairs = [
        (name, fileio.read_ppm(ref_dir / name), fileio.read_ppm(test_dir / name))
        for name in names
    ]
    report = compare_images(pairs)
    csv_text = report.to_csv()
    sys.stdout.write(csv_text)
    out = _out_dir(args)
    fileio.atomic_write_bytes(out / "report.csv", csv_text.encode("ascii"))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epiview",
        description="Epipolar masks, Plücker grids, renders, sampling, evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, cameras=True):
        if cameras:
            p.add_argument("--cameras", required=True, help="camera-set JSON file")
        p.add_argument("--res", type=int, choices=VALID_RESOLUTIONS,
                       help="feature-grid resolution")
        p.add_argument("--steps", type=int, help="DDIM steps")
        p.add_argument("--blob-steps", type=int, dest="blob_steps",
                       help="blob-initialized steps")
        p.add_argument("--seed", type=int, help="RNG seed")
        p.add_argument("--scale-t", type=float, dest="scale_t", help="text guidance")
        p.add_argument("--scale-c", type=float, dest="scale_c", help="camera guidance")
        p.add_argument("--scale-e", type=float, dest="scale_e", help="epipolar guidance")
        p.add_argument("--scale-p", type=float, dest="scale_p", help="Plücker guidance")
        p.add_argument("--out", required=True, help="output directory")

    add_common(sub.add_parser("masks", help="write epipolar attention masks"))
    add_common(sub.add_parser("plucker", help="write per-view Plücker grids"))
    add_common(sub.add_parser("render", help="render the synthetic scene"))
    p_sample = sub.add_parser("sample", help="joint multi-view DDIM sampling")
    p_sample.add_argument("--views", type=int, help="number of views (default: all)")
    add_common(p_sample)
    p_eval = sub.add_parser("eval", help="PSNR/SSIM report for two render dirs")
    p_eval.add_argument("reference", help="reference directory of .ppm files")
    p_eval.add_argument("test", help="test directory of .ppm files")
    add_common(p_eval, cameras=False)
    return parser


_HANDLERS = {
    "masks": _cmd_masks,
    "plucker": _cmd_plucker,
    "render": _cmd_render,
    "sample": _cmd_sample,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"epiview {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal invariant violations
        print(f"epiview {args.command}: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
