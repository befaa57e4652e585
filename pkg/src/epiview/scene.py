"""Synthetic colored point-cloud scene, point-splat renderer, and
ground-truth correspondence extraction.

The procedural scene is a hollow cube of colored points inside the unit
cube [-0.5, 0.5]^3, each face a distinct color, plus an off-center
L-shaped marker slightly in front of one face.  Distinct face colors and
the L make the scene chirality-asymmetric: no rigid rotation maps it
onto its mirror image, so flipped renders are detectably wrong.

Rendering splats each point as a screen-space disc (projected radius
focal * radius / depth) with a z-buffer over pixel centers; every point
covers at least the pixel containing its projection so it never vanishes
at coarse resolutions.  Ties in depth resolve to the lower point index.
Background is white; background depth is +inf.

All colors are exact multiples of 1/255, so 8-bit quantization of a
render is reproducible even after round-tripping through the sampler.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraPose, Intrinsics, project_point

VISIBILITY_TOL = 1e-3  # world units, point depth vs depth grid

_FACE_COLORS = (
    np.array(
        [
            [220, 50, 40],  # +X
            [40, 170, 60],  # -X
            [50, 90, 220],  # +Y
            [235, 200, 40],  # -Y
            [170, 60, 200],  # +Z
            [40, 200, 210],  # -Z
        ],
        dtype=np.float64,
    )
    / 255.0
)
_MARKER_COLOR = np.array([15, 15, 15], dtype=np.float64) / 255.0


@dataclass(frozen=True)
class PointScene:
    """Colored point cloud: positions (n, 3), colors (n, 3) in [0, 1], radii (n,)."""

    positions: np.ndarray
    colors: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        col = np.asarray(self.colors, dtype=np.float64)
        rad = np.asarray(self.radii, dtype=np.float64)
        n = pos.shape[0]
        if pos.shape != (n, 3) or col.shape != (n, 3) or rad.shape != (n,):
            raise ValueError("positions (n,3), colors (n,3), radii (n,) required")
        if np.any(np.abs(pos) > 0.5):
            raise ValueError("all points must lie inside the unit cube [-0.5, 0.5]^3")
        if np.any(col < 0.0) or np.any(col > 1.0):
            raise ValueError("colors must lie in [0, 1]")
        if np.any(rad <= 0.0):
            raise ValueError("radii must be positive")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "colors", col)
        object.__setattr__(self, "radii", rad)

    @property
    def n_points(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class Correspondence:
    """A 3D point visible in two views, with its integer pixel in each."""

    source_pixel: tuple[int, int]  # (u, v) in the source view
    target_pixel: tuple[int, int]  # (u, v) in the target view
    point_index: int


def build_scene(seed: int = 0, points_per_face: int = 110) -> PointScene:
    """Deterministic procedural scene: colored cube shell plus an L marker."""
    rng = np.random.default_rng(seed)
    positions = []
    colors = []
    for face in range(6):
        axis = face // 2
        sign = 1.0 if face % 2 == 0 else -1.0
        uv = rng.uniform(-0.5, 0.5, size=(points_per_face, 2))
        pts = np.empty((points_per_face, 3))
        others = [a for a in range(3) if a != axis]
        pts[:, others[0]] = uv[:, 0]
        pts[:, others[1]] = uv[:, 1]
        pts[:, axis] = sign * 0.5
        positions.append(pts)
        colors.append(np.tile(_FACE_COLORS[face], (points_per_face, 1)))

    # Off-center L on the +Z face, floated slightly inward so it wins the
    # z-buffer against the face it decorates.
    arm_long = np.linspace(-0.05, 0.30, 24)
    arm_short = np.linspace(0.05, 0.25, 14)
    marker = np.concatenate(
        [
            np.stack([np.full_like(arm_long, 0.05), arm_long], axis=1),
            np.stack([arm_short, np.full_like(arm_short, -0.05)], axis=1),
        ]
    )
    marker_pts = np.column_stack(
        [marker[:, 0], marker[:, 1], np.full(marker.shape[0], 0.49)]
    )
    positions.append(marker_pts)
    colors.append(np.tile(_MARKER_COLOR, (marker_pts.shape[0], 1)))

    positions = np.concatenate(positions)
    colors = np.concatenate(colors)
    radii = np.full(positions.shape[0], 0.025)
    return PointScene(positions, colors, radii)


def render_view(
    scene: PointScene, pose: CameraPose, intr: Intrinsics
) -> tuple[np.ndarray, np.ndarray]:
    """Render the scene from a camera: (h, w, 3) RGB in [0, 1] plus (h, w) depth.

    White background; background depth is +inf.
    """
    h, w = intr.height, intr.width
    image = np.ones((h, w, 3))
    depth = np.full((h, w), np.inf)
    for idx in range(scene.n_points):
        proj = project_point(pose, intr, scene.positions[idx])
        if proj is None:
            continue
        u, v, z = proj
        r_px = intr.focal * scene.radii[idx] / z
        c_lo = max(0, int(math.floor(u - r_px - 0.5)))
        c_hi = min(w - 1, int(math.ceil(u + r_px - 0.5)))
        r_lo = max(0, int(math.floor(v - r_px - 0.5)))
        r_hi = min(h - 1, int(math.ceil(v + r_px - 0.5)))
        if c_lo > c_hi or r_lo > r_hi:
            continue
        cols = np.arange(c_lo, c_hi + 1)
        rows = np.arange(r_lo, r_hi + 1)
        du = cols + 0.5 - u
        dv = rows + 0.5 - v
        inside = du[None, :] ** 2 + dv[:, None] ** 2 <= r_px * r_px
        cu, cv = int(math.floor(u)), int(math.floor(v))
        if 0 <= cu < w and 0 <= cv < h:
            inside[cv - r_lo, cu - c_lo] = True  # minimum one-pixel footprint
        window = depth[r_lo : r_hi + 1, c_lo : c_hi + 1]
        wins = inside & (z < window)
        window[wins] = z
        image[r_lo : r_hi + 1, c_lo : c_hi + 1][wins] = scene.colors[idx]
    return image, depth


def _visible_pixel(
    scene: PointScene,
    index: int,
    pose: CameraPose,
    intr: Intrinsics,
    depth_grid: np.ndarray,
) -> tuple[int, int] | None:
    proj = project_point(pose, intr, scene.positions[index])
    if proj is None:
        return None
    u, v, z = proj
    pu, pv = int(math.floor(u)), int(math.floor(v))
    if not (0 <= pu < intr.width and 0 <= pv < intr.height):
        return None
    if abs(z - depth_grid[pv, pu]) > VISIBILITY_TOL:
        return None
    return pu, pv


def correspondences(
    scene: PointScene, pose_i: CameraPose, pose_j: CameraPose, intr: Intrinsics
) -> list[Correspondence]:
    """Pixel pairs of scene points visible (front-facing, unoccluded) in both views.

    Visibility is checked against each view's own rendered depth grid at
    the given resolution, within VISIBILITY_TOL world units.
    """
    _, depth_i = render_view(scene, pose_i, intr)
    _, depth_j = render_view(scene, pose_j, intr)
    out = []
    for idx in range(scene.n_points):
        px_i = _visible_pixel(scene, idx, pose_i, intr, depth_i)
        if px_i is None:
            continue
        px_j = _visible_pixel(scene, idx, pose_j, intr, depth_j)
        if px_j is None:
            continue
        out.append(Correspondence(px_i, px_j, idx))
    return out


def scene_to_json(scene: PointScene) -> str:
    """Serialize a scene to structured text."""
    return json.dumps(
        {
            "positions": scene.positions.tolist(),
            "colors": scene.colors.tolist(),
            "radii": scene.radii.tolist(),
        }
    )


def scene_from_json(text: str) -> PointScene:
    data = json.loads(text)
    return PointScene(
        np.asarray(data["positions"], dtype=np.float64),
        np.asarray(data["colors"], dtype=np.float64),
        np.asarray(data["radii"], dtype=np.float64),
    )
