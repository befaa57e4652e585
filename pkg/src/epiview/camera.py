"""Pinhole camera model: spherical poses, relative poses, rays, projection.

Conventions (chosen once; every other module relies on them):

World frame
    Right-handed, Y up.  Scene content lives inside the unit cube
    ``[-0.5, 0.5]^3`` centered at the origin.

Camera frame
    Right-handed.  ``+x`` is image right, ``+y`` is image up, and the
    optical axis is ``-z`` (the camera looks along ``-z``).  Pixel rows
    grow downward, so projection negates the camera-frame y coordinate:
    a point with positive camera-frame y lands *above* the principal
    point (smaller v).  This keeps every rotation matrix a proper
    rotation (det +1) while preserving the usual top-left image origin.

Pixels
    Pixel ``(u, v)`` covers ``[u, u+1) x [v, v+1)`` in continuous image
    coordinates; its center is ``(u + 0.5, v + 0.5)``.

Pose singularities
    Look-at frames use world up ``+Y``.  When the viewing direction is
    (numerically) parallel to ``+Y`` -- elevation at the poles -- the up
    vector falls back to ``+Z`` so the frame stays well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ROTATION_TOL = 1e-9
MIN_DEPTH = 1e-12
_POLE_TOL = 1e-8

_WORLD_UP = np.array([0.0, 1.0, 0.0])
_POLE_UP = np.array([0.0, 0.0, 1.0])


def _as_array(x, shape, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    return arr


def _check_rotation(r: np.ndarray, name: str) -> np.ndarray:
    r = _as_array(r, (3, 3), name)
    if np.linalg.norm(r.T @ r - np.eye(3)) > ROTATION_TOL:
        raise ValueError(f"{name} is not orthonormal to {ROTATION_TOL}")
    if np.linalg.det(r) < 0.0:
        raise ValueError(f"{name} must have determinant +1")
    return r


@dataclass(frozen=True)
class Intrinsics:
    """Square-pixel pinhole intrinsics.

    The principal point defaults to the image center (``width/2``,
    ``height/2``) when not given explicitly.
    """

    focal: float
    width: int
    height: int
    cx: float = None  # type: ignore[assignment]
    cy: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.focal <= 0.0:
            raise ValueError(f"focal must be positive, got {self.focal}")
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be at least 1")
        if self.cx is None:
            object.__setattr__(self, "cx", self.width / 2.0)
        if self.cy is None:
            object.__setattr__(self, "cy", self.height / 2.0)

    def matrix(self) -> np.ndarray:
        """3x3 calibration matrix K."""
        return np.array(
            [
                [self.focal, 0.0, self.cx],
                [0.0, self.focal, self.cy],
                [0.0, 0.0, 1.0],
            ]
        )

    def scaled(self, width: int, height: int) -> "Intrinsics":
        """Intrinsics for the same camera at a different grid resolution.

        Focal length and principal point scale linearly with resolution,
        which is how attention-resolution grids inherit the image camera.
        """
        sx = width / self.width
        sy = height / self.height
        if not math.isclose(sx, sy, rel_tol=1e-12):
            raise ValueError("scaled() requires a uniform scale factor")
        return Intrinsics(self.focal * sx, width, height, self.cx * sx, self.cy * sy)


@dataclass(frozen=True)
class CameraPose:
    """Rigid camera placement: camera-to-world rotation plus world position."""

    rotation: np.ndarray  # (3, 3), camera-to-world
    position: np.ndarray  # (3,), world units

    def __post_init__(self):
        object.__setattr__(self, "rotation", _check_rotation(self.rotation, "rotation"))
        object.__setattr__(self, "position", _as_array(self.position, (3,), "position"))

    @property
    def optical_axis(self) -> np.ndarray:
        """World-frame viewing direction (camera-frame -z)."""
        return -self.rotation[:, 2]


@dataclass(frozen=True)
class RelativePose:
    """Maps points from a source camera frame into a target camera frame."""

    rotation: np.ndarray  # (3, 3)
    translation: np.ndarray  # (3,)

    def __post_init__(self):
        object.__setattr__(self, "rotation", _check_rotation(self.rotation, "rotation"))
        object.__setattr__(
            self, "translation", _as_array(self.translation, (3,), "translation")
        )

    def apply(self, point_src: np.ndarray) -> np.ndarray:
        """Map a source-camera-frame point into the target camera frame."""
        return self.rotation @ np.asarray(point_src, dtype=np.float64) + self.translation


@dataclass(frozen=True)
class Ray:
    """World-space ray with unit direction."""

    origin: np.ndarray  # (3,)
    direction: np.ndarray  # (3,), unit norm

    def __post_init__(self):
        object.__setattr__(self, "origin", _as_array(self.origin, (3,), "origin"))
        d = _as_array(self.direction, (3,), "direction")
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("ray direction must be unit length")
        object.__setattr__(self, "direction", d)


def intrinsics_from_fov(fov_deg: float, width: int, height: int) -> Intrinsics:
    """Intrinsics from a horizontal field of view in degrees.

    focal = width / (2 * tan(fov/2)); the principal point sits at the
    image center.
    """
    if not 0.0 < fov_deg < 180.0:
        raise ValueError(f"fov_deg must be in (0, 180), got {fov_deg}")
    if width < 1 or height < 1:
        raise ValueError("width and height must be at least 1")
    focal = width / (2.0 * math.tan(math.radians(fov_deg) / 2.0))
    return Intrinsics(focal, width, height)


def _look_at_origin(position: np.ndarray) -> np.ndarray:
    """Camera-to-world rotation pointing the optical axis at the world origin."""
    backward = position / np.linalg.norm(position)  # camera +z
    up = _WORLD_UP
    if np.linalg.norm(np.cross(backward, up)) < _POLE_TOL:
        up = _POLE_UP
    right = np.cross(up, backward)
    right /= np.linalg.norm(right)
    cam_up = np.cross(backward, right)
    return np.column_stack([right, cam_up, backward])


def spherical_pose(elevation_deg: float, azimuth_deg: float, distance: float) -> CameraPose:
    """Camera on a sphere around the origin, looking at the origin.

    position = distance * (cos(el) sin(az), sin(el), cos(el) cos(az));
    elevation 0 / azimuth 0 places the camera on the +Z axis.
    """
    if not -90.0 <= elevation_deg <= 90.0:
        raise ValueError(f"elevation_deg must be in [-90, 90], got {elevation_deg}")
    if distance <= 0.0:
        raise ValueError(f"distance must be positive, got {distance}")
    el = math.radians(elevation_deg)
    az = math.radians(azimuth_deg)
    position = distance * np.array(
        [math.cos(el) * math.sin(az), math.sin(el), math.cos(el) * math.cos(az)]
    )
    return CameraPose(_look_at_origin(position), position)


def relative_pose(src: CameraPose, tgt: CameraPose) -> RelativePose:
    """Pose difference mapping source-camera coordinates to target-camera ones.

    For any world point X: tgt_frame(X) = R @ src_frame(X) + t.
    """
    rotation = tgt.rotation.T @ src.rotation
    translation = tgt.rotation.T @ (src.position - tgt.position)
    return RelativePose(rotation, translation)


def ray_directions(pose: CameraPose, intr: Intrinsics) -> np.ndarray:
    """Unit world-frame directions through every pixel center, shape (h, w, 3)."""
    u = np.arange(intr.width) + 0.5
    v = np.arange(intr.height) + 0.5
    x = (u - intr.cx) / intr.focal
    y = -(v - intr.cy) / intr.focal
    dirs_cam = np.empty((intr.height, intr.width, 3))
    dirs_cam[:, :, 0] = x[None, :]
    dirs_cam[:, :, 1] = y[:, None]
    dirs_cam[:, :, 2] = -1.0
    dirs_world = dirs_cam @ pose.rotation.T
    dirs_world /= np.linalg.norm(dirs_world, axis=-1, keepdims=True)
    return dirs_world


def pixel_ray(pose: CameraPose, intr: Intrinsics, u: int, v: int) -> Ray:
    """World-space ray from the camera center through the center of pixel (u, v)."""
    if not (0 <= u < intr.width and 0 <= v < intr.height):
        raise ValueError(f"pixel ({u}, {v}) outside {intr.width}x{intr.height} grid")
    d_cam = np.array(
        [
            (u + 0.5 - intr.cx) / intr.focal,
            -(v + 0.5 - intr.cy) / intr.focal,
            -1.0,
        ]
    )
    d_world = pose.rotation @ d_cam
    d_world /= np.linalg.norm(d_world)
    return Ray(pose.position, d_world)


def project_point(pose: CameraPose, intr: Intrinsics, point) -> tuple[float, float, float] | None:
    """Project a world point to continuous pixel coordinates.

    Returns (u, v, depth) with depth the distance along the optical axis,
    or None when the point is at or behind the camera plane
    (depth <= MIN_DEPTH).
    """
    p_cam = pose.rotation.T @ (np.asarray(point, dtype=np.float64) - pose.position)
    depth = -p_cam[2]
    if depth <= MIN_DEPTH:
        return None
    u = intr.cx + intr.focal * p_cam[0] / depth
    v = intr.cy - intr.focal * p_cam[1] / depth
    return float(u), float(v), float(depth)
