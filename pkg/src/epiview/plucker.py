"""Plücker ray embeddings and their additive injection into feature maps.

A ray (o, d) with unit direction d maps to the 6-vector (o x d, d).  The
moment o x d is invariant to sliding the origin along the ray, so any two
parametrizations of the same oriented line share one embedding, while the
reversed line maps to the exact negation.  Reversal makes opposed rays
anti-aligned: their embeddings' dot product is minus the squared norm,
which is what damps attention between opposite sides of an object.

The injection is ControlNet-style: a zero-initialized linear projection
added onto the feature map, so a freshly constructed projection leaves
features untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .camera import CameraPose, Intrinsics, Ray, ray_directions

if TYPE_CHECKING:  # only for annotations; FeatureGrid lives in attention
    from .attention import FeatureGrid


@dataclass(frozen=True)
class PluckerGrid:
    """h x w x 6 grid of per-pixel ray embeddings (m_x, m_y, m_z, d_x, d_y, d_z)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 3 or vals.shape[2] != 6:
            raise ValueError(f"Plücker grid must be (h, w, 6), got {vals.shape}")
        moments, dirs = vals[..., :3], vals[..., 3:]
        if np.max(np.abs(np.linalg.norm(dirs, axis=-1) - 1.0)) > 1e-9:
            raise ValueError("direction components must be unit vectors")
        if np.max(np.abs(np.sum(moments * dirs, axis=-1))) > 1e-9:
            raise ValueError("moment must be orthogonal to direction")
        object.__setattr__(self, "values", vals)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def flat(self) -> np.ndarray:
        """(h*w, 6) view, rows in row-major pixel order."""
        return self.values.reshape(-1, 6)


@dataclass(frozen=True)
class PluckerProjection:
    """Linear map from 6-d ray embeddings into feature space, plus bias."""

    weights: np.ndarray  # (6, d)
    bias: np.ndarray  # (d,)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != 6:
            raise ValueError(f"weights must be (6, d), got {w.shape}")
        if b.shape != (w.shape[1],):
            raise ValueError(f"bias must be ({w.shape[1]},), got {b.shape}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @classmethod
    def zero_init(cls, feature_dim: int) -> "PluckerProjection":
        """Fresh projection: all-zero weights and bias, identity on features."""
        return cls(np.zeros((6, feature_dim)), np.zeros(feature_dim))


def plucker_embed(ray: Ray) -> np.ndarray:
    """6-vector (o x d, d) for a world-space ray."""
    return np.concatenate([np.cross(ray.origin, ray.direction), ray.direction])


def plucker_grid(pose: CameraPose, intr: Intrinsics) -> PluckerGrid:
    """Per-pixel Plücker embeddings for every pixel-center ray of a camera."""
    dirs = ray_directions(pose, intr)
    moments = np.cross(np.broadcast_to(pose.position, dirs.shape), dirs)
    return PluckerGrid(np.concatenate([moments, dirs], axis=-1))


def plucker_inject(
    features: "FeatureGrid", plucker: PluckerGrid, proj: PluckerProjection
) -> "FeatureGrid":
    """Add the projected ray embeddings onto a feature grid.

    output = features + plucker @ weights + bias, per pixel.  With a
    zero-initialized projection this is the identity.
    """
    h, w, d = features.values.shape
    if (plucker.height, plucker.width) != (h, w):
        raise ValueError(
            f"grids disagree: features {h}x{w}, plucker {plucker.height}x{plucker.width}"
        )
    if proj.weights.shape[1] != d:
        raise ValueError(
            f"projection outputs {proj.weights.shape[1]} dims, features have {d}"
        )
    injected = features.values + plucker.values @ proj.weights + proj.bias
    return replace(features, values=injected)
