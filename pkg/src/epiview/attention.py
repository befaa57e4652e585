"""Scaled dot-product attention and its masked multi-view extensions.

Single-head, no output projection, no residual path: the point is the
attention-map math itself.  A source location in one view attends over
its whole own view plus (optionally masked) locations of every other
view.  All arithmetic is float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .epipolar import EpipolarMaskSet
from .plucker import PluckerGrid, PluckerProjection, plucker_inject


@dataclass(frozen=True)
class FeatureGrid:
    """h x w x d feature map, flattenable to (h*w, d) row-major."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 3 or vals.shape[2] < 1:
            raise ValueError(f"feature grid must be (h, w, d), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("feature grid contains non-finite entries")
        object.__setattr__(self, "values", vals)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def depth(self) -> int:
        return self.values.shape[2]

    def flat(self) -> np.ndarray:
        """(h*w, d) view, rows in row-major pixel order."""
        return self.values.reshape(-1, self.values.shape[2])


@dataclass(frozen=True)
class AttentionWeights:
    """Single-head query/key/value projection matrices, each d x d."""

    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray

    def __post_init__(self):
        for name in ("wq", "wk", "wv"):
            m = np.asarray(getattr(self, name), dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be square, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, m)
        if not (self.wq.shape == self.wk.shape == self.wv.shape):
            raise ValueError("wq, wk, wv must share their shape")


def _masked_softmax_rows(logits: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    """Row-wise softmax restricted to allowed entries; disallowed are exactly 0."""
    if logits.shape != allowed.shape:
        raise ValueError("logits and mask shapes differ")
    if not allowed.any(axis=1).all():
        raise ValueError("every row needs at least one allowed entry")
    shifted = np.where(allowed, logits, -np.inf)
    shifted = shifted - shifted.max(axis=1, keepdims=True)
    weights = np.exp(shifted)  # exp(-inf) == 0.0, so disallowed entries vanish
    return weights / weights.sum(axis=1, keepdims=True)


def masked_softmax(logits, allowed) -> np.ndarray:
    """Softmax over the allowed subset of a logit vector.

    Disallowed positions come out exactly 0; the allowed ones are the
    softmax of their logits, stabilized by max subtraction.
    """
    logits = np.asarray(logits, dtype=np.float64)
    allowed = np.asarray(allowed, dtype=bool)
    if logits.ndim != 1 or logits.shape != allowed.shape:
        raise ValueError("logits and allowed must be 1-D and the same length")
    return _masked_softmax_rows(logits[None, :], allowed[None, :])[0]


def self_attention(features: FeatureGrid, w: AttentionWeights) -> FeatureGrid:
    """Plain single-view attention: softmax(Q Kᵀ / sqrt(d)) V per location."""
    f = features.flat()
    if f.shape[1] != w.wq.shape[0]:
        raise ValueError(
            f"feature depth {f.shape[1]} does not match weights {w.wq.shape[0]}"
        )
    q = f @ w.wq
    k = f @ w.wk
    v = f @ w.wv
    logits = q @ k.T / math.sqrt(f.shape[1])
    attn = _masked_softmax_rows(logits, np.ones(logits.shape, dtype=bool))
    return replace(features, values=(attn @ v).reshape(features.values.shape))


def multiview_attention(
    views: Sequence[FeatureGrid],
    w: AttentionWeights,
    masks: Optional[EpipolarMaskSet] = None,
    plucker_grids: Optional[Sequence[PluckerGrid]] = None,
    plucker_projection: Optional[PluckerProjection] = None,
) -> list[FeatureGrid]:
    """Cross-view attention over concatenated views, optionally masked.

    Each source location in view i attends over all of view i plus the
    mask-allowed locations of every other view.  ``masks=None`` means
    all-true cross-view masks (plain concatenated attention); a single
    view then reduces to :func:`self_attention`.  When Plücker grids and
    a projection are given, every view is passed through
    :func:`plucker_inject` before the q/k/v projections.
    """
    views = list(views)
    if not views:
        raise ValueError("need at least one view")
    h, width, d = views[0].values.shape
    for grid in views:
        if grid.values.shape != (h, width, d):
            raise ValueError("all views must share h, w, d")
    if d != w.wq.shape[0]:
        raise ValueError(f"feature depth {d} does not match weights {w.wq.shape[0]}")
    if (plucker_grids is None) != (plucker_projection is None):
        raise ValueError("plucker grids and projection must be given together")
    if plucker_grids is not None:
        if len(plucker_grids) != len(views):
            raise ValueError("need one Plücker grid per view")
        views = [
            plucker_inject(grid, pg, plucker_projection)
            for grid, pg in zip(views, plucker_grids)
        ]
    if masks is not None:
        if masks.n_views != len(views):
            raise ValueError("mask set view count does not match")
        if (masks.height, masks.width) != (h, width):
            raise ValueError("mask set resolution does not match the feature grids")

    hw = h * width
    flats = [grid.flat() for grid in views]
    self_block = np.ones((hw, hw), dtype=bool)

    outputs = []
    for i, grid in enumerate(views):
        others = [j for j in range(len(views)) if j != i]
        stacked = np.vstack([flats[i]] + [flats[j] for j in others])
        q = flats[i] @ w.wq
        k = stacked @ w.wk
        v = stacked @ w.wv
        logits = q @ k.T / math.sqrt(d)
        if masks is None:
            allowed = np.ones(logits.shape, dtype=bool)
        else:
            allowed = np.hstack([self_block] + [masks.mask_for(i, j) for j in others])
        attn = _masked_softmax_rows(logits, allowed)
        outputs.append(replace(grid, values=(attn @ v).reshape(h, width, d)))
    return outputs
