"""Epipolar geometry on feature grids: fundamental matrices, line
rasterization, dilation, and cross-view attention mask assembly.

A source pixel in view i constrains its correspondent in view j to the
epipolar line F_ij @ x_i.  Masks realize that constraint per source
pixel: the line is rasterized onto the target grid at half-pixel
threshold, dilated by a full 3x3 structuring element for robustness, and
the result becomes one row of the (h*w) x (h*w) pair mask.  Attention to
the own view is unrestricted, so mask rows that come out empty (line
misses the grid, or the pixel sits on the epipole) still leave the
source pixel with its self-view targets.

Cameras here follow the convention of :mod:`epiview.camera` (optical
axis -z, image y down).  The fundamental matrix is built after
converting camera frames to the x-right / y-down / z-forward projection
frame, so the classic K_tgtᵀ⁻¹ [t]ₓ R K_src⁻¹ construction applies
unchanged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .camera import CameraPose, Intrinsics, RelativePose, relative_pose

DEGENERACY_TOL = 1e-8
LINE_NORM_TOL = 1e-12
RASTER_THRESHOLD = 0.5 + 1e-9

# Converts the -z-forward camera frame into the z-forward projection frame.
_CAM_TO_PROJ = np.diag([1.0, -1.0, -1.0])


class DegenerateGeometryError(ValueError):
    """Raised when camera centers (numerically) coincide: no epipolar constraint."""


class LineUndefinedError(ValueError):
    """Raised when an epipolar line degenerates (source pixel maps to the epipole)."""


@dataclass(frozen=True)
class EpipolarLine:
    """Line a*u + b*v + c = 0 in continuous target pixel coordinates, ‖(a,b)‖ = 1."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if abs(self.a * self.a + self.b * self.b - 1.0) > 1e-9:
            raise ValueError("line must be normalized to unit (a, b)")

    def distance(self, u: float, v: float) -> float:
        """Point-line distance in pixels."""
        return abs(self.a * u + self.b * v + self.c)


@dataclass(frozen=True)
class EpipolarMaskSet:
    """Boolean cross-view attention masks for every ordered view pair.

    ``pairs[(i, j)]`` has shape (h*w, h*w): row s lists the target-view
    pixels that source pixel s of view i may attend to in view j.  Pixels
    are row-major (s = v*w + u).  Self blocks are implicit and all-true.
    """

    n_views: int
    height: int
    width: int
    pairs: dict

    def __post_init__(self):
        hw = self.height * self.width
        expected = {
            (i, j)
            for i in range(self.n_views)
            for j in range(self.n_views)
            if i != j
        }
        if set(self.pairs.keys()) != expected:
            raise ValueError("mask set must cover every ordered view pair exactly once")
        for key, mask in self.pairs.items():
            if mask.shape != (hw, hw) or mask.dtype != np.bool_:
                raise ValueError(f"pair {key} mask must be bool ({hw}, {hw})")

    def mask_for(self, i: int, j: int) -> np.ndarray:
        """Pair mask for source view i attending into view j; all-true when i == j."""
        if i == j:
            hw = self.height * self.width
            return np.ones((hw, hw), dtype=bool)
        return self.pairs[(i, j)]

    def ordered_pairs(self):
        """Ordered (i, j) keys, i != j, in lexicographic order."""
        return sorted(self.pairs.keys())


def _skew(t: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -t[2], t[1]],
            [t[2], 0.0, -t[0]],
            [-t[1], t[0], 0.0],
        ]
    )


def fundamental_matrix(
    rel: RelativePose, intr_src: Intrinsics, intr_tgt: Intrinsics
) -> np.ndarray:
    """Fundamental matrix for an ordered camera pair.

    Satisfies x_tgtᵀ F x_src = 0 for corresponding homogeneous pixel
    coordinates (u, v, 1) of any 3D point.  Scaled so the entry of
    largest magnitude is exactly 1 (first such entry in row-major order
    on ties), which makes the matrix deterministic and distance
    computations well scaled.
    """
    t = rel.translation
    if np.linalg.norm(t) < DEGENERACY_TOL:
        raise DegenerateGeometryError(
            "camera centers coincide; epipolar geometry is undefined"
        )
    r_proj = _CAM_TO_PROJ @ rel.rotation @ _CAM_TO_PROJ
    t_proj = _CAM_TO_PROJ @ t
    essential = _skew(t_proj) @ r_proj
    k_src_inv = np.linalg.inv(intr_src.matrix())
    k_tgt_inv = np.linalg.inv(intr_tgt.matrix())
    f = k_tgt_inv.T @ essential @ k_src_inv
    pivot = f.flat[np.argmax(np.abs(f))]
    return f / pivot


def epipolar_line(f: np.ndarray, u: int, v: int) -> EpipolarLine:
    """Epipolar line in the target grid for source pixel (u, v).

    Evaluated at the source pixel center (u + 0.5, v + 0.5); the result
    is normalized so |a*u' + b*v' + c| is point-line distance.
    """
    line = np.asarray(f, dtype=np.float64) @ np.array([u + 0.5, v + 0.5, 1.0])
    norm = float(np.hypot(line[0], line[1]))
    if norm < LINE_NORM_TOL:
        raise LineUndefinedError(f"pixel ({u}, {v}) maps to the epipole")
    return EpipolarLine(line[0] / norm, line[1] / norm, line[2] / norm)


def rasterize_line(line: EpipolarLine, h: int, w: int) -> np.ndarray:
    """Boolean h x w grid marking cells whose center lies within half a
    pixel of the line.  A line missing the grid yields all-false."""
    u = np.arange(w) + 0.5
    v = np.arange(h) + 0.5
    dist = np.abs(line.a * u[None, :] + line.b * v[:, None] + line.c)
    return dist <= RASTER_THRESHOLD


def dilate_mask(grid: np.ndarray, radius: int = 1) -> np.ndarray:
    """Morphological dilation with a full (2r+1) x (2r+1) structuring element."""
    grid = np.asarray(grid, dtype=bool)
    size = 2 * radius + 1
    return ndimage.binary_dilation(grid, structure=np.ones((size, size), dtype=bool))


def build_mask_set(poses: list[CameraPose], intr: Intrinsics) -> EpipolarMaskSet:
    """Assemble the epipolar attention masks for every ordered view pair.

    ``intr`` must already be at feature-grid resolution.  Degenerate
    pairs (coincident centers) fall back to an all-true mask with a
    warning; source pixels whose line is undefined or misses the target
    grid get an all-false row, leaving them the implicit self view.
    """
    if len(poses) < 2:
        raise ValueError("need at least two views to build cross-view masks")
    h, w = intr.height, intr.width
    hw = h * w
    pairs = {}
    for i, src in enumerate(poses):
        for j, tgt in enumerate(poses):
            if i == j:
                continue
            try:
                f = fundamental_matrix(relative_pose(src, tgt), intr, intr)
            except DegenerateGeometryError:
                warnings.warn(
                    f"views {i} and {j} share a camera center; "
                    "falling back to a full attention mask",
                    stacklevel=2,
                )
                pairs[(i, j)] = np.ones((hw, hw), dtype=bool)
                continue
            mask = np.zeros((hw, hw), dtype=bool)
            for s in range(hw):
                try:
                    line = epipolar_line(f, s % w, s // w)
                except LineUndefinedError:
                    continue  # row stays empty; self view remains available
                mask[s] = dilate_mask(rasterize_line(line, h, w)).reshape(-1)
            pairs[(i, j)] = mask
    return EpipolarMaskSet(n_views=len(poses), height=h, width=w, pairs=pairs)
