"""Epipolar lines and cross-view attention masks.

For a pixel in one view, the matching pixel in another view must lie on
an epipolar line.  This demo computes a fundamental matrix, rasterizes a
line onto a coarse feature grid, dilates it 3x3, and assembles the full
per-pair attention masks, checking them against scene ground truth.
"""

from pathlib import Path

import numpy as np

from epiview import (
    build_mask_set,
    build_scene,
    correspondences,
    dilate_mask,
    epipolar_line,
    fundamental_matrix,
    intrinsics_from_fov,
    rasterize_line,
    relative_pose,
    spherical_pose,
)
from epiview.fileio import write_mask_bitset, write_pgm

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

RES = 16
intr = intrinsics_from_fov(40.26, RES, RES)
pose_a = spherical_pose(10.0, 0.0, 3.5)
pose_b = spherical_pose(15.0, 40.0, 3.5)


def show(grid):
    for row in grid:
        print("   " + "".join("#" if cell else "." for cell in row))


# --- One source pixel's epipolar footprint -------------------------------
f = fundamental_matrix(relative_pose(pose_a, pose_b), intr, intr)
print("fundamental matrix (largest entry normalized to 1):")
print(np.array_str(f, precision=3, suppress_small=True))

line = epipolar_line(f, u=4, v=9)
print(f"\nline for source pixel (4, 9): "
      f"{line.a:+.3f} u + {line.b:+.3f} v + {line.c:+.3f} = 0")

raster = rasterize_line(line, RES, RES)
print("\nrasterized (half-pixel threshold):")
show(raster)
print("\nafter 3x3 dilation:")
show(dilate_mask(raster))

# --- Full mask set and ground-truth coverage ------------------------------
poses = [pose_a, pose_b, spherical_pose(-20.0, 160.0, 3.5)]
masks = build_mask_set(poses, intr)
hw = RES * RES
density = {k: masks.pairs[k].mean() for k in masks.ordered_pairs()}
print("\nmask density per ordered pair (fraction of allowed targets):")
for key, value in density.items():
    print(f"   {key}: {value:.3f}")

scene = build_scene(0)
total = hit = 0
for i in range(3):
    for j in range(3):
        if i == j:
            continue
        for c in correspondences(scene, poses[i], poses[j], intr):
            s = c.source_pixel[1] * RES + c.source_pixel[0]
            t = c.target_pixel[1] * RES + c.target_pixel[0]
            total += 1
            hit += bool(masks.pairs[(i, j)][s, t])
print(f"\nground-truth correspondences inside the masks: {hit}/{total}")

write_mask_bitset(OUT / "masks.bin", masks)
write_pgm(OUT / "mask_00_01.pgm", masks.pairs[(0, 1)].astype(np.uint8) * 255)
print(f"wrote {OUT / 'masks.bin'} and a PGM preview")
