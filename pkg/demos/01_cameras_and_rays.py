"""Cameras, rays, and projection round trips.

Walks through the pinhole camera model: building intrinsics from a field
of view, placing cameras on a sphere around the origin, mapping world
points to pixels and back along pixel rays.
"""

import numpy as np

from epiview import (
    intrinsics_from_fov,
    pixel_ray,
    project_point,
    relative_pose,
    spherical_pose,
)

# --- Intrinsics from a field of view -----------------------------------
# The training protocol renders 256 px images with a 40.26 degree FOV at
# camera distance 3.5; the focal length follows from fov alone.
intr = intrinsics_from_fov(40.26, 256, 256)
print(f"focal length at 256 px: {intr.focal:.4f} px")
print(f"principal point: ({intr.cx}, {intr.cy})")

# Attention operates on coarser feature grids; intrinsics scale linearly.
feat = intr.scaled(32, 32)
print(f"focal length at  32 px: {feat.focal:.4f} px  (256-px focal / 8)")

# --- Spherical camera placement ----------------------------------------
front = spherical_pose(elevation_deg=0.0, azimuth_deg=0.0, distance=3.5)
side = spherical_pose(elevation_deg=0.0, azimuth_deg=90.0, distance=3.5)
print("\nfront camera position:", front.position)
print("front optical axis:   ", front.optical_axis)
print("side camera position: ", side.position)

# Every spherical pose looks at the origin, so the origin lands on the
# principal point.
u, v, depth = project_point(front, intr, [0.0, 0.0, 0.0])
print(f"\norigin projects to ({u}, {v}) at depth {depth}")

# --- Relative poses ------------------------------------------------------
rel = relative_pose(front, side)
x_world = np.array([0.1, -0.2, 0.25])
x_front = front.rotation.T @ (x_world - front.position)
x_side = side.rotation.T @ (x_world - side.position)
print("\nrelative pose maps front-frame points into the side frame:")
print("  mapped:", rel.apply(x_front))
print("  direct:", x_side)

# --- Pixel rays and the projection round trip ---------------------------
ray = pixel_ray(front, intr, u=40, v=200)
point = ray.origin + 3.0 * ray.direction
pu, pv, pdepth = project_point(front, intr, point)
print(f"\nray through pixel (40, 200), walked 3 units, reprojects to "
      f"({pu:.9f}, {pv:.9f})")
print("expected pixel center: (40.5, 200.5)")

behind = project_point(front, intr, [0.0, 0.0, 10.0])
print("a point behind the camera projects to:", behind)
