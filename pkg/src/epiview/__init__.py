"""Geometry and inference kernels for spatially-aware multi-view diffusion:
epipolar-masked cross-view attention, Plücker ray embeddings, joint DDIM
sampling, a synthetic verification scene, and PSNR/SSIM evaluation.
"""

from .attention import (
    AttentionWeights,
    FeatureGrid,
    masked_softmax,
    multiview_attention,
    self_attention,
)
from .camera import (
    CameraPose,
    Intrinsics,
    Ray,
    RelativePose,
    intrinsics_from_fov,
    pixel_ray,
    project_point,
    ray_directions,
    relative_pose,
    spherical_pose,
)
from .diffusion import (
    CfgScales,
    DiffusionSchedule,
    ViewSet,
    blob_init,
    cfg_compose,
    ddim_step,
    forward_noise,
    joint_multiview_sample,
    make_schedule,
    oracle_denoiser,
    pair_schedule,
)
from .epipolar import (
    DegenerateGeometryError,
    EpipolarLine,
    EpipolarMaskSet,
    LineUndefinedError,
    build_mask_set,
    dilate_mask,
    epipolar_line,
    fundamental_matrix,
    rasterize_line,
)
from .metrics import MetricReport, compare_images, psnr, ssim
from .plucker import (
    PluckerGrid,
    PluckerProjection,
    plucker_embed,
    plucker_grid,
    plucker_inject,
)
from .scene import (
    Correspondence,
    PointScene,
    build_scene,
    correspondences,
    render_view,
    scene_from_json,
    scene_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionWeights",
    "CameraPose",
    "CfgScales",
    "Correspondence",
    "DegenerateGeometryError",
    "DiffusionSchedule",
    "EpipolarLine",
    "EpipolarMaskSet",
    "FeatureGrid",
    "Intrinsics",
    "LineUndefinedError",
    "MetricReport",
    "PluckerGrid",
    "PluckerProjection",
    "PointScene",
    "Ray",
    "RelativePose",
    "ViewSet",
    "blob_init",
    "build_mask_set",
    "build_scene",
    "cfg_compose",
    "compare_images",
    "correspondences",
    "ddim_step",
    "dilate_mask",
    "epipolar_line",
    "forward_noise",
    "fundamental_matrix",
    "intrinsics_from_fov",
    "joint_multiview_sample",
    "make_schedule",
    "masked_softmax",
    "multiview_attention",
    "oracle_denoiser",
    "pair_schedule",
    "pixel_ray",
    "plucker_embed",
    "plucker_grid",
    "plucker_inject",
    "project_point",
    "psnr",
    "rasterize_line",
    "ray_directions",
    "relative_pose",
    "render_view",
    "scene_from_json",
    "scene_to_json",
    "self_attention",
    "spherical_pose",
    "ssim",
]
