"""Noise schedule, deterministic DDIM stepping, guidance composition, and
joint multi-view sampling with a round-robin pair scheduler.

Timestep convention: a schedule with T steps exposes noise levels for
t = 1..T via ``alpha_bar_at``; t = 0 is the clean image and has
alpha_bar exactly 1.  A full trajectory therefore runs t = T, T-1, ..., 1
and the final step, to t_prev = 0, returns the predicted clean image.

The pair scheduler is a circle-method 1-factorization: with M views it
cycles through M-1 rounds (even M) or M rounds (odd M, via a dummy bye)
such that every unordered pair occurs exactly once per cycle.  For odd M
the bye'd view is denoised in one extra pair per round; the partner's
extra noise estimate is discarded so every latent still advances exactly
once per timestep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .camera import CameraPose, RelativePose, relative_pose

BETA_START = 0.00085
BETA_END = 0.012
BASE_STEPS = 1000

# denoiser(x_a, x_b, t, view_a=, view_b=, condition=, rel_pose=, masks=, pluckers=)
#   -> (eps_a, eps_b); must be pure and deterministic for fixed inputs.
PairDenoiser = Callable[..., tuple]


@dataclass(frozen=True)
class DiffusionSchedule:
    """Strictly decreasing cumulative signal fractions alpha_bar for t = 1..T."""

    alpha_bar: np.ndarray

    def __post_init__(self):
        ab = np.asarray(self.alpha_bar, dtype=np.float64)
        if ab.ndim != 1 or ab.size < 1:
            raise ValueError("alpha_bar must be a non-empty 1-D array")
        if np.any(ab <= 0.0) or np.any(ab > 1.0):
            raise ValueError("alpha_bar entries must lie in (0, 1]")
        if ab.size > 1 and np.any(np.diff(ab) >= 0.0):
            raise ValueError("alpha_bar must be strictly decreasing")
        if ab[0] < 0.99:
            raise ValueError("alpha_bar[0] must be close to 1")
        object.__setattr__(self, "alpha_bar", ab)

    @property
    def steps(self) -> int:
        return self.alpha_bar.size

    def alpha_bar_at(self, t: int) -> float:
        """alpha_bar for schedule index t; t = 0 is the clean image (exactly 1)."""
        if not 0 <= t <= self.steps:
            raise ValueError(f"timestep {t} outside [0, {self.steps}]")
        if t == 0:
            return 1.0
        return float(self.alpha_bar[t - 1])


@dataclass(frozen=True)
class CfgScales:
    """Guidance strengths for the text / camera / epipolar / Plücker levels."""

    s_t: float = 7.5
    s_c: float = 1.0
    s_e: float = 1.0
    s_p: float = 1.0

    def __post_init__(self):
        for name in ("s_t", "s_c", "s_e", "s_p"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)


@dataclass
class ViewSet:
    """Joint state of N views mid-sampling: latents, poses, condition, timestep."""

    latents: list
    poses: list
    condition: Optional[np.ndarray]
    timestep: int

    def __post_init__(self):
        if len(self.latents) < 1:
            raise ValueError("need at least one view")
        if len(self.poses) != len(self.latents):
            raise ValueError("one pose per latent required")
        shape = self.latents[0].shape
        if any(x.shape != shape for x in self.latents):
            raise ValueError("all latents must share a shape")


def make_schedule(steps: int) -> DiffusionSchedule:
    """Scaled-linear schedule subsampled from 1000 base steps.

    Base betas interpolate linearly in sqrt space from 0.00085 to 0.012
    (Stable Diffusion v1.x constants); step t of the subsampled schedule
    reuses base index t * (1000 // steps), so the first entry is always
    1 - 0.00085.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if steps > BASE_STEPS:
        raise ValueError(f"steps must be <= {BASE_STEPS}, got {steps}")
    betas = np.linspace(BETA_START**0.5, BETA_END**0.5, BASE_STEPS) ** 2
    alpha_bar = np.cumprod(1.0 - betas)
    indices = np.arange(steps) * (BASE_STEPS // steps)
    return DiffusionSchedule(alpha_bar[indices])


def forward_noise(
    x0: np.ndarray, t: int, sched: DiffusionSchedule, eps: np.ndarray
) -> np.ndarray:
    """x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise ValueError(f"x0 shape {x0.shape} != eps shape {eps.shape}")
    ab = sched.alpha_bar_at(t)
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * eps


def oracle_denoiser(
    x0_targets: Sequence[np.ndarray], sched: DiffusionSchedule
) -> PairDenoiser:
    """Exact denoiser built around known clean targets, for verification.

    The returned callable inverts the forward-noising identity per view:
    eps_hat = (x_t - sqrt(alpha_bar_t) x0) / sqrt(1 - alpha_bar_t),
    selecting x0 by view index and ignoring condition, relative pose,
    masks, and Plücker grids.  At alpha_bar_t == 1 it returns zero noise.
    """
    targets = [np.asarray(x, dtype=np.float64) for x in x0_targets]

    def invert(x_t: np.ndarray, t: int, view: int) -> np.ndarray:
        x0 = targets[view]
        if x_t.shape != x0.shape:
            raise ValueError(
                f"latent shape {x_t.shape} != target shape {x0.shape} for view {view}"
            )
        ab = sched.alpha_bar_at(t)
        if ab >= 1.0:
            return np.zeros_like(x0)
        return (x_t - np.sqrt(ab) * x0) / np.sqrt(1.0 - ab)

    def denoise(
        x_a: np.ndarray,
        x_b: np.ndarray,
        t: int,
        *,
        view_a: int,
        view_b: int,
        condition=None,
        rel_pose: Optional[RelativePose] = None,
        masks=None,
        pluckers=None,
    ) -> tuple[np.ndarray, np.ndarray]:
        return invert(x_a, t, view_a), invert(x_b, t, view_b)

    return denoise


def ddim_step(
    x_t: np.ndarray, eps_hat: np.ndarray, t: int, t_prev: int, sched: DiffusionSchedule
) -> np.ndarray:
    """Deterministic (eta = 0) DDIM update from schedule index t to t_prev.

    x0_pred = (x_t - sqrt(1 - ab_t) eps_hat) / sqrt(ab_t);
    result  = sqrt(ab_prev) x0_pred + sqrt(1 - ab_prev) eps_hat.
    Stepping to t_prev = 0 (alpha_bar exactly 1) returns x0_pred.
    """
    if not (t > t_prev >= 0):
        raise ValueError(f"need t > t_prev >= 0, got t={t}, t_prev={t_prev}")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    if x_t.shape != eps_hat.shape:
        raise ValueError("latent and noise-estimate shapes differ")
    ab_t = sched.alpha_bar_at(t)
    ab_prev = sched.alpha_bar_at(t_prev)
    x0_pred = (x_t - np.sqrt(1.0 - ab_t) * eps_hat) / np.sqrt(ab_t)
    return np.sqrt(ab_prev) * x0_pred + np.sqrt(1.0 - ab_prev) * eps_hat


def blob_init(height: int, width: int, channels: int, sigma: float) -> np.ndarray:
    """Black Gaussian blob on a white background, replicated across channels.

    value = 1 - exp(-((u - w/2)^2 + (v - h/2)^2) / (2 sigma^2)) at pixel
    centers, with white = 1 and black = 0.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    u = np.arange(width) + 0.5 - width / 2.0
    v = np.arange(height) + 0.5 - height / 2.0
    r2 = u[None, :] ** 2 + v[:, None] ** 2
    blob = 1.0 - np.exp(-r2 / (2.0 * sigma * sigma))
    return np.repeat(blob[:, :, None], channels, axis=2)


def cfg_compose(
    e_null: np.ndarray,
    e_t: np.ndarray,
    e_tc: np.ndarray,
    e_tce: np.ndarray,
    e_full: np.ndarray,
    scales: CfgScales,
) -> np.ndarray:
    """Four-level guidance composition over nested condition sets.

    Algebraically
        e_null + s_t (e_t - e_null) + s_c (e_tc - e_t)
               + s_e (e_tce - e_tc) + s_p (e_full - e_tce),
    evaluated with one coefficient per estimate so that unit scales
    telescope exactly (all scales 1 returns e_full bit-for-bit).
    """
    grids = (e_null, e_t, e_tc, e_tce, e_full)
    arrays = [np.asarray(g, dtype=np.float64) for g in grids]
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise ValueError("all five score estimates must share a shape")
    coeffs = (
        1.0 - scales.s_t,
        scales.s_t - scales.s_c,
        scales.s_c - scales.s_e,
        scales.s_e - scales.s_p,
        scales.s_p,
    )
    out = np.zeros(shape)
    for c, a in zip(coeffs, arrays):
        out += c * a
    return out


def _circle_round(n: int, r: int) -> list[tuple[int, int]]:
    """Round r of the circle-method 1-factorization of n players (n even).

    Player 0 meets 1 + r; the rest pair up by a + b = 2r (mod n - 1) on
    the rotating positions 1..n-1.
    """
    m = n - 1
    pairs = [(0, 1 + r)]
    for a in range(m):
        if a == r:
            continue
        b = (2 * r - a) % m
        if a < b:
            pairs.append((1 + a, 1 + b))
    return pairs


def pair_schedule(m: int, round_index: int) -> list[tuple[int, int]]:
    """Disjoint unordered view pairs for one denoising round.

    Even m: round r of the m-1 round cycle.  Odd m: the factorization of
    m+1 views with a dummy, whose partner sits that round out (the
    sampler gives it one extra pairing).  Rounds repeat cyclically, and
    every unordered pair appears exactly once per full cycle.
    """
    if m < 2:
        raise ValueError(f"need at least two views, got {m}")
    if m % 2 == 0:
        return _circle_round(m, round_index % (m - 1))
    pairs = _circle_round(m + 1, round_index % m)
    return [p for p in pairs if m not in p]


def _bye_view(m: int, pairs: list[tuple[int, int]]) -> Optional[int]:
    covered = {v for pair in pairs for v in pair}
    left_out = [v for v in range(m) if v not in covered]
    return left_out[0] if left_out else None


def joint_multiview_sample(
    m: int,
    denoiser: PairDenoiser,
    poses: Sequence[CameraPose],
    condition: Optional[np.ndarray],
    sched: DiffusionSchedule,
    shape: tuple[int, int, int],
    steps: int = 200,
    blob_steps: int = 20,
    seed: int = 0,
    masks=None,
    pluckers=None,
    blob_sigma: Optional[float] = None,
) -> list[np.ndarray]:
    """Jointly denoise M views with a two-view denoiser.

    Latents start as seeded Gaussian noise of the given (h, w, c) shape.
    For the first ``blob_steps`` timesteps each latent is replaced by a
    freshly noised Gaussian-blob image (sigma defaults to width / 8)
    before denoising.  Every timestep denoises the disjoint pairs of the
    current scheduler round at one shared noise level, then advances each
    latent once with a deterministic DDIM step.  Fully deterministic for
    a fixed seed.
    """
    if m < 2:
        raise ValueError(f"need at least two views, got {m}")
    if len(poses) != m:
        raise ValueError(f"expected {m} poses, got {len(poses)}")
    if steps != sched.steps:
        raise ValueError(f"steps ({steps}) must match the schedule ({sched.steps})")
    if not 0 <= blob_steps <= steps:
        raise ValueError("blob_steps must lie in [0, steps]")
    height, width, channels = shape
    sigma = width / 8.0 if blob_sigma is None else blob_sigma
    blob = blob_init(height, width, channels, sigma)

    rng = np.random.default_rng(seed)
    state = ViewSet(
        latents=[rng.standard_normal(shape) for _ in range(m)],
        poses=list(poses),
        condition=condition,
        timestep=steps,
    )

    for k in range(steps):
        t = steps - k
        t_prev = t - 1
        if k < blob_steps:
            # Re-anchor every latent to the blob image at the current noise level.
            state.latents = [
                forward_noise(blob, t, sched, rng.standard_normal(shape))
                for _ in range(m)
            ]
        pairs = pair_schedule(m, k)
        eps_hat: list = [None] * m
        for i, j in pairs:
            eps_i, eps_j = denoiser(
                state.latents[i],
                state.latents[j],
                t,
                view_a=i,
                view_b=j,
                condition=condition,
                rel_pose=relative_pose(poses[i], poses[j]),
                masks=masks,
                pluckers=pluckers,
            )
            eps_hat[i], eps_hat[j] = eps_i, eps_j
        bye = _bye_view(m, pairs)
        if bye is not None:
            partner = min(v for v in range(m) if v != bye)
            eps_b, _discarded = denoiser(
                state.latents[bye],
                state.latents[partner],
                t,
                view_a=bye,
                view_b=partner,
                condition=condition,
                rel_pose=relative_pose(poses[bye], poses[partner]),
                masks=masks,
                pluckers=pluckers,
            )
            eps_hat[bye] = eps_b
        state.latents = [
            ddim_step(x, e, t, t_prev, sched) for x, e in zip(state.latents, eps_hat)
        ]
        state.timestep = t_prev
    return state.latents
