"""PSNR and SSIM for novel-view evaluation, plus CSV reporting.

Images are float arrays in [0, 1].  PSNR is 10*log10(1/MSE) capped at
99 dB for (near-)identical images.  SSIM follows the standard reference
formulation: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
dynamic range 1, population statistics, computed per channel over valid
windows and averaged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

PSNR_CAP_DB = 99.0
_PSNR_CAP_MSE = 1e-10
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for unit-range images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse < _PSNR_CAP_MSE:
        return PSNR_CAP_DB
    return 10.0 * np.log10(1.0 / mse)


def _gaussian_taps() -> np.ndarray:
    half = SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * SSIM_SIGMA**2))
    return g / g.sum()


def _windowed(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Gaussian-weighted local means over valid (fully interior) windows."""
    half = SSIM_WINDOW // 2
    out = correlate1d(img, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[half:-half, half:-half]


def _ssim_channel(a: np.ndarray, b: np.ndarray, taps: np.ndarray) -> float:
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_a = _windowed(a, taps)
    mu_b = _windowed(b, taps)
    var_a = _windowed(a * a, taps) - mu_a * mu_a
    var_b = _windowed(b * b, taps) - mu_b * mu_b
    cov = _windowed(a * b, taps) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity between two unit-range images.

    Accepts (h, w) or (h, w, channels); channels are scored separately
    and averaged.  Requires min(h, w) >= 11 so at least one full window
    fits.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[:, :, None]
        b = b[:, :, None]
    if a.ndim != 3:
        raise ValueError("images must be (h, w) or (h, w, c)")
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels on each side")
    taps = _gaussian_taps()
    scores = [_ssim_channel(a[:, :, c], b[:, :, c], taps) for c in range(a.shape[2])]
    return float(np.mean(scores))


@dataclass(frozen=True)
class MetricReport:
    """Per-image PSNR/SSIM rows plus their means."""

    names: tuple
    psnr_db: tuple
    ssim: tuple

    def __post_init__(self):
        if not (len(self.names) == len(self.psnr_db) == len(self.ssim)):
            raise ValueError("names, psnr_db, and ssim must align")
        if len(self.names) == 0:
            raise ValueError("report needs at least one image pair")

    @property
    def mean_psnr_db(self) -> float:
        return float(np.mean(self.psnr_db))

    @property
    def mean_ssim(self) -> float:
        return float(np.mean(self.ssim))

    def to_csv(self) -> str:
        """Byte-stable CSV: header, one row per image, then the mean row."""
        lines = ["image,psnr_db,ssim"]
        for name, p, s in zip(self.names, self.psnr_db, self.ssim):
            lines.append(f"{name},{p:.6f},{s:.6f}")
        lines.append(f"mean,{self.mean_psnr_db:.6f},{self.mean_ssim:.6f}")
        return "\n".join(lines) + "\n"


def compare_images(pairs: list[tuple[str, np.ndarray, np.ndarray]]) -> MetricReport:
    """Score a list of (name, image_a, image_b) pairs."""
    names, psnrs, ssims = [], [], []
    for name, a, b in pairs:
        names.append(name)
        psnrs.append(psnr(a, b))
        ssims.append(ssim(a, b))
    return MetricReport(tuple(names), tuple(psnrs), tuple(ssims))
