"""Full-reference fidelity metrics between a ground-truth plane and a test plane."""
from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

from .fsim import fsim_planes
from .raster import RasterImage

__all__ = ["CAP", "psnr", "snr", "ssim", "fsim", "mutual_information", "entropy"]

CAP = 120.0  # dB reported when the two images are identical
PEAK = 255.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(ref, test) -> tuple[np.ndarray, np.ndarray]:
    a = ref.data if isinstance(ref, RasterImage) else np.asarray(ref, dtype=np.float64)
    b = test.data if isinstance(test, RasterImage) else np.asarray(test, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("metrics need single-channel images")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}")
    return a, b


def psnr(ref, test) -> float:
    a, b = _pair(ref, test)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return CAP
    return 10.0 * math.log10(PEAK * PEAK / mse)


def snr(ref, test) -> float:
    a, b = _pair(ref, test)
    noise = float(np.sum((a - b) ** 2))
    if noise == 0.0:
        return CAP
    signal = float(np.sum(a * a))
    if signal == 0.0:
        return -math.inf
    return 10.0 * math.log10(signal / noise)


def _gauss_filter(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # separable window; keep only positions where it fits entirely ("valid")
    half = len(taps) // 2
    y = correlate1d(correlate1d(x, taps, axis=0, mode="constant"), taps, axis=1, mode="constant")
    return y[half:-half, half:-half]


def ssim(ref, test) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5), L = 255."""
    a, b = _pair(ref, test)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    r = np.arange(SSIM_WINDOW) - SSIM_WINDOW // 2
    taps = np.exp(-(r * r) / (2 * SSIM_SIGMA ** 2))
    taps /= taps.sum()
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    mu1 = _gauss_filter(a, taps)
    mu2 = _gauss_filter(b, taps)
    mu1_sq, mu2_sq, mu12 = mu1 * mu1, mu2 * mu2, mu1 * mu2
    s1 = _gauss_filter(a * a, taps) - mu1_sq
    s2 = _gauss_filter(b * b, taps) - mu2_sq
    s12 = _gauss_filter(a * b, taps) - mu12
    num = (2 * mu12 + c1) * (2 * s12 + c2)
    den = (mu1_sq + mu2_sq + c1) * (s1 + s2 + c2)
    return float(np.mean(num / den))


def fsim(ref, test) -> float:
    """Feature similarity index (phase congruency and gradient magnitude)."""
    a, b = _pair(ref, test)
    if min(a.shape) < 32:
        raise ValueError("FSIM needs images of at least 32x32")
    return fsim_planes(a, b)


def _bins(x: np.ndarray) -> np.ndarray:
    # round half away from zero (inputs are clipped to >= 0 first), as on save
    return np.floor(np.clip(x, 0, 255) + 0.5).astype(np.intp).ravel()


def _entropy_of_counts(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def entropy(img) -> float:
    """Shannon entropy (bits) of the 256-bin histogram of rounded intensities."""
    a = img.data if isinstance(img, RasterImage) else np.asarray(img, dtype=np.float64)
    return _entropy_of_counts(np.bincount(_bins(a), minlength=256))


def mutual_information(ref, test) -> float:
    """MI in bits from the 256x256 joint histogram of rounded, clipped intensities."""
    a, b = _pair(ref, test)
    ia, ib = _bins(a), _bins(b)
    joint = np.bincount(ia * 256 + ib, minlength=256 * 256)
    ha = _entropy_of_counts(np.bincount(ia, minlength=256))
    hb = _entropy_of_counts(np.bincount(ib, minlength=256))
    hab = _entropy_of_counts(joint)
    return max(0.0, ha + hb - hab)
