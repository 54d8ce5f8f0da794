"""Feature similarity (FSIM) on a single plane.

Phase congruency uses the usual log-Gabor bank: 4 scales, 4 orientations,
minimum wavelength 6, scale ratio 2, bandwidth sigma/f0 = 0.55, angular
spread pi/4/1.2, noise threshold k = 2 (scaled by 1/1.7) and a Butterworth
low-pass at 0.45 of Nyquist, order 15.  The gradient map uses Scharr kernels
divided by 16.  Inputs larger than 256 px on the short side are first
box-filtered and subsampled by ``round(min_side / 256)``.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

NSCALE = 4
NORIENT = 4
MIN_WAVELENGTH = 6.0
MULT = 2.0
SIGMA_ONF = 0.55
D_THETA_ON_SIGMA = 1.2
NOISE_K = 2.0
EPS = 1e-4
T1 = 0.85
T2 = 160.0

_DX = np.array([[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]]) / 16.0
_DY = np.array([[3.0, 10.0, 3.0], [0.0, 0.0, 0.0], [-3.0, -10.0, -3.0]]) / 16.0


def _freq_axis(n: int) -> np.ndarray:
    if n % 2:
        return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / (n - 1)
    return np.arange(-n / 2, n / 2) / n


def _polar(rows: int, cols: int):
    x, y = np.meshgrid(_freq_axis(cols), _freq_axis(rows))
    radius = np.fft.ifftshift(np.sqrt(x ** 2 + y ** 2))
    theta = np.fft.ifftshift(np.arctan2(-y, x))
    return radius, theta


def _lowpass(rows: int, cols: int, cutoff: float = 0.45, order: int = 15) -> np.ndarray:
    radius, _ = _polar(rows, cols)
    return 1.0 / (1.0 + (radius / cutoff) ** (2 * order))


class _FilterBank:
    """Log-Gabor filters for one image size, reused across calls."""

    _cache: dict = {}

    def __new__(cls, rows, cols):
        key = (rows, cols)
        if key not in cls._cache:
            if len(cls._cache) > 8:
                cls._cache.clear()
            obj = super().__new__(cls)
            obj._build(rows, cols)
            cls._cache[key] = obj
        return cls._cache[key]

    def _build(self, rows, cols):
        radius, theta = _polar(rows, cols)
        radius = radius.copy()
        radius[0, 0] = 1.0
        lp = _lowpass(rows, cols)
        radial = []
        for s in range(NSCALE):
            fo = 1.0 / (MIN_WAVELENGTH * MULT ** s)
            lg = np.exp(-(np.log(radius / fo) ** 2) / (2 * np.log(SIGMA_ONF) ** 2)) * lp
            lg[0, 0] = 0.0
            radial.append(lg)
        theta_sigma = np.pi / NORIENT / D_THETA_ON_SIGMA
        sin_t, cos_t = np.sin(theta), np.cos(theta)
        self.filters = []  # [orient][scale]
        self.noise_terms = []
        for o in range(NORIENT):
            ang = o * np.pi / NORIENT
            ds = sin_t * np.cos(ang) - cos_t * np.sin(ang)
            dc = cos_t * np.cos(ang) + sin_t * np.sin(ang)
            spread = np.exp(-(np.abs(np.arctan2(ds, dc)) ** 2) / (2 * theta_sigma ** 2))
            fs = [lg * spread for lg in radial]
            self.filters.append(fs)
            # noise model: energy contributed by the spatial filters themselves
            spatial = [np.real(np.fft.ifft2(f)) * np.sqrt(rows * cols) for f in fs]
            sum_an2 = sum(float(np.sum(sp ** 2)) for sp in spatial)
            sum_aiaj = sum(float(np.sum(spatial[i] * spatial[j]))
                           for i in range(NSCALE - 1) for j in range(i + 1, NSCALE))
            em_n = float(np.sum(fs[0] ** 2))
            self.noise_terms.append((em_n, sum_an2, sum_aiaj))


def phase_congruency(img: np.ndarray) -> np.ndarray:
    """Phase congruency map in [0, 1] (zero where the image has no local energy)."""
    rows, cols = img.shape
    bank = _FilterBank(rows, cols)
    spectrum = np.fft.fft2(img)
    energy_all = np.zeros((rows, cols))
    an_all = np.zeros((rows, cols))
    for o in range(NORIENT):
        eo = [np.fft.ifft2(spectrum * f) for f in bank.filters[o]]
        sum_e = sum(np.real(x) for x in eo)
        sum_o = sum(np.imag(x) for x in eo)
        sum_an = sum(np.abs(x) for x in eo)
        x_energy = np.sqrt(sum_e ** 2 + sum_o ** 2) + EPS
        mean_e = sum_e / x_energy
        mean_o = sum_o / x_energy
        energy = np.zeros((rows, cols))
        for x in eo:
            e, od = np.real(x), np.imag(x)
            energy += e * mean_e + od * mean_o - np.abs(e * mean_o - od * mean_e)
        em_n, sum_an2, sum_aiaj = bank.noise_terms[o]
        mean_e2n = -np.median(np.abs(eo[0]) ** 2) / np.log(0.5)
        noise_power = mean_e2n / em_n
        est_noise_energy2 = 2 * noise_power * sum_an2 + 4 * noise_power * sum_aiaj
        tau = np.sqrt(est_noise_energy2 / 2)
        threshold = (tau * np.sqrt(np.pi / 2) + NOISE_K * np.sqrt((2 - np.pi / 2) * tau ** 2)) / 1.7
        energy_all += np.maximum(energy - threshold, 0.0)
        an_all += sum_an
    out = np.zeros((rows, cols))
    np.divide(energy_all, an_all, out=out, where=an_all > 0)
    return out


def _prefilter(y: np.ndarray) -> np.ndarray:
    rows, cols = y.shape
    f = max(1, int(round(min(rows, cols) / 256)))
    if f == 1:
        return y
    avg = convolve2d(y, np.full((f, f), 1.0 / (f * f)), mode="same")
    return avg[::f, ::f]


def _gradient(y: np.ndarray) -> np.ndarray:
    gx = convolve2d(y, _DX, mode="same")
    gy = convolve2d(y, _DY, mode="same")
    return np.sqrt(gx ** 2 + gy ** 2)


def fsim_planes(ref: np.ndarray, test: np.ndarray) -> float:
    y1 = _prefilter(np.asarray(ref, dtype=np.float64))
    y2 = _prefilter(np.asarray(test, dtype=np.float64))
    pc1, pc2 = phase_congruency(y1), phase_congruency(y2)
    g1, g2 = _gradient(y1), _gradient(y2)
    s_pc = (2 * pc1 * pc2 + T1) / (pc1 ** 2 + pc2 ** 2 + T1)
    s_g = (2 * g1 * g2 + T2) / (g1 ** 2 + g2 ** 2 + T2)
    s_l = s_pc * s_g
    pcm = np.maximum(pc1, pc2)
    total = float(np.sum(pcm))
    if total <= 0.0:
        # no phase structure in either image: fall back to an unweighted mean
        return float(np.mean(s_l))
    return float(np.sum(s_l * pcm) / total)
