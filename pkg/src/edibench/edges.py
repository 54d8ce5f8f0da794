"""Canny edge maps and the two edge-preservation ratios (accuracy / robustness)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .raster import RasterImage

__all__ = ["CannyParams", "EdgeMap", "canny", "epr_accuracy", "epr_robustness", "EmptyReferenceError"]


class EmptyReferenceError(ValueError):
    """The reference edge map has no edge pixels, so accuracy is undefined."""


@dataclass(frozen=True)
class CannyParams:
    sigma: float = math.sqrt(2.0)
    high_percentile: float = 0.70
    low_ratio: float = 0.40

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not 0 < self.high_percentile < 1 or not 0 < self.low_ratio < 1:
            raise ValueError("high_percentile and low_ratio must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class EdgeMap:
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool, copy=True)
        if m.ndim != 2:
            raise ValueError("edge mask must be 2-D")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other):
        return isinstance(other, EdgeMap) and np.array_equal(self.mask, other.mask)

    def save_pgm(self, path) -> None:
        """Binary PGM, edges white (255) on black."""
        body = np.where(self.mask, 255, 0).astype(np.uint8)
        with open(Path(path), "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (self.width, self.height))
            fh.write(body.tobytes())


def _smooth(x: np.ndarray, sigma: float) -> np.ndarray:
    radius = int(math.ceil(3 * sigma))
    r = np.arange(-radius, radius + 1)
    taps = np.exp(-(r * r) / (2 * sigma * sigma))
    taps /= taps.sum()
    y = ndimage.correlate1d(x, taps, axis=0, mode="nearest")
    return ndimage.correlate1d(y, taps, axis=1, mode="nearest")


# neighbour offsets (dr, dc) along the quantised gradient direction
_DIRS = ((0, 1), (1, 1), (1, 0), (1, -1))


def _nms(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    ang = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = np.floor((ang + 22.5) / 45.0).astype(int) % 4
    padded = np.pad(mag, 1)
    h, w = mag.shape
    keep = np.zeros_like(mag, dtype=bool)
    for k, (dr, dc) in enumerate(_DIRS):
        ahead = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        behind = padded[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        # ties on a plateau go to the pixel further along the gradient
        keep |= (sector == k) & (mag >= behind) & (mag > ahead)
    keep &= mag > 0
    # Neighbours in another sector can survive on both sides of a maximum;
    # drop the weaker one so the map stays one pixel thick along every gradient.
    # Removing pixels never creates a new such triple, so one pass suffices.
    kp = np.pad(keep, 1)
    drop = np.zeros((h + 2, w + 2), dtype=bool)
    for k, (dr, dc) in enumerate(_DIRS):
        ahead_k = kp[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        behind_k = kp[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        centre = keep & (sector == k) & ahead_k & behind_k
        if not centre.any():
            continue
        ahead = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        behind = padded[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        drop_ahead = centre & (ahead <= behind)
        drop_behind = centre & ~drop_ahead
        drop[1 + dr:1 + dr + h, 1 + dc:1 + dc + w] |= drop_ahead
        drop[1 - dr:1 - dr + h, 1 - dc:1 - dc + w] |= drop_behind
    keep &= ~drop[1:-1, 1:-1]
    return np.where(keep, mag, 0.0)


def canny(img, p: CannyParams = CannyParams()) -> EdgeMap:
    """Thin binary edge map with automatic hysteresis thresholds."""
    x = img.data if isinstance(img, RasterImage) else np.asarray(img, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("canny needs a single-channel image")
    if min(x.shape) < 8:
        raise ValueError(f"image too small for edge detection: {x.shape[1]}x{x.shape[0]} (need >= 8x8)")
    s = _smooth(x, p.sigma)
    gx = ndimage.sobel(s, axis=1, mode="nearest")
    gy = ndimage.sobel(s, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    nz = np.sort(mag[mag > 0])
    if nz.size == 0:
        return EdgeMap(np.zeros(x.shape, dtype=bool))
    high = nz[max(0, math.ceil(p.high_percentile * nz.size) - 1)]
    low = p.low_ratio * high
    thin = _nms(mag, gx, gy)
    weak = thin >= low
    weak &= thin > 0
    labels, count = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return EdgeMap(np.zeros(x.shape, dtype=bool))
    strong_ids = np.unique(labels[(thin >= high) & weak])
    return EdgeMap(np.isin(labels, strong_ids[strong_ids > 0]))


def _check(ems: EdgeMap, emi: EdgeMap) -> None:
    if ems.mask.shape != emi.mask.shape:
        raise ValueError(
            f"edge map dimension mismatch: {ems.width}x{ems.height} vs {emi.width}x{emi.height}"
        )


def _dilate(m: np.ndarray, tolerance: int) -> np.ndarray:
    if tolerance <= 0:
        return m
    return ndimage.binary_dilation(m, structure=np.ones((3, 3), dtype=bool), iterations=tolerance)


def _matched(ems, emi, tolerance) -> int:
    if tolerance <= 0:
        return int(np.count_nonzero(ems.mask & emi.mask))
    fwd = np.count_nonzero(ems.mask & _dilate(emi.mask, tolerance))
    back = np.count_nonzero(emi.mask & _dilate(ems.mask, tolerance))
    return int(min(fwd, back))


def epr_accuracy(ems: EdgeMap, emi: EdgeMap, tolerance: int = 0) -> float:
    """Share of reference edge pixels that also appear in the test map.

    ``tolerance`` > 0 lets a test edge within that many pixels count as a hit.
    """
    _check(ems, emi)
    n = ems.count
    if n == 0:
        raise EmptyReferenceError("reference has no edges")
    if tolerance <= 0:
        return _matched(ems, emi, 0) / n
    return int(np.count_nonzero(ems.mask & _dilate(emi.mask, tolerance))) / n


def epr_robustness(ems: EdgeMap, emi: EdgeMap, tolerance: int = 0) -> float:
    """Intersection over union of the two edge sets; 1.0 when both are empty."""
    _check(ems, emi)
    inter = _matched(ems, emi, tolerance)
    union = ems.count + emi.count - inter
    if union == 0:
        return 1.0
    return inter / union
