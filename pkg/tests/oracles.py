"""Closed-form reference kernels, written independently of the package."""
import numpy as np


def keys(t, a=-0.5):
    t = abs(t)
    if t <= 1:
        return (a + 2) * t ** 3 - (a + 3) * t ** 2 + 1
    if t < 2:
        return a * t ** 3 - 5 * a * t ** 2 + 8 * a * t - 4 * a
    return 0.0


def bilinear_oracle(lr):
    h, w = lr.shape
    out = np.empty((2 * h, 2 * w))
    for R in range(2 * h):
        for C in range(2 * w):
            y, x = min(R / 2, h - 1), min(C / 2, w - 1)
            i0, j0 = int(np.floor(y)), int(np.floor(x))
            i1, j1 = min(i0 + 1, h - 1), min(j0 + 1, w - 1)
            fy, fx = y - i0, x - j0
            out[R, C] = ((1 - fy) * ((1 - fx) * lr[i0, j0] + fx * lr[i0, j1])
                         + fy * ((1 - fx) * lr[i1, j0] + fx * lr[i1, j1]))
    return out


def bicubic_oracle(lr):
    """Tensor-product Keys kernel at the (2h-1) x (2w-1) natural sites, clamped taps."""
    h, w = lr.shape
    out = np.empty((2 * h - 1, 2 * w - 1))
    for R in range(2 * h - 1):
        for C in range(2 * w - 1):
            y, x = R / 2, C / 2
            i0, j0 = int(np.floor(y)), int(np.floor(x))
            acc = 0.0
            for di in range(-1, 3):
                for dj in range(-1, 3):
                    ii = min(max(i0 + di, 0), h - 1)
                    jj = min(max(j0 + dj, 0), w - 1)
                    acc += keys(y - (i0 + di)) * keys(x - (j0 + dj)) * lr[ii, jj]
            out[R, C] = acc
    return out
