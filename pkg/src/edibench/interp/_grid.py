"""HR lattice bookkeeping shared by both kernel backends.

A 2x pass works on a grid ``G`` of shape ``(2h-1, 2w-1)`` built from an
LR plane of shape ``(h, w)``:

* lattice sites ``(2i, 2j)`` hold the LR samples,
* diagonal sites ``(odd, odd)`` are filled first from their four
  diagonal neighbours,
* cardinal sites (``r + c`` odd) are filled next from their four
  horizontal/vertical neighbours.

Every edge-directed rule is written once in the *diagonal frame*.  The
cardinal step is the same rule applied through the 45 degree map
``(a, b) -> ((a + b) / 2, (a - b) / 2)``, which sends the two diagonals
onto the horizontal and vertical axes.  Out-of-grid reads mirror about the
border row/column, which keeps the parity (site class) of every offset.
"""
from __future__ import annotations

import numpy as np

DIAG = 0
CARD = 1

# diagonal-frame directions: "45" joins upper-right/lower-left neighbours,
# "135" joins upper-left/lower-right neighbours (rows grow downwards)
E45 = (-1, 1)
E135 = (1, 1)
# neighbour order used by every weighted rule: 45 pair, then 135 pair
NEIGHBOURS = ((-1, 1), (1, -1), (-1, -1), (1, 1))


def rotate(offset, frame):
    a, b = offset
    if frame == DIAG:
        return (a, b)
    return ((a + b) // 2, (a - b) // 2)


def offsets_for(frame, offsets):
    return np.array([rotate(o, frame) for o in offsets], dtype=np.intp).reshape(-1, 2)


def new_grid(lr: np.ndarray) -> np.ndarray:
    h, w = lr.shape
    g = np.full((2 * h - 1, 2 * w - 1), np.nan)
    g[::2, ::2] = lr
    return g


def pad_lr(lr: np.ndarray, pad: int) -> np.ndarray:
    return np.pad(lr, pad, mode="edge") if pad else lr


def finish(g: np.ndarray, pad: int, h: int, w: int) -> np.ndarray:
    """Crop the padded grid to the natural region and replicate to ``2h x 2w``."""
    nat = g[2 * pad:2 * pad + 2 * h - 1, 2 * pad:2 * pad + 2 * w - 1]
    return np.pad(nat, ((0, 1), (0, 1)), mode="edge")


def site_blocks(shape, frame):
    """Strided blocks ``(r0, c0, nr, nc)`` covering the sites filled in ``frame``."""
    n, m = shape
    if frame == DIAG:
        return [(1, 1, (n - 1) // 2, (m - 1) // 2)]
    return [(0, 1, (n + 1) // 2, (m - 1) // 2), (1, 0, (n - 1) // 2, (m + 1) // 2)]


def training_offsets(window: int):
    """Odd diagonal-frame offsets of a ``window x window`` LR training block."""
    span = range(-(window - 1), window, 2)
    return [(a, b) for a in span for b in span]


def stats_offsets(window: int):
    """Odd offsets inside an HR ``window x window`` box centred on the site."""
    half = window // 2
    top = half if half % 2 else half - 1
    span = range(-top, top + 1, 2)
    return [(a, b) for a in span for b in span]


def pair_list(offsets, direction):
    """Index pairs ``(x, x + 2e)`` with both ends inside ``offsets``."""
    pos = {o: k for k, o in enumerate(offsets)}
    da, db = 2 * direction[0], 2 * direction[1]
    return [(k, pos[(a + da, b + db)]) for k, (a, b) in enumerate(offsets) if (a + da, b + db) in pos]


BLOCK16 = stats_offsets(7)  # {-3,-1,1,3}^2, the DCCI gradient block
