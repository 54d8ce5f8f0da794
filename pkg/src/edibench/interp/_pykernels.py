"""Pure numpy kernels for the four edge-directed steps.

This is the fallback backend.  ``_ckernels.pyx`` implements the same
arithmetic site by site; the expressions here are written in the same
operation order so both backends agree bit for bit (the compiled module is
built with ``-ffp-contract=off``).
"""
from __future__ import annotations

import numpy as np

from ._grid import (
    BLOCK16,
    DIAG,
    E45,
    E135,
    NEIGHBOURS,
    offsets_for,
    pair_list,
    rotate,
    site_blocks,
    stats_offsets,
    training_offsets,
)

INV255 = 1.0 / 255.0
CURV_DOF = 40.0  # sum of squared d(term)/dv over the 8 curvature terms


class _Block:
    """Strided view helper for one block of same-class sites."""

    def __init__(self, padded, margin, r0, c0, nr, nc):
        self.p = padded
        self.k = margin
        self.r0, self.c0, self.nr, self.nc = r0, c0, nr, nc

    def at(self, dr, dc, arr=None):
        a = self.p if arr is None else arr
        r = self.k + self.r0 + dr
        c = self.k + self.c0 + dc
        return a[r:r + 2 * self.nr - 1:2, c:c + 2 * self.nc - 1:2]


def _blocks(g, frame, margin):
    padded = np.pad(g, margin, mode="reflect")
    return [_Block(padded, margin, *b) for b in site_blocks(g.shape, frame)]


def _store(g, blk, values):
    g[blk.r0:blk.r0 + 2 * blk.nr - 1:2, blk.c0:blk.c0 + 2 * blk.nc - 1:2] = values


def _cubic(gm3, gm1, gp1, gp3):
    return (9.0 * (gm1 + gp1) - (gm3 + gp3)) * 0.0625


def _directional(blk, rot):
    """Cubic estimates along the two frame directions."""
    e1, e2 = rot(E45), rot(E135)
    x1 = _cubic(blk.at(-3 * e1[0], -3 * e1[1]), blk.at(-e1[0], -e1[1]), blk.at(*e1), blk.at(3 * e1[0], 3 * e1[1]))
    x2 = _cubic(blk.at(-3 * e2[0], -3 * e2[1]), blk.at(-e2[0], -e2[1]), blk.at(*e2), blk.at(3 * e2[0], 3 * e2[1]))
    return x1, x2


def _rotator(frame):
    return lambda o: rotate(o, frame)


def _neighbours(blk, frame):
    nb = offsets_for(frame, NEIGHBOURS)
    return [blk.at(*d) for d in nb]


def mean4(n0, n1, n2, n3):
    return (n0 + n1 + n2 + n3) * 0.25


# ----------------------------------------------------------------------- NEDI

def chol_solve4(r00, r01, r02, r03, r11, r12, r13, r22, r23, r33, b0, b1, b2, b3):
    """Cholesky solve of a symmetric 4x4 system plus its 1-norm condition number.

    Works elementwise on numpy arrays or on plain floats.  Returns
    ``(x0, x1, x2, x3, ok, cond)``; ``ok`` is False where a pivot is not
    strictly positive (values there are meaningless).
    """
    sqrt = np.sqrt
    t0 = r00
    l00 = sqrt(t0)
    l10 = r01 / l00
    l20 = r02 / l00
    l30 = r03 / l00
    t1 = r11 - l10 * l10
    l11 = sqrt(t1)
    l21 = (r12 - l20 * l10) / l11
    l31 = (r13 - l30 * l10) / l11
    t2 = r22 - l20 * l20 - l21 * l21
    l22 = sqrt(t2)
    l32 = (r23 - l30 * l20 - l31 * l21) / l22
    t3 = r33 - l30 * l30 - l31 * l31 - l32 * l32
    l33 = sqrt(t3)
    ok = (t0 > 0) & (t1 > 0) & (t2 > 0) & (t3 > 0)

    def solve(c0, c1, c2, c3):
        y0 = c0 / l00
        y1 = (c1 - l10 * y0) / l11
        y2 = (c2 - l20 * y0 - l21 * y1) / l22
        y3 = (c3 - l30 * y0 - l31 * y1 - l32 * y2) / l33
        x3 = y3 / l33
        x2 = (y2 - l32 * x3) / l22
        x1 = (y1 - l21 * x2 - l31 * x3) / l11
        x0 = (y0 - l10 * x1 - l20 * x2 - l30 * x3) / l00
        return x0, x1, x2, x3

    x = solve(b0, b1, b2, b3)
    inv_norm = None
    for j in range(4):
        col = solve(*(1.0 if i == j else 0.0 for i in range(4)))
        s = abs(col[0]) + abs(col[1]) + abs(col[2]) + abs(col[3])
        inv_norm = s if inv_norm is None else np.maximum(inv_norm, s)
    a = abs
    n0 = a(r00) + a(r01) + a(r02) + a(r03)
    n1 = a(r01) + a(r11) + a(r12) + a(r13)
    n2 = a(r02) + a(r12) + a(r22) + a(r23)
    n3 = a(r03) + a(r13) + a(r23) + a(r33)
    mat_norm = np.maximum(np.maximum(n0, n1), np.maximum(n2, n3))
    return x[0], x[1], x[2], x[3], ok, mat_norm * inv_norm


def nedi_step(g, frame, window, var_threshold, cond_limit):
    train = offsets_for(frame, training_offsets(window))
    nb = offsets_for(frame, NEIGHBOURS)
    margin = window + 2
    count = float(window * window)
    for blk in _blocks(g, frame, margin):
        gn = blk.p * INV255
        shape = (blk.nr, blk.nc)
        sy = np.zeros(shape)
        syy = np.zeros(shape)
        r = [np.zeros(shape) for _ in range(10)]
        b = [np.zeros(shape) for _ in range(4)]
        for t in train:
            y = blk.at(t[0], t[1], gn)
            c0, c1, c2, c3 = (blk.at(t[0] + 2 * d[0], t[1] + 2 * d[1], gn) for d in nb)
            sy += y
            syy += y * y
            r[0] += c0 * c0
            r[1] += c0 * c1
            r[2] += c0 * c2
            r[3] += c0 * c3
            r[4] += c1 * c1
            r[5] += c1 * c2
            r[6] += c1 * c3
            r[7] += c2 * c2
            r[8] += c2 * c3
            r[9] += c3 * c3
            b[0] += c0 * y
            b[1] += c1 * y
            b[2] += c2 * y
            b[3] += c3 * y
        mean = sy / count
        var = (syy / count - mean * mean) * 65025.0
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            a0, a1, a2, a3, ok, cond = chol_solve4(*r, *b)
        n0, n1, n2, n3 = (blk.at(*d) for d in nb)
        use = (var >= var_threshold) & ok & (cond <= cond_limit)
        with np.errstate(invalid="ignore", over="ignore"):
            weighted = a0 * n0 + a1 * n1 + a2 * n2 + a3 * n3
        _store(g, blk, np.where(use, weighted, mean4(n0, n1, n2, n3)))


# ----------------------------------------------------------------------- EGII

def egii_step(g, frame, stats_window):
    rot = _rotator(frame)
    box = stats_offsets(stats_window)
    pairs1 = pair_list(box, E45)
    pairs2 = pair_list(box, E135)
    off = offsets_for(frame, box)
    margin = max(abs(int(v)) for v in off.ravel()) + 3
    for blk in _blocks(g, frame, margin):
        x1, x2 = _directional(blk, rot)
        vals = [blk.at(*o) for o in off]
        v1 = _mean_sq(vals, pairs1)
        v2 = _mean_sq(vals, pairs2)
        _store(g, blk, egii_fuse(x1, x2, v1, v2))


def egii_fuse(x1, x2, v1, v2):
    """LMMSE fusion of estimates ``x1``, ``x2`` with error variances ``v1``, ``v2``."""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        fused = x1 + (v1 / (v1 + v2)) * (x2 - x1)
    flat = (v1 < 1e-9) & (v2 < 1e-9)
    return np.where(flat, (x1 + x2) * 0.5, fused)


def _mean_sq(vals, pairs):
    s = 0.0
    for i, j in pairs:
        d = vals[i] - vals[j]
        s = s + d * d
    return s / float(len(pairs))


# ----------------------------------------------------------------------- DCCI

def _ipow(x, k):
    p = np.ones_like(x)
    for _ in range(k):
        p = p * x
    return p


def dcci_step(g, frame, threshold, exponent):
    rot = _rotator(frame)
    pairs1 = pair_list(BLOCK16, E45)
    pairs2 = pair_list(BLOCK16, E135)
    off = offsets_for(frame, BLOCK16)
    for blk in _blocks(g, frame, 5):
        x1, x2 = _directional(blk, rot)
        vals = [blk.at(*o) for o in off]
        g1 = _abs_sum(vals, pairs1)
        g2 = _abs_sum(vals, pairs2)
        _store(g, blk, dcci_choose(x1, x2, g1, g2, threshold, exponent))


def dcci_choose(x1, x2, g1, g2, threshold, exponent):
    """Pick the estimate across the weaker gradient, or blend when neither dominates."""
    g1 = np.asarray(g1, dtype=np.float64)
    g2 = np.asarray(g2, dtype=np.float64)
    w1 = 1.0 / (1.0 + _ipow(g1, exponent))
    w2 = 1.0 / (1.0 + _ipow(g2, exponent))
    blend = (w1 * x1 + w2 * x2) / (w1 + w2)
    return np.where((1.0 + g1) / (1.0 + g2) > threshold, x2,
                    np.where((1.0 + g2) / (1.0 + g1) > threshold, x1, blend))


def _abs_sum(vals, pairs):
    s = 0.0
    for i, j in pairs:
        s = s + np.abs(vals[i] - vals[j])
    return s


# ----------------------------------------------------------------------- ICBI

def _line_energy(gm3, gm2, gm1, v, gp1, gp2, gp3):
    dm2 = gm1 + gm3 - 2.0 * gm2
    dm1 = v + gm2 - 2.0 * gm1
    d0 = gp1 + gm1 - 2.0 * v
    dp1 = gp2 + v - 2.0 * gp1
    dp2 = gp3 + gp1 - 2.0 * gp2
    t1 = dm2 - dm1
    t2 = dm1 - d0
    t3 = d0 - dp1
    t4 = dp1 - dp2
    return t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4, -t1 + 3.0 * t2 - 3.0 * t3 + t4


def _icbi_fill(blk, rot):
    e1, e2 = rot(E45), rot(E135)
    a_m1, a_p1 = blk.at(-e1[0], -e1[1]), blk.at(*e1)
    b_m1, b_p1 = blk.at(-e2[0], -e2[1]), blk.at(*e2)
    d1 = np.abs(blk.at(-3 * e1[0], -3 * e1[1]) + blk.at(3 * e1[0], 3 * e1[1]) - a_m1 - a_p1)
    d2 = np.abs(blk.at(-3 * e2[0], -3 * e2[1]) + blk.at(3 * e2[0], 3 * e2[1]) - b_m1 - b_p1)
    return np.where(d1 < d2, (a_m1 + a_p1) * 0.5,
                    np.where(d2 < d1, (b_m1 + b_p1) * 0.5, mean4(a_p1, a_m1, b_m1, b_p1)))


def _site_masks(shape, frame, r0, c0, nr, nc):
    """Refinable sites (full 7-tap stencil in the grid) and their sweep colour."""
    n, m = shape
    rows = r0 + 2 * np.arange(nr)[:, None]
    cols = c0 + 2 * np.arange(nc)[None, :]
    inside = (rows >= 3) & (rows <= n - 4) & (cols >= 3) & (cols <= m - 4)
    if frame == DIAG:
        color = np.broadcast_to(((rows - 1) // 2) % 2, inside.shape)
    else:
        color = ((rows - cols - 1) // 2) % 2
    return inside, color


def icbi_total_energy(g, frame, w_curv, w_fid, sites=()):
    """Global refinement energy: curvature continuity plus fidelity.

    ``sites`` holds ``(r0, c0, nr, nc, inside, phase1)`` tuples for the
    refined blocks.
    """
    n, m = g.shape
    total = 0.0
    for dr, dc in (rotate(E45, frame), rotate(E135, frame)):
        # D at x and at x + e needs x - e .. x + 2e inside the grid
        lo_r, hi_r = max(0, dr, -2 * dr), n - max(0, -dr, 2 * dr)
        lo_c, hi_c = max(0, dc, -2 * dc), m - max(0, -dc, 2 * dc)

        def sh(k):
            return g[lo_r + k * dr:hi_r + k * dr, lo_c + k * dc:hi_c + k * dc]

        t = (sh(1) + sh(-1) - 2.0 * sh(0)) - (sh(2) + sh(0) - 2.0 * sh(1))
        if frame == DIAG:
            # only lines through known pixels exist before the cardinal step
            parity = (np.arange(lo_r, hi_r)[:, None] + np.arange(lo_c, hi_c)[None, :]) % 2
            t = np.where(parity == 0, t, 0.0)
        total += w_curv * float(np.sum(t * t))
    for r0, c0, nr, nc, inside, p in sites:
        dv = (g[r0:r0 + 2 * nr - 1:2, c0:c0 + 2 * nc - 1:2] - p)[inside]
        total += w_fid * float(np.sum(dv * dv))
    return total


def icbi_step(g, frame, max_iters, stop_delta, w_curv, w_fid):
    """Fill then greedily refine; returns the energy after each sweep (index 0 = start)."""
    rot = _rotator(frame)
    for blk in _blocks(g, frame, 4):
        _store(g, blk, _icbi_fill(blk, rot))
    sites = []
    colors = []
    for r0, c0, nr, nc in site_blocks(g.shape, frame):
        inside, color = _site_masks(g.shape, frame, r0, c0, nr, nc)
        p = g[r0:r0 + 2 * nr - 1:2, c0:c0 + 2 * nc - 1:2].copy()
        sites.append((r0, c0, nr, nc, inside, p))
        colors.append(color)

    trace = [icbi_total_energy(g, frame, w_curv, w_fid, sites)]
    e1, e2 = rot(E45), rot(E135)
    denom = CURV_DOF * w_curv + w_fid
    for _ in range(max_iters):
        max_change = 0.0
        for col in (0, 1):
            for blk, site, color in zip(_blocks(g, frame, 4), sites, colors):
                inside, p = site[4], site[5]
                v0 = blk.at(0, 0)
                ga = [blk.at(k * e1[0], k * e1[1]) for k in (-3, -2, -1, 1, 2, 3)]
                gb = [blk.at(k * e2[0], k * e2[1]) for k in (-3, -2, -1, 1, 2, 3)]
                ea, sa = _line_energy(ga[0], ga[1], ga[2], v0, ga[3], ga[4], ga[5])
                eb, sb = _line_energy(gb[0], gb[1], gb[2], v0, gb[3], gb[4], gb[5])
                l0 = w_curv * (ea + eb) + w_fid * ((v0 - p) * (v0 - p))
                vs = v0 - (w_curv * (sa + sb) + w_fid * (v0 - p)) / denom
                ea1, _ = _line_energy(ga[0], ga[1], ga[2], vs, ga[3], ga[4], ga[5])
                eb1, _ = _line_energy(gb[0], gb[1], gb[2], vs, gb[3], gb[4], gb[5])
                l1 = w_curv * (ea1 + eb1) + w_fid * ((vs - p) * (vs - p))
                accept = inside & (color == col) & (l1 < l0)
                if np.any(accept):
                    max_change = max(max_change, float(np.max(np.abs(vs - v0)[accept])))
                _store(g, blk, np.where(accept, vs, v0))
        trace.append(icbi_total_energy(g, frame, w_curv, w_fid, sites))
        if max_change < stop_delta:
            break
    return trace
