# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled site loops for the edge-directed steps.

Mirrors ``_pykernels`` expression for expression; see that module for the
maths.  Sites of one class never read each other, so in-place updates give
the same result as the vectorised snapshot evaluation there.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

from ._grid import (
    BLOCK16, DIAG, E45, E135, NEIGHBOURS,
    offsets_for, pair_list, rotate, site_blocks, stats_offsets, training_offsets,
)

cnp.import_array()

cdef double INV255 = 1.0 / 255.0
cdef double CURV_DOF = 40.0
cdef int C_DIAG = DIAG


cdef inline Py_ssize_t refl(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    while i < 0 or i > n - 1:
        if i < 0:
            i = -i
        else:
            i = 2 * (n - 1) - i
    return i


cdef inline double at(double[:, ::1] g, Py_ssize_t r, Py_ssize_t c) noexcept nogil:
    return g[refl(r, g.shape[0]), refl(c, g.shape[1])]


cdef inline double cubic(double gm3, double gm1, double gp1, double gp3) noexcept nogil:
    return (9.0 * (gm1 + gp1) - (gm3 + gp3)) * 0.0625


cdef inline double mean4(double n0, double n1, double n2, double n3) noexcept nogil:
    return (n0 + n1 + n2 + n3) * 0.25


cdef Py_ssize_t[:, ::1] _offs(frame, offsets):
    return np.ascontiguousarray(offsets_for(frame, offsets), dtype=np.intp)


cdef Py_ssize_t[:, ::1] _pairs(offsets, direction):
    p = pair_list(offsets, direction)
    return np.ascontiguousarray(np.array(p, dtype=np.intp).reshape(-1, 2))


# ----------------------------------------------------------------------- NEDI

cdef inline void chol4(double* r, double* b, double* x, int* ok, double* cond) noexcept nogil:
    cdef double t0, t1, t2, t3, l00, l10, l20, l30, l11, l21, l31, l22, l32, l33
    cdef double y0, y1, y2, y3, x0, x1, x2, x3, s, inv_norm, n0, n1, n2, n3, mat_norm
    cdef double c[4]
    cdef int j, i
    t0 = r[0]
    if not t0 > 0:
        ok[0] = 0
        return
    l00 = sqrt(t0)
    l10 = r[1] / l00
    l20 = r[2] / l00
    l30 = r[3] / l00
    t1 = r[4] - l10 * l10
    if not t1 > 0:
        ok[0] = 0
        return
    l11 = sqrt(t1)
    l21 = (r[5] - l20 * l10) / l11
    l31 = (r[6] - l30 * l10) / l11
    t2 = r[7] - l20 * l20 - l21 * l21
    if not t2 > 0:
        ok[0] = 0
        return
    l22 = sqrt(t2)
    l32 = (r[8] - l30 * l20 - l31 * l21) / l22
    t3 = r[9] - l30 * l30 - l31 * l31 - l32 * l32
    if not t3 > 0:
        ok[0] = 0
        return
    l33 = sqrt(t3)
    ok[0] = 1
    inv_norm = 0.0
    for j in range(5):
        if j == 0:
            c[0] = b[0]; c[1] = b[1]; c[2] = b[2]; c[3] = b[3]
        else:
            for i in range(4):
                c[i] = 1.0 if i == j - 1 else 0.0
        y0 = c[0] / l00
        y1 = (c[1] - l10 * y0) / l11
        y2 = (c[2] - l20 * y0 - l21 * y1) / l22
        y3 = (c[3] - l30 * y0 - l31 * y1 - l32 * y2) / l33
        x3 = y3 / l33
        x2 = (y2 - l32 * x3) / l22
        x1 = (y1 - l21 * x2 - l31 * x3) / l11
        x0 = (y0 - l10 * x1 - l20 * x2 - l30 * x3) / l00
        if j == 0:
            x[0] = x0; x[1] = x1; x[2] = x2; x[3] = x3
        else:
            s = fabs(x0) + fabs(x1) + fabs(x2) + fabs(x3)
            if j == 1 or s > inv_norm:
                inv_norm = s
    n0 = fabs(r[0]) + fabs(r[1]) + fabs(r[2]) + fabs(r[3])
    n1 = fabs(r[1]) + fabs(r[4]) + fabs(r[5]) + fabs(r[6])
    n2 = fabs(r[2]) + fabs(r[5]) + fabs(r[7]) + fabs(r[8])
    n3 = fabs(r[3]) + fabs(r[6]) + fabs(r[8]) + fabs(r[9])
    mat_norm = n0
    if n1 > mat_norm:
        mat_norm = n1
    if n2 > mat_norm:
        mat_norm = n2
    if n3 > mat_norm:
        mat_norm = n3
    cond[0] = mat_norm * inv_norm


def nedi_step(double[:, ::1] g, int frame, int window, double var_threshold, double cond_limit):
    cdef Py_ssize_t[:, ::1] train = _offs(frame, training_offsets(window))
    cdef Py_ssize_t[:, ::1] nb = _offs(frame, NEIGHBOURS)
    cdef Py_ssize_t ntrain = train.shape[0]
    cdef double count = <double>(window * window)
    cdef Py_ssize_t r0, c0, nr, nc, i, j, r, c, t, tr, tc
    cdef double y, c0v, c1v, c2v, c3v, sy, syy, mean, var, n0, n1, n2, n3, cond
    cdef double rr[10]
    cdef double bb[4]
    cdef double aa[4]
    cdef int ok, k
    for r0, c0, nr, nc in site_blocks((g.shape[0], g.shape[1]), frame):
        with nogil:
            for i in range(nr):
                r = r0 + 2 * i
                for j in range(nc):
                    c = c0 + 2 * j
                    sy = 0.0
                    syy = 0.0
                    for k in range(10):
                        rr[k] = 0.0
                    for k in range(4):
                        bb[k] = 0.0
                    for t in range(ntrain):
                        tr = r + train[t, 0]
                        tc = c + train[t, 1]
                        y = at(g, tr, tc) * INV255
                        c0v = at(g, tr + 2 * nb[0, 0], tc + 2 * nb[0, 1]) * INV255
                        c1v = at(g, tr + 2 * nb[1, 0], tc + 2 * nb[1, 1]) * INV255
                        c2v = at(g, tr + 2 * nb[2, 0], tc + 2 * nb[2, 1]) * INV255
                        c3v = at(g, tr + 2 * nb[3, 0], tc + 2 * nb[3, 1]) * INV255
                        sy += y
                        syy += y * y
                        rr[0] += c0v * c0v
                        rr[1] += c0v * c1v
                        rr[2] += c0v * c2v
                        rr[3] += c0v * c3v
                        rr[4] += c1v * c1v
                        rr[5] += c1v * c2v
                        rr[6] += c1v * c3v
                        rr[7] += c2v * c2v
                        rr[8] += c2v * c3v
                        rr[9] += c3v * c3v
                        bb[0] += c0v * y
                        bb[1] += c1v * y
                        bb[2] += c2v * y
                        bb[3] += c3v * y
                    mean = sy / count
                    var = (syy / count - mean * mean) * 65025.0
                    n0 = at(g, r + nb[0, 0], c + nb[0, 1])
                    n1 = at(g, r + nb[1, 0], c + nb[1, 1])
                    n2 = at(g, r + nb[2, 0], c + nb[2, 1])
                    n3 = at(g, r + nb[3, 0], c + nb[3, 1])
                    ok = 0
                    if var >= var_threshold:
                        chol4(rr, bb, aa, &ok, &cond)
                    if ok and cond <= cond_limit:
                        g[r, c] = aa[0] * n0 + aa[1] * n1 + aa[2] * n2 + aa[3] * n3
                    else:
                        g[r, c] = mean4(n0, n1, n2, n3)


# ------------------------------------------------------------- direction helpers

cdef inline void directional(double[:, ::1] g, Py_ssize_t r, Py_ssize_t c,
                             Py_ssize_t a0, Py_ssize_t a1, Py_ssize_t b0, Py_ssize_t b1,
                             double* x1, double* x2) noexcept nogil:
    x1[0] = cubic(at(g, r - 3 * a0, c - 3 * a1), at(g, r - a0, c - a1),
                  at(g, r + a0, c + a1), at(g, r + 3 * a0, c + 3 * a1))
    x2[0] = cubic(at(g, r - 3 * b0, c - 3 * b1), at(g, r - b0, c - b1),
                  at(g, r + b0, c + b1), at(g, r + 3 * b0, c + 3 * b1))


# ----------------------------------------------------------------------- EGII

def egii_step(double[:, ::1] g, int frame, int stats_window):
    box = stats_offsets(stats_window)
    cdef Py_ssize_t[:, ::1] off = _offs(frame, box)
    cdef Py_ssize_t[:, ::1] p1 = _pairs(box, E45)
    cdef Py_ssize_t[:, ::1] p2 = _pairs(box, E135)
    cdef Py_ssize_t a0, a1, b0, b1
    a0, a1 = rotate(E45, frame)
    b0, b1 = rotate(E135, frame)
    cdef Py_ssize_t noff = off.shape[0]
    cdef Py_ssize_t np1 = p1.shape[0]
    cdef Py_ssize_t np2 = p2.shape[0]
    cdef double[::1] vals = np.empty(noff)
    cdef Py_ssize_t r0, c0, nr, nc, i, j, r, c, k
    cdef double x1, x2, v1, v2, d
    for r0, c0, nr, nc in site_blocks((g.shape[0], g.shape[1]), frame):
        with nogil:
            for i in range(nr):
                r = r0 + 2 * i
                for j in range(nc):
                    c = c0 + 2 * j
                    directional(g, r, c, a0, a1, b0, b1, &x1, &x2)
                    for k in range(noff):
                        vals[k] = at(g, r + off[k, 0], c + off[k, 1])
                    v1 = 0.0
                    for k in range(np1):
                        d = vals[p1[k, 0]] - vals[p1[k, 1]]
                        v1 = v1 + d * d
                    v1 = v1 / <double>np1
                    v2 = 0.0
                    for k in range(np2):
                        d = vals[p2[k, 0]] - vals[p2[k, 1]]
                        v2 = v2 + d * d
                    v2 = v2 / <double>np2
                    if v1 < 1e-9 and v2 < 1e-9:
                        g[r, c] = (x1 + x2) * 0.5
                    else:
                        g[r, c] = x1 + (v1 / (v1 + v2)) * (x2 - x1)


# ----------------------------------------------------------------------- DCCI

cdef inline double ipow(double x, int k) noexcept nogil:
    cdef double p = 1.0
    cdef int i
    for i in range(k):
        p = p * x
    return p


def dcci_step(double[:, ::1] g, int frame, double threshold, int exponent):
    cdef Py_ssize_t[:, ::1] off = _offs(frame, BLOCK16)
    cdef Py_ssize_t[:, ::1] p1 = _pairs(BLOCK16, E45)
    cdef Py_ssize_t[:, ::1] p2 = _pairs(BLOCK16, E135)
    cdef Py_ssize_t a0, a1, b0, b1
    a0, a1 = rotate(E45, frame)
    b0, b1 = rotate(E135, frame)
    cdef double vals[16]
    cdef Py_ssize_t r0, c0, nr, nc, i, j, r, c, k
    cdef double x1, x2, s1, s2, w1, w2
    for r0, c0, nr, nc in site_blocks((g.shape[0], g.shape[1]), frame):
        with nogil:
            for i in range(nr):
                r = r0 + 2 * i
                for j in range(nc):
                    c = c0 + 2 * j
                    directional(g, r, c, a0, a1, b0, b1, &x1, &x2)
                    for k in range(16):
                        vals[k] = at(g, r + off[k, 0], c + off[k, 1])
                    s1 = 0.0
                    for k in range(p1.shape[0]):
                        s1 = s1 + fabs(vals[p1[k, 0]] - vals[p1[k, 1]])
                    s2 = 0.0
                    for k in range(p2.shape[0]):
                        s2 = s2 + fabs(vals[p2[k, 0]] - vals[p2[k, 1]])
                    if (1.0 + s1) / (1.0 + s2) > threshold:
                        g[r, c] = x2
                    elif (1.0 + s2) / (1.0 + s1) > threshold:
                        g[r, c] = x1
                    else:
                        w1 = 1.0 / (1.0 + ipow(s1, exponent))
                        w2 = 1.0 / (1.0 + ipow(s2, exponent))
                        g[r, c] = (w1 * x1 + w2 * x2) / (w1 + w2)


# ----------------------------------------------------------------------- ICBI

cdef inline double line_energy(double gm3, double gm2, double gm1, double v,
                               double gp1, double gp2, double gp3, double* slope) noexcept nogil:
    cdef double dm2 = gm1 + gm3 - 2.0 * gm2
    cdef double dm1 = v + gm2 - 2.0 * gm1
    cdef double d0 = gp1 + gm1 - 2.0 * v
    cdef double dp1 = gp2 + v - 2.0 * gp1
    cdef double dp2 = gp3 + gp1 - 2.0 * gp2
    cdef double t1 = dm2 - dm1
    cdef double t2 = dm1 - d0
    cdef double t3 = d0 - dp1
    cdef double t4 = dp1 - dp2
    slope[0] = -t1 + 3.0 * t2 - 3.0 * t3 + t4
    return t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4


cdef double total_energy(double[:, ::1] g, int frame, Py_ssize_t a0, Py_ssize_t a1,
                         Py_ssize_t b0, Py_ssize_t b1, double w_curv, double w_fid,
                         double[:, ::1] phase1, list blocks):
    cdef Py_ssize_t n = g.shape[0], m = g.shape[1]
    cdef Py_ssize_t r, c, dr, dc, e, r0, c0, nr, nc, i, j
    cdef double t, dv, curv = 0.0, fid = 0.0
    for e in range(2):
        dr = a0 if e == 0 else b0
        dc = a1 if e == 0 else b1
        for r in range(n):
            if r - dr < 0 or r - dr >= n or r + 2 * dr < 0 or r + 2 * dr >= n:
                continue
            for c in range(m):
                if c - dc < 0 or c - dc >= m or c + 2 * dc < 0 or c + 2 * dc >= m:
                    continue
                if frame == C_DIAG and (r + c) % 2:
                    continue
                t = (g[r + dr, c + dc] + g[r - dr, c - dc] - 2.0 * g[r, c]) - \
                    (g[r + 2 * dr, c + 2 * dc] + g[r, c] - 2.0 * g[r + dr, c + dc])
                curv += t * t
    for r0, c0, nr, nc in blocks:
        for i in range(nr):
            r = r0 + 2 * i
            if r < 3 or r > n - 4:
                continue
            for j in range(nc):
                c = c0 + 2 * j
                if c < 3 or c > m - 4:
                    continue
                dv = g[r, c] - phase1[r, c]
                fid += dv * dv
    return w_curv * curv + w_fid * fid


def icbi_step(double[:, ::1] g, int frame, int max_iters, double stop_delta,
              double w_curv, double w_fid):
    cdef Py_ssize_t a0, a1, b0, b1
    a0, a1 = rotate(E45, frame)
    b0, b1 = rotate(E135, frame)
    cdef Py_ssize_t n = g.shape[0], m = g.shape[1]
    cdef Py_ssize_t r0, c0, nr, nc, i, j, r, c, sweep
    cdef int col, color
    cdef double am1, ap1, bm1, bp1, d1, d2, v0, p, vs, l0, l1
    cdef double ea, eb, sa, sb, ea1, eb1, dummy, max_change
    cdef double denom = CURV_DOF * w_curv + w_fid
    blocks = site_blocks((n, m), frame)
    for r0, c0, nr, nc in blocks:
        with nogil:
            for i in range(nr):
                r = r0 + 2 * i
                for j in range(nc):
                    c = c0 + 2 * j
                    am1 = at(g, r - a0, c - a1)
                    ap1 = at(g, r + a0, c + a1)
                    bm1 = at(g, r - b0, c - b1)
                    bp1 = at(g, r + b0, c + b1)
                    d1 = fabs(at(g, r - 3 * a0, c - 3 * a1) + at(g, r + 3 * a0, c + 3 * a1) - am1 - ap1)
                    d2 = fabs(at(g, r - 3 * b0, c - 3 * b1) + at(g, r + 3 * b0, c + 3 * b1) - bm1 - bp1)
                    if d1 < d2:
                        g[r, c] = (am1 + ap1) * 0.5
                    elif d2 < d1:
                        g[r, c] = (bm1 + bp1) * 0.5
                    else:
                        g[r, c] = mean4(ap1, am1, bm1, bp1)
    cdef double[:, ::1] phase1 = np.array(g, copy=True)
    trace = [total_energy(g, frame, a0, a1, b0, b1, w_curv, w_fid, phase1, blocks)]
    for sweep in range(max_iters):
        max_change = 0.0
        for col in range(2):
            for r0, c0, nr, nc in blocks:
                with nogil:
                    for i in range(nr):
                        r = r0 + 2 * i
                        if r < 3 or r > n - 4:
                            continue
                        for j in range(nc):
                            c = c0 + 2 * j
                            if c < 3 or c > m - 4:
                                continue
                            if frame == C_DIAG:
                                color = ((r - 1) // 2) % 2
                            else:
                                color = ((r - c - 1 + 4 * m) // 2) % 2
                            if color != col:
                                continue
                            v0 = g[r, c]
                            p = phase1[r, c]
                            ea = line_energy(g[r - 3 * a0, c - 3 * a1], g[r - 2 * a0, c - 2 * a1], g[r - a0, c - a1], v0,
                                             g[r + a0, c + a1], g[r + 2 * a0, c + 2 * a1], g[r + 3 * a0, c + 3 * a1], &sa)
                            eb = line_energy(g[r - 3 * b0, c - 3 * b1], g[r - 2 * b0, c - 2 * b1], g[r - b0, c - b1], v0,
                                             g[r + b0, c + b1], g[r + 2 * b0, c + 2 * b1], g[r + 3 * b0, c + 3 * b1], &sb)
                            l0 = w_curv * (ea + eb) + w_fid * ((v0 - p) * (v0 - p))
                            vs = v0 - (w_curv * (sa + sb) + w_fid * (v0 - p)) / denom
                            ea1 = line_energy(g[r - 3 * a0, c - 3 * a1], g[r - 2 * a0, c - 2 * a1], g[r - a0, c - a1], vs,
                                              g[r + a0, c + a1], g[r + 2 * a0, c + 2 * a1], g[r + 3 * a0, c + 3 * a1], &dummy)
                            eb1 = line_energy(g[r - 3 * b0, c - 3 * b1], g[r - 2 * b0, c - 2 * b1], g[r - b0, c - b1], vs,
                                              g[r + b0, c + b1], g[r + 2 * b0, c + 2 * b1], g[r + 3 * b0, c + 3 * b1], &dummy)
                            l1 = w_curv * (ea1 + eb1) + w_fid * ((vs - p) * (vs - p))
                            if l1 < l0:
                                if fabs(vs - v0) > max_change:
                                    max_change = fabs(vs - v0)
                                g[r, c] = vs
        trace.append(total_energy(g, frame, a0, a1, b0, b1, w_curv, w_fid, phase1, blocks))
        if max_change < stop_delta:
            break
    return trace
