# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled transit loop.

Mirrors ``stormpath.transit.step_frame`` operation for operation, including
the order in which random draws are consumed, so both backends produce
identical results for the same seed. Built without fast-math and with FP
contraction disabled to keep that guarantee.
"""

from libc.math cimport floor, tan, M_PI
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libc.stdlib cimport malloc, calloc, free

import numpy as np

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _draw(uint64_t seed, uint64_t* counter) noexcept nogil:
    counter[0] += 1
    return <double>(_mix(seed + counter[0] * GAMMA) >> 11) * INV_2_53


cdef inline void _new_angle(double* ang, double* tana, Py_ssize_t i, double u, double spread) noexcept nogil:
    cdef double a = (u * spread * 2.0 - spread) * M_PI / 180.0
    ang[i] = a
    tana[i] = tan(a)


cdef int _detect_brute(const double* bx, const double* by, Py_ssize_t nb,
                       const double* dx, const double* dy, Py_ssize_t nd,
                       double r2, uint8_t* hit) noexcept nogil:
    cdef Py_ssize_t i, p
    cdef double ex, ey
    cdef int count = 0
    for i in range(nd):
        for p in range(nb):
            ex = dx[i] - bx[p]
            ey = dy[i] - by[p]
            if ex * ex + ey * ey <= r2:
                hit[i] = 1
                count += 1
                break
    return count


cdef int _detect_grid(const double* bx, const double* by, Py_ssize_t nb,
                      const double* dx, const double* dy, Py_ssize_t nd,
                      double radius, double r2, double cell, int nc,
                      int* start, int* order, int* cellof, uint8_t* hit) noexcept nogil:
    # Counting sort of drops into an nc x nc grid covering [0, 1]^2.
    cdef Py_ssize_t i, p, k
    cdef int c, cx, cy, x0, x1, y0, y1, gx, gy, j
    cdef int ncell = nc * nc
    cdef double reach = radius * (1.0 + 1e-9) + 1e-15
    cdef double ex, ey
    cdef int count = 0
    for c in range(ncell + 1):
        start[c] = 0
    for i in range(nd):
        cx = <int>floor(dx[i] / cell)
        cy = <int>floor(dy[i] / cell)
        if cx < 0:
            cx = 0
        elif cx >= nc:
            cx = nc - 1
        if cy < 0:
            cy = 0
        elif cy >= nc:
            cy = nc - 1
        c = cx * nc + cy
        cellof[i] = c
        start[c + 1] += 1
    for c in range(ncell):
        start[c + 1] += start[c]
    # Fill using a running cursor stored one slot ahead, then shift back.
    for i in range(nd):
        c = cellof[i]
        order[start[c]] = <int>i
        start[c] += 1
    for c in range(ncell, 0, -1):
        start[c] = start[c - 1]
    start[0] = 0

    for p in range(nb):
        x0 = <int>floor((bx[p] - reach) / cell)
        x1 = <int>floor((bx[p] + reach) / cell)
        y0 = <int>floor((by[p] - reach) / cell)
        y1 = <int>floor((by[p] + reach) / cell)
        if x1 < 0 or y1 < 0 or x0 >= nc or y0 >= nc:
            continue
        if x0 < 0:
            x0 = 0
        if y0 < 0:
            y0 = 0
        if x1 >= nc:
            x1 = nc - 1
        if y1 >= nc:
            y1 = nc - 1
        for gx in range(x0, x1 + 1):
            for gy in range(y0, y1 + 1):
                c = gx * nc + gy
                for k in range(start[c], start[c + 1]):
                    j = order[k]
                    if hit[j]:
                        continue
                    ex = dx[j] - bx[p]
                    ey = dy[j] - by[p]
                    if ex * ex + ey * ey <= r2:
                        hit[j] = 1
                        count += 1
    return count


def transit_kernel(double[::1] bx, double[::1] by,
                   double[::1] dx, double[::1] dy,
                   double[::1] ang, double[::1] tana,
                   uint64_t seed, uint64_t counter,
                   double fall, double wind, double spread,
                   double body_speed, double radius,
                   bint use_grid, Py_ssize_t max_frames):
    """Run frames until the body's mean x drops below zero.

    Arrays are updated in place. Returns ``(hits, mean_x, counter)`` where
    ``hits`` and ``mean_x`` are trimmed per-frame arrays and ``counter`` is
    the generator position after the run.
    """
    cdef Py_ssize_t nb = bx.shape[0]
    cdef Py_ssize_t nd = dx.shape[0]
    hits_arr = np.zeros(max_frames, dtype=np.int64)
    mean_arr = np.zeros(max_frames, dtype=np.float64)
    cdef int64_t[::1] hits = hits_arr
    cdef double[::1] means = mean_arr
    cdef double r2 = radius * radius
    cdef double cell = radius
    cdef int nc = <int>floor(1.0 / cell) + 1
    cdef Py_ssize_t frame = 0
    cdef Py_ssize_t i
    cdef double s, m
    cdef int nh
    cdef bint overflow = False
    cdef uint8_t* hit = <uint8_t*>calloc(nd + 1, sizeof(uint8_t))
    cdef uint8_t* cat = <uint8_t*>calloc(nd + 1, sizeof(uint8_t))
    cdef int* start = NULL
    cdef int* order = NULL
    cdef int* cellof = NULL
    if use_grid:
        start = <int*>malloc((nc * nc + 1) * sizeof(int))
        order = <int*>malloc((nd + 1) * sizeof(int))
        cellof = <int*>malloc((nd + 1) * sizeof(int))
    if hit == NULL or cat == NULL or (use_grid and (start == NULL or order == NULL or cellof == NULL)):
        free(hit); free(cat); free(start); free(order); free(cellof)
        raise MemoryError()

    cdef double* pbx = &bx[0] if nb > 0 else NULL
    cdef double* pby = &by[0] if nb > 0 else NULL
    cdef double* pdx = &dx[0] if nd > 0 else NULL
    cdef double* pdy = &dy[0] if nd > 0 else NULL
    cdef double* pang = &ang[0] if nd > 0 else NULL
    cdef double* ptan = &tana[0] if nd > 0 else NULL

    with nogil:
        while True:
            s = 0.0
            for i in range(nb):
                s = s + pbx[i]
            m = s / nb
            if not (m >= 0.0):
                break
            if frame >= max_frames:
                overflow = True
                break
            means[frame] = m

            # (1) advance drops
            for i in range(nd):
                pdx[i] = pdx[i] + fall * ptan[i] + wind
                pdy[i] = pdy[i] - fall

            # (2) edge exits; a side exit overrides a bottom exit
            for i in range(nd):
                if pdx[i] >= 1.0:
                    cat[i] = 3
                elif pdx[i] <= 0.0:
                    cat[i] = 2
                elif pdy[i] <= 0.0:
                    cat[i] = 1
                else:
                    cat[i] = 0
            for i in range(nd):
                if cat[i] == 1:
                    pdx[i] = _draw(seed, &counter)
                    pdy[i] = 1.0
            for i in range(nd):
                if cat[i] == 2:
                    pdy[i] = _draw(seed, &counter)
                    pdx[i] = 1.0
            for i in range(nd):
                if cat[i] == 3:
                    pdy[i] = _draw(seed, &counter)
                    pdx[i] = 0.0
            for i in range(nd):
                if cat[i] != 0:
                    _new_angle(pang, ptan, i, _draw(seed, &counter), spread)

            # (3) collisions against the current body position
            if nd > 0:
                if use_grid:
                    nh = _detect_grid(pbx, pby, nb, pdx, pdy, nd, radius, r2, cell, nc,
                                      start, order, cellof, hit)
                else:
                    nh = _detect_brute(pbx, pby, nb, pdx, pdy, nd, r2, hit)
            else:
                nh = 0
            hits[frame] = nh

            # (4) respawn hit drops on the top edge
            if nh > 0:
                for i in range(nd):
                    if hit[i]:
                        pdx[i] = _draw(seed, &counter)
                        pdy[i] = 1.0
                for i in range(nd):
                    if hit[i]:
                        _new_angle(pang, ptan, i, _draw(seed, &counter), spread)
                        hit[i] = 0

            # (5) advance body
            for i in range(nb):
                pbx[i] = pbx[i] - body_speed
            frame += 1

    free(hit); free(cat); free(start); free(order); free(cellof)
    if overflow:
        raise RuntimeError(f"transit exceeded {max_frames} frames")
    return hits_arr[:frame], mean_arr[:frame], counter
