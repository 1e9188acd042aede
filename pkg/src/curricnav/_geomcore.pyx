# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels; same math as curricnav.geometry."""

from libc.math cimport cos, sin, sqrt, INFINITY

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef double _ray_hit_c(const double[:, ::1] edges, double ox, double oy,
                       double dx, double dy, double max_range) noexcept nogil:
    cdef Py_ssize_t e, n = edges.shape[0]
    cdef double ex, ey, qx, qy, denom, t, u
    cdef double best = max_range
    for e in range(n):
        ex = edges[e, 2] - edges[e, 0]
        ey = edges[e, 3] - edges[e, 1]
        qx = edges[e, 0] - ox
        qy = edges[e, 1] - oy
        denom = dx * ey - dy * ex
        if denom == 0.0:
            continue
        t = (qx * ey - qy * ex) / denom
        u = (qx * dy - qy * dx) / denom
        if t >= 0.0 and u >= 0.0 and u <= 1.0 and t < best:
            best = t
    return best


def ray_hit(const double[:, ::1] edges, double ox, double oy, double angle,
            double max_range):
    return _ray_hit_c(edges, ox, oy, cos(angle), sin(angle), max_range)


def scan_hits(const double[:, ::1] edges, double ox, double oy, double heading,
              int n_rays, double max_range):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_rays, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double a, two_pi = 2.0 * 3.14159265358979323846
    with nogil:
        for i in range(n_rays):
            a = heading + two_pi * i / n_rays
            ov[i] = _ray_hit_c(edges, ox, oy, cos(a), sin(a), max_range)
    return out


cdef inline double _point_seg_dist(double px, double py, double ax, double ay,
                                   double bx, double by) noexcept nogil:
    cdef double vx = bx - ax
    cdef double vy = by - ay
    cdef double wx = px - ax
    cdef double wy = py - ay
    cdef double vv = vx * vx + vy * vy
    cdef double t
    if vv > 0.0:
        t = (wx * vx + wy * vy) / vv
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    else:
        t = 0.0
    cdef double rx = wx - t * vx
    cdef double ry = wy - t * vy
    return sqrt(rx * rx + ry * ry)


def min_clearance(const double[:, ::1] edges, double ax, double ay,
                  double bx, double by):
    cdef Py_ssize_t e, n = edges.shape[0]
    cdef double x1, y1, x2, y2, d1, d2, d3, d4, ex, ey, d
    cdef double abx = bx - ax
    cdef double aby = by - ay
    cdef double best = INFINITY
    with nogil:
        for e in range(n):
            x1 = edges[e, 0]
            y1 = edges[e, 1]
            x2 = edges[e, 2]
            y2 = edges[e, 3]
            d1 = abx * (y1 - ay) - aby * (x1 - ax)
            d2 = abx * (y2 - ay) - aby * (x2 - ax)
            ex = x2 - x1
            ey = y2 - y1
            d3 = ex * (ay - y1) - ey * (ax - x1)
            d4 = ex * (by - y1) - ey * (bx - x1)
            if ((d1 > 0.0) != (d2 > 0.0)) and d1 != 0.0 and d2 != 0.0 \
                    and ((d3 > 0.0) != (d4 > 0.0)) and d3 != 0.0 and d4 != 0.0:
                best = 0.0
                break
            d = _point_seg_dist(ax, ay, x1, y1, x2, y2)
            if d < best:
                best = d
            d = _point_seg_dist(bx, by, x1, y1, x2, y2)
            if d < best:
                best = d
            d = _point_seg_dist(x1, y1, ax, ay, bx, by)
            if d < best:
                best = d
            d = _point_seg_dist(x2, y2, ax, ay, bx, by)
            if d < best:
                best = d
    return best
