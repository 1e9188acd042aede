"""2D geometry: ray/segment kernels and polygon utilities.

The three kernel functions (`ray_hit`, `scan_hits`, `min_clearance`) are the
hot path of the simulator. This module holds the pure numpy implementations;
`curricnav.kernels` swaps in the compiled versions when the extension built.
Both implementations use the same expression order so results agree to the
last bit up to libm/vector-math rounding of sin/cos.

Edges are passed as a C-contiguous float64 array of shape (E, 4) with rows
(x1, y1, x2, y2).
"""

import math

import numpy as np

EDGE_DTYPE = np.float64


def ray_hit(edges: np.ndarray, ox: float, oy: float, angle: float, max_range: float) -> float:
    """Distance from (ox, oy) along `angle` to the nearest edge, capped at max_range."""
    if edges.shape[0] == 0:
        return max_range
    dx = math.cos(angle)
    dy = math.sin(angle)
    ex = edges[:, 2] - edges[:, 0]
    ey = edges[:, 3] - edges[:, 1]
    qx = edges[:, 0] - ox
    qy = edges[:, 1] - oy
    denom = dx * ey - dy * ex
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qx * ey - qy * ex) / denom
        u = (qx * dy - qy * dx) / denom
    valid = (denom != 0.0) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    if not valid.any():
        return max_range
    return min(max_range, float(t[valid].min()))


def scan_hits(
    edges: np.ndarray,
    ox: float,
    oy: float,
    heading: float,
    n_rays: int,
    max_range: float,
) -> np.ndarray:
    """Hit distances for n_rays rays fanned counterclockwise from `heading`."""
    out = np.full(n_rays, max_range)
    if edges.shape[0] == 0:
        return out
    # libm cos/sin per ray, matching the compiled kernel exactly.
    dx = np.empty(n_rays)
    dy = np.empty(n_rays)
    two_pi = 2.0 * math.pi
    for i in range(n_rays):
        a = heading + two_pi * i / n_rays
        dx[i] = math.cos(a)
        dy[i] = math.sin(a)
    ex = edges[:, 2] - edges[:, 0]
    ey = edges[:, 3] - edges[:, 1]
    qx = edges[:, 0] - ox
    qy = edges[:, 1] - oy
    denom = dx[:, None] * ey[None, :] - dy[:, None] * ex[None, :]
    tnum = qx * ey - qy * ex
    with np.errstate(divide="ignore", invalid="ignore"):
        t = tnum[None, :] / denom
        u = (qx[None, :] * dy[:, None] - qy[None, :] * dx[:, None]) / denom
    valid = (denom != 0.0) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    t = np.where(valid, t, np.inf)
    np.minimum(t.min(axis=1), max_range, out=out)
    return out


def min_clearance(edges: np.ndarray, ax: float, ay: float, bx: float, by: float) -> float:
    """Minimum distance between segment (a, b) and every edge (inf if no edges)."""
    if edges.shape[0] == 0:
        return math.inf
    x1, y1, x2, y2 = edges[:, 0], edges[:, 1], edges[:, 2], edges[:, 3]
    abx, aby = bx - ax, by - ay
    # Proper crossings have distance zero.
    d1 = abx * (y1 - ay) - aby * (x1 - ax)
    d2 = abx * (y2 - ay) - aby * (x2 - ax)
    ex, ey = x2 - x1, y2 - y1
    d3 = ex * (ay - y1) - ey * (ax - x1)
    d4 = ex * (by - y1) - ey * (bx - x1)
    if (((d1 > 0.0) != (d2 > 0.0)) & (d1 != 0.0) & (d2 != 0.0)
            & ((d3 > 0.0) != (d4 > 0.0)) & (d3 != 0.0) & (d4 != 0.0)).any():
        return 0.0
    best = np.minimum(
        np.minimum(
            _point_seg_dist_arr(ax, ay, x1, y1, x2, y2),
            _point_seg_dist_arr(bx, by, x1, y1, x2, y2),
        ),
        np.minimum(
            _point_seg_dist_arr(x1, y1, ax, ay, bx, by),
            _point_seg_dist_arr(x2, y2, ax, ay, bx, by),
        ),
    )
    return float(best.min())


def _point_seg_dist_arr(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (wx * vx + wy * vy) / vv
    t = np.clip(np.where(vv > 0.0, t, 0.0), 0.0, 1.0)
    rx = wx - t * vx
    ry = wy - t * vy
    return np.sqrt(rx * rx + ry * ry)


# ---------------------------------------------------------------------------
# Polygon utilities (validation, difficulty metrics); not performance-critical.

def point_segment_distance(px, py, ax, ay, bx, by) -> float:
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    if vv == 0.0:
        return math.hypot(wx, wy)
    t = min(1.0, max(0.0, (wx * vx + wy * vy) / vv))
    return math.hypot(wx - t * vx, wy - t * vy)


def segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 \
            and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return 0.0
    return min(
        point_segment_distance(ax, ay, cx, cy, dx, dy),
        point_segment_distance(bx, by, cx, cy, dx, dy),
        point_segment_distance(cx, cy, ax, ay, bx, by),
        point_segment_distance(dx, dy, ax, ay, bx, by),
    )


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace area; positive for counterclockwise winding."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_area(vertices: np.ndarray) -> float:
    return abs(signed_area(vertices))


def polygon_edges(vertices: np.ndarray) -> np.ndarray:
    """(K, 4) edge array, closing the ring."""
    nxt = np.roll(vertices, -1, axis=0)
    return np.ascontiguousarray(np.hstack([vertices, nxt]), dtype=EDGE_DTYPE)


def is_convex_ccw(vertices: np.ndarray) -> bool:
    """Strictly convex, counterclockwise, no repeated/collinear vertices."""
    n = len(vertices)
    if n < 3:
        return False
    v = np.asarray(vertices, dtype=float)
    a = np.roll(v, -1, axis=0) - v
    b = np.roll(a, -1, axis=0)
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return bool(np.all(cross > 0.0))


def is_simple(vertices: np.ndarray) -> bool:
    """No two non-adjacent edges intersect or touch."""
    n = len(vertices)
    edges = polygon_edges(np.asarray(vertices, dtype=float))
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segment_segment_distance(*edges[i], *edges[j]) == 0.0:
                return False
    return True


def point_in_polygon(px: float, py: float, vertices: np.ndarray) -> bool:
    """Even-odd crossing test; boundary points are implementation-defined."""
    inside = False
    n = len(vertices)
    x1, y1 = vertices[-1]
    for k in range(n):
        x2, y2 = vertices[k]
        if (y1 > py) != (y2 > py):
            xcross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < xcross:
                inside = not inside
        x1, y1 = x2, y2
    return inside


def polygon_distance(verts_a: np.ndarray, verts_b: np.ndarray) -> float:
    """Minimum boundary distance between two polygons (0 if touching/crossing)."""
    ea = polygon_edges(np.asarray(verts_a, dtype=float))
    eb = polygon_edges(np.asarray(verts_b, dtype=float))
    best = math.inf
    for sa in ea:
        for sb in eb:
            d = segment_segment_distance(*sa, *sb)
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return best
