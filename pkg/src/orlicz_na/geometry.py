"""Planar convex-polygon utilities for the localization loop.

Polygons are lists of ``(x, y)`` tuples in counterclockwise order.  All
cuts used by the localization engine are half-plane clips, so
Sutherland-Hodgman against a single half-plane is the only clipping
primitive needed.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

Point = Tuple[float, float]
Poly = List[Point]

EPS = 1e-12


def polygon_area(poly: Sequence[Point]) -> float:
    """Signed shoelace area (positive for counterclockwise order)."""
    n = len(poly)
    if n < 3:
        return 0.0
    s = 0.0
    for k in range(n):
        x1, y1 = poly[k]
        x2, y2 = poly[(k + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def ensure_ccw(poly: Sequence[Point]) -> Poly:
    pts = list(poly)
    if polygon_area(pts) < 0:
        pts.reverse()
    return pts


def clip_halfplane(poly: Sequence[Point], origin: Point, normal: Point) -> Poly:
    """Clip to ``{p : (p - origin) . normal >= 0}`` (Sutherland-Hodgman)."""
    ox, oy = origin
    nx, ny = normal

    def side(p: Point) -> float:
        return (p[0] - ox) * nx + (p[1] - oy) * ny

    out: Poly = []
    n = len(poly)
    for k in range(n):
        cur, nxt = poly[k], poly[(k + 1) % n]
        s_cur, s_nxt = side(cur), side(nxt)
        if s_cur >= -EPS:
            out.append(cur)
        if (s_cur > EPS and s_nxt < -EPS) or (s_cur < -EPS and s_nxt > EPS):
            t = s_cur / (s_cur - s_nxt)
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return prune_degenerate(out)


def prune_degenerate(poly: Sequence[Point], tol: float = 1e-11) -> Poly:
    """Drop duplicate and collinear vertices (keeps convexity, bounds size)."""
    pts = list(poly)
    if len(pts) < 3:
        return pts
    scale = max(max(abs(x), abs(y)) for x, y in pts) + 1.0
    # remove near-duplicates
    dedup: Poly = []
    for p in pts:
        if not dedup or math.dist(p, dedup[-1]) > tol * scale:
            dedup.append(p)
    if len(dedup) > 1 and math.dist(dedup[0], dedup[-1]) <= tol * scale:
        dedup.pop()
    if len(dedup) < 3:
        return dedup
    # remove collinear triples; judge by the vertex's deviation from the
    # chord, not the raw cross product, which is small for short edges
    # even at a sharp genuine corner
    out: Poly = []
    m = len(dedup)
    for k in range(m):
        a, b, c = dedup[(k - 1) % m], dedup[k], dedup[(k + 1) % m]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        chord = math.dist(a, c)
        if abs(cross) > tol * scale * max(chord, tol * scale):
            out.append(b)
    return out if len(out) >= 3 else dedup


def contains_point(poly: Sequence[Point], p: Point, tol: float = 1e-9) -> bool:
    """Closed membership test for a convex CCW polygon, with slack ``tol``.

    Degenerate polygons (segments, points) are handled by distance, so
    callers can validate heavily pruned clipping output.
    """
    n = len(poly)
    if n == 0:
        return False
    if n == 1:
        return math.dist(poly[0], p) <= tol
    if n == 2:
        return _segment_distance(p, poly[0], poly[1]) <= tol
    for k in range(n):
        ax, ay = poly[k]
        bx, by = poly[(k + 1) % n]
        ex, ey = bx - ax, by - ay
        edge = math.hypot(ex, ey)
        if edge <= 0.0:
            continue
        cross = ex * (p[1] - ay) - ey * (p[0] - ax)
        if cross < -tol * edge:
            return False
    return True


def _segment_distance(p: Point, a: Point, b: Point) -> float:
    ex, ey = b[0] - a[0], b[1] - a[1]
    den = ex * ex + ey * ey
    if den <= 0.0:
        return math.dist(a, p)
    t = ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / den
    t = min(max(t, 0.0), 1.0)
    return math.dist((a[0] + t * ex, a[1] + t * ey), p)


def is_interior(poly: Sequence[Point], p: Point, tol: float = 1e-9) -> bool:
    """Interior test for a convex CCW polygon with clearance ``tol``.

    ``tol`` is a distance: the point must sit at least that far inside
    every edge line (cross products are normalized by edge length, so
    short clipping slivers don't veto genuinely interior points).
    """
    n = len(poly)
    if n < 3:
        return False
    for k in range(n):
        ax, ay = poly[k]
        bx, by = poly[(k + 1) % n]
        ex, ey = bx - ax, by - ay
        edge = math.hypot(ex, ey)
        if edge <= 0.0:
            continue
        cross = ex * (p[1] - ay) - ey * (p[0] - ax)
        if cross <= tol * edge:
            return False
    return True


def diameter(poly: Sequence[Point]) -> float:
    best = 0.0
    for i in range(len(poly)):
        for j in range(i + 1, len(poly)):
            best = max(best, math.dist(poly[i], poly[j]))
    return best


def min_width(poly: Sequence[Point]) -> float:
    """Minimal width of a convex polygon.

    The width in a direction is the extent of the polygon's projection on
    it; the minimum over all directions is attained with an edge flush
    against one side of the enclosing slab, so scanning edges suffices.
    A polygon that has degenerated to a point or segment has width zero.
    """
    n = len(poly)
    if n < 3:
        return 0.0
    best = math.inf
    for k in range(n):
        ax, ay = poly[k]
        bx, by = poly[(k + 1) % n]
        ex, ey = bx - ax, by - ay
        edge = math.hypot(ex, ey)
        if edge <= 0.0:
            continue
        reach = 0.0
        for p in poly:
            reach = max(reach, abs(ex * (p[1] - ay) - ey * (p[0] - ax)) / edge)
        best = min(best, reach)
    return 0.0 if math.isinf(best) else best


def bounding_box(poly: Sequence[Point]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    return min(xs), min(ys), max(xs), max(ys)


def vertical_slice(poly: Sequence[Point], x: float) -> Optional[tuple[float, float]]:
    """The interval ``{y : (x, y) in poly}`` or ``None`` when empty."""
    lo, hi = INF_SLICE
    found = False
    n = len(poly)
    for k in range(n):
        (x1, y1), (x2, y2) = poly[k], poly[(k + 1) % n]
        if x1 == x2:
            if x1 == x:
                lo, hi = min(lo, y1, y2), max(hi, y1, y2)
                found = True
            continue
        t = (x - x1) / (x2 - x1)
        if -EPS <= t <= 1.0 + EPS:
            y = y1 + min(max(t, 0.0), 1.0) * (y2 - y1)
            lo, hi = min(lo, y), max(hi, y)
            found = True
    return (lo, hi) if found and lo <= hi else None


INF_SLICE = (math.inf, -math.inf)


def slice_interval_vec(poly: Sequence[Point], xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized vertical slices; empty slices come back as ``lo > hi``."""
    xs = np.asarray(xs, dtype=float)
    lo = np.full(xs.shape, math.inf)
    hi = np.full(xs.shape, -math.inf)
    n = len(poly)
    for k in range(n):
        (x1, y1), (x2, y2) = poly[k], poly[(k + 1) % n]
        if x1 == x2:
            at = xs == x1
            if at.any():
                lo[at] = np.minimum(lo[at], min(y1, y2))
                hi[at] = np.maximum(hi[at], max(y1, y2))
            continue
        t = (xs - x1) / (x2 - x1)
        okt = (t >= -EPS) & (t <= 1.0 + EPS)
        if okt.any():
            y = y1 + np.clip(t[okt], 0.0, 1.0) * (y2 - y1)
            lo[okt] = np.minimum(lo[okt], y)
            hi[okt] = np.maximum(hi[okt], y)
    return lo, hi


def cut_direction(angle: float) -> tuple[Point, Point]:
    """Line direction and plus-side normal for a cut angle in ``[0, pi/2]``.

    The cut line rotates clockwise from vertical (``angle = 0``) to
    horizontal (``angle = pi/2``); the plus side starts east and ends south.
    """
    d = (math.sin(angle), math.cos(angle))
    n = (math.cos(angle), -math.sin(angle))
    return d, n
