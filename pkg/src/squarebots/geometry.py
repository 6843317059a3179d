"""Planar primitives and closed-set predicates.

Coordinates are floats. Every predicate takes a :class:`Tolerance`; points
within ``eta`` of a boundary count as on the boundary, and boundary contact is
always allowed (the regions are closed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry.base import BaseGeometry


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


@dataclass(frozen=True)
class Tolerance:
    eta: float = 1e-9

    def __post_init__(self):
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ValueError(f"tolerance must be finite and >= 0, got {self.eta}")


DEFAULT_TOL = Tolerance()

Ring = tuple[Point, ...]
Face = tuple[Ring, tuple[Ring, ...]]


def _signed_area(ring: Sequence[Point]) -> float:
    s = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def clean_ring(ring: Iterable[Sequence[float]], eps: float = 1e-12) -> Ring:
    """Drop the closing duplicate, repeated vertices and collinear vertices."""
    pts = [Point(float(p[0]), float(p[1])) for p in ring]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        out: list[Point] = []
        n = len(pts)
        for i in range(n):
            prev = out[-1] if out else pts[i - 1]
            cur = pts[i]
            nxt = pts[(i + 1) % n]
            if abs(cur.x - prev.x) <= eps and abs(cur.y - prev.y) <= eps:
                changed = True
                continue
            ux, uy = cur.x - prev.x, cur.y - prev.y
            vx, vy = nxt.x - cur.x, nxt.y - cur.y
            lu, lv = math.hypot(ux, uy), math.hypot(vx, vy)
            if lu > 0 and lv > 0:
                cross = ux * vy - uy * vx
                if abs(cross) <= 1e-12 * lu * lv and ux * vx + uy * vy > 0:
                    changed = True
                    continue
            out.append(cur)
        pts = out
    return tuple(pts)


def _oriented(ring: Ring, ccw: bool) -> Ring:
    if (_signed_area(ring) > 0) != ccw:
        return tuple(reversed(ring))
    return ring


@dataclass(frozen=True, eq=True)
class PolygonalRegion:
    """A closed polygonal point set: faces of (outer ring, hole rings).

    Ring orientation is repaired on construction (outer CCW, holes CW).
    """

    faces: tuple[Face, ...]

    def __post_init__(self):
        fixed = []
        for outer, holes in self.faces:
            o = clean_ring(outer)
            if len(o) < 3:
                continue
            hs = tuple(_oriented(h2, False) for h2 in (clean_ring(h) for h in holes) if len(h2) >= 3)
            fixed.append((_oriented(o, True), hs))
        for ring in (r for f in fixed for r in (f[0], *f[1])):
            for x, y in ring:
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise ValueError("polygon coordinates must be finite")
        object.__setattr__(self, "faces", tuple(fixed))

    @classmethod
    def from_rings(cls, outer, holes=()) -> "PolygonalRegion":
        return cls(((tuple(outer), tuple(tuple(h) for h in holes)),))

    @classmethod
    def empty(cls) -> "PolygonalRegion":
        return cls(())

    @classmethod
    def from_shapely(cls, geom: BaseGeometry) -> "PolygonalRegion":
        polys = _polygons_of(geom)
        faces = []
        for p in polys:
            if p.is_empty or p.area <= 0:
                continue
            faces.append((tuple(p.exterior.coords), tuple(tuple(i.coords) for i in p.interiors)))
        return cls(tuple(faces))

    def rings(self) -> list[Ring]:
        return [r for outer, holes in self.faces for r in (outer, *holes)]

    @property
    def is_empty(self) -> bool:
        return not self.faces

    @cached_property
    def vertices(self) -> tuple[Point, ...]:
        return tuple(p for r in self.rings() for p in r)

    @cached_property
    def edges(self) -> np.ndarray:
        """(E, 4) array of ring edges x1, y1, x2, y2."""
        rows = []
        for r in self.rings():
            n = len(r)
            for i in range(n):
                rows.append((r[i].x, r[i].y, r[(i + 1) % n].x, r[(i + 1) % n].y))
        return np.asarray(rows, dtype=float).reshape(-1, 4)

    def edge_segments(self) -> list[Segment]:
        return [Segment(Point(e[0], e[1]), Point(e[2], e[3])) for e in self.edges]

    @cached_property
    def area(self) -> float:
        return sum(_signed_area(o) + sum(_signed_area(h) for h in hs) for o, hs in self.faces)

    @cached_property
    def bounds(self) -> tuple[float, float, float, float]:
        if self.is_empty:
            return (math.nan,) * 4
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    @cached_property
    def shape(self) -> BaseGeometry:
        polys = [Polygon(o, list(hs)) for o, hs in self.faces]
        if len(polys) == 1:
            return polys[0]
        return MultiPolygon(polys)

    def to_shapely(self) -> BaseGeometry:
        return self.shape


PolygonalEnvironment = PolygonalRegion


def _polygons_of(geom: BaseGeometry) -> list[Polygon]:
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        return [geom]
    out = []
    for g in getattr(geom, "geoms", []):
        out.extend(_polygons_of(g))
    return out


def linf_dist(p: Sequence[float], q: Sequence[float]) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def square(center: Sequence[float], r: float) -> PolygonalRegion:
    """Closed axis-aligned square of radius ``r`` (side ``2r``)."""
    if r < 0:
        raise ValueError(f"square radius must be >= 0, got {r}")
    cx, cy = float(center[0]), float(center[1])
    ring = (Point(cx - r, cy - r), Point(cx + r, cy - r), Point(cx + r, cy + r), Point(cx - r, cy + r))
    if r == 0:
        # degenerate point region; kept as a raw face so it is not cleaned away
        reg = PolygonalRegion.empty()
        object.__setattr__(reg, "faces", ((ring, ()),))
        return reg
    return PolygonalRegion(((ring, ()),))


# --------------------------------------------------------------------------
# point predicates


def _point_seg_dist(px, py, x1, y1, x2, y2):
    """Euclidean distance from points to segments (broadcasting)."""
    dx = x2 - x1
    dy = y2 - y1
    ll = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(ll > 0, ((px - x1) * dx + (py - y1) * dy) / np.where(ll > 0, ll, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    cx = x1 + t * dx
    cy = y1 + t * dy
    return np.hypot(px - cx, py - cy)


def boundary_distance(region: PolygonalRegion, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    e = region.edges
    if len(e) == 0:
        return np.full(len(pts), np.inf)
    px = pts[:, 0:1]
    py = pts[:, 1:2]
    d = _point_seg_dist(px, py, e[None, :, 0], e[None, :, 1], e[None, :, 2], e[None, :, 3])
    return d.min(axis=1)


def contains_points(region: PolygonalRegion, pts, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Vectorized closed containment (even-odd over all rings)."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    e = region.edges
    if len(e) == 0:
        return np.zeros(len(pts), dtype=bool)
    px = pts[:, 0:1]
    py = pts[:, 1:2]
    x1, y1, x2, y2 = (e[None, :, i] for i in range(4))
    straddle = (y1 > py) != (y2 > py)
    with np.errstate(invalid="ignore", divide="ignore"):
        xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
    crossings = np.count_nonzero(straddle & (px < xint), axis=1)
    inside = (crossings % 2) == 1
    near = _point_seg_dist(px, py, x1, y1, x2, y2).min(axis=1) <= tol.eta
    return inside | near


def contains_point(region: PolygonalRegion, p: Sequence[float], tol: Tolerance = DEFAULT_TOL) -> bool:
    return bool(contains_points(region, [p], tol)[0])


# --------------------------------------------------------------------------
# segment predicates


def _segment_boundary_params(region: PolygonalRegion, a, b, slack: float) -> list[float]:
    """Parameters on ab where it meets the region boundary (within slack)."""
    ax, ay = a
    rx, ry = b[0] - ax, b[1] - ay
    rr = rx * rx + ry * ry
    rl = math.sqrt(rr)
    ts = [0.0, 1.0]
    for x1, y1, x2, y2 in region.edges:
        qx, qy = x2 - x1, y2 - y1
        denom = rx * qy - ry * qx
        cx, cy = x1 - ax, y1 - ay
        ql = math.hypot(qx, qy)
        if abs(denom) > 1e-14 * rl * max(ql, 1e-300):
            t = (cx * qy - cy * qx) / denom
            u = (cx * ry - cy * rx) / denom
            du = slack / ql if ql > 0 else 0.0
            dt = slack / rl
            if -dt <= t <= 1 + dt and -du <= u <= 1 + du:
                ts.append(min(1.0, max(0.0, t)))
        # vertices grazing the segment, and collinear overlaps
        for vx, vy in ((x1, y1), (x2, y2)):
            t = ((vx - ax) * rx + (vy - ay) * ry) / rr
            if -1e-12 <= t <= 1 + 1e-12:
                t = min(1.0, max(0.0, t))
                if math.hypot(ax + t * rx - vx, ay + t * ry - vy) <= slack:
                    ts.append(t)
    return sorted(set(ts))


def segment_exit_param(region: PolygonalRegion, s: Segment, tol: Tolerance = DEFAULT_TOL) -> float | None:
    """None if ``s`` lies in the closed region, else a parameter in [0,1] where it is outside."""
    a, b = s
    if not contains_point(region, a, tol):
        return 0.0
    if not contains_point(region, b, tol):
        return 1.0
    if (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2 == 0.0:
        return None
    ts = _segment_boundary_params(region, a, b, max(tol.eta, 1e-12))
    mids = [0.5 * (t0 + t1) for t0, t1 in zip(ts, ts[1:]) if t1 - t0 > 1e-12]
    if not mids:
        return None
    pts = [(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])) for t in mids]
    ok = contains_points(region, pts, tol)
    bad = np.flatnonzero(~ok)
    return None if len(bad) == 0 else float(mids[bad[0]])


def contains_segment(region: PolygonalRegion, s: Segment, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Exact closed containment of a segment via boundary-crossing analysis."""
    return segment_exit_param(region, s, tol) is None


def segments_contained_from(
    region: PolygonalRegion, a: Sequence[float], targets, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """``contains_segment(region, (a, b))`` for every row b of ``targets``.

    Clear-cut cases are decided vectorized; segments that touch the boundary
    fall back to the scalar crossing analysis.
    """
    tg = np.asarray(targets, dtype=float).reshape(-1, 2)
    n = len(tg)
    if n == 0:
        return np.zeros(0, dtype=bool)
    if not contains_point(region, a, tol):
        return np.zeros(n, dtype=bool)
    e = region.edges
    ok = contains_points(region, tg, tol)
    if len(e) == 0:
        return ok
    eps = max(10 * tol.eta, 1e-9)
    ax, ay = float(a[0]), float(a[1])
    bx = tg[:, 0:1]
    by = tg[:, 1:2]
    x1, y1, x2, y2 = (e[None, :, i] for i in range(4))
    rx, ry = bx - ax, by - ay
    rl = np.hypot(rx, ry)
    ql = np.hypot(x2 - x1, y2 - y1)
    with np.errstate(invalid="ignore", divide="ignore"):
        dc = (rx * (y1 - ay) - ry * (x1 - ax)) / rl
        dd = (rx * (y2 - ay) - ry * (x2 - ax)) / rl
        ea = ((x2 - x1) * (ay - y1) - (y2 - y1) * (ax - x1)) / ql
        eb = ((x2 - x1) * (by - y1) - (y2 - y1) * (bx - x1)) / ql
    proper = (dc * dd < 0) & (ea * eb < 0)
    margin = np.minimum(np.minimum(np.abs(dc), np.abs(dd)), np.minimum(np.abs(ea), np.abs(eb)))
    crossing = proper & (margin > eps)
    near = np.minimum(
        np.minimum(_point_seg_dist(x1, y1, ax, ay, bx, by), _point_seg_dist(x2, y2, ax, ay, bx, by)),
        np.minimum(_point_seg_dist(ax, ay, x1, y1, x2, y2), _point_seg_dist(bx, by, x1, y1, x2, y2)),
    )
    touching = (near <= eps) | (proper & ~crossing)
    degenerate = rl[:, 0] == 0
    bad = crossing.any(axis=1)
    amb = touching.any(axis=1) & ~bad & ok & ~degenerate
    result = ok & ~bad
    for i in np.flatnonzero(amb):
        result[i] = contains_segment(region, Segment(Point(ax, ay), Point(tg[i, 0], tg[i, 1])), tol)
    return result


def _open_box_hit(x0, y0, dx, dy, r):
    """Whether segments p0 + t d, t in [0,1], enter the open box (-r, r)^2 (vectorized)."""
    x0, y0, dx, dy = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x0, y0, dx, dy)))
    lo = np.full(x0.shape, -np.inf)
    hi = np.full(x0.shape, np.inf)
    for p, d in ((x0, dx), (y0, dy)):
        still = d == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-r - p) / d
            t2 = (r - p) / d
        a = np.where(still, np.where(np.abs(p) < r, -np.inf, np.inf), np.minimum(t1, t2))
        b = np.where(still, np.where(np.abs(p) < r, np.inf, -np.inf), np.maximum(t1, t2))
        lo = np.maximum(lo, a)
        hi = np.minimum(hi, b)
    return (lo < hi) & (lo < 1.0) & (hi > 0.0)


def segment_avoids_open_square(s: Segment, center: Sequence[float], r: float, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff no point of ``s`` lies in the open square of radius ``r`` at ``center``.

    Penetration shallower than ``tol.eta`` counts as contact.
    """
    if r <= 0:
        raise ValueError(f"square radius must be > 0, got {r}")
    a, b = s
    hit = _open_box_hit(a[0] - center[0], a[1] - center[1], b[0] - a[0], b[1] - a[1], r - tol.eta)
    return not bool(hit)


def relative_motions_clear(d0x, d0y, d1x, d1y, sep: float, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Vectorized pairwise check: relative displacement d0 -> d1 stays at l_inf >= sep."""
    d0x = np.asarray(d0x, dtype=float)
    d0y = np.asarray(d0y, dtype=float)
    return ~_open_box_hit(d0x, d0y, np.asarray(d1x) - d0x, np.asarray(d1y) - d0y, sep - tol.eta)


def shoelace_area(region: PolygonalRegion) -> float:
    return region.area


def region_covers(outer: PolygonalRegion, inner: PolygonalRegion, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Closed containment of one region in another, with ``eta`` slack."""
    if inner.is_empty:
        return True
    if outer.is_empty:
        return False
    grown = outer.shape.buffer(max(tol.eta, 1e-12), join_style="mitre")
    return bool(grown.covers(inner.shape))


def make_valid(geom: BaseGeometry) -> BaseGeometry:
    if geom.is_valid:
        return geom
    return shapely.make_valid(geom)
