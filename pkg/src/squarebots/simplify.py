"""Breakpoint reduction: snapped free space, vertical decomposition, epoch shortcutting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from shapely.geometry import LineString, box
from shapely.geometry import Point as SPoint
from shapely.geometry import Polygon
from shapely.ops import polygonize, unary_union

from .freespace import FreeSpace
from .geometry import (
    DEFAULT_TOL,
    Point,
    PolygonalRegion,
    Segment,
    Tolerance,
    _polygons_of,
    contains_segment,
    make_valid,
    relative_motions_clear,
    segment_exit_param,
    segment_avoids_open_square,
)
from .kinematics import signed_directions
from .plan_model import Plan, Violation, merge_collinear


class NotRobustError(ValueError):
    def __init__(self, violations: list[Violation], radius: float):
        super().__init__(f"plan is not robust at radius {radius}: {len(violations)} violation(s)")
        self.violations = violations
        self.radius = radius


@dataclass(frozen=True)
class SnappedFreeSpace:
    robot: int
    anchor: Point
    rho: float
    region: PolygonalRegion
    snapped: tuple[tuple[Point, Point], ...] = ()

    @property
    def cells(self) -> list[Polygon]:
        return vertical_decomposition(self)


@dataclass
class Epoch:
    start: float
    anchor: tuple[Point, ...]
    cells: list[list[Polygon]]
    current: list[int]
    order: dict = field(default_factory=dict)


def _grid_candidates(comp, step: float) -> list[tuple[float, float]]:
    x0, y0, x1, y1 = comp.bounds
    xs = np.arange(math.ceil(x0 / step - 1e-9), math.floor(x1 / step + 1e-9) + 1) * step
    ys = np.arange(math.ceil(y0 / step - 1e-9), math.floor(y1 / step + 1e-9) + 1) * step
    grown = comp.buffer(1e-9)
    return [(float(x), float(y)) for x in xs for y in ys if grown.covers(SPoint(x, y))]


def snap_freespace(
    f: FreeSpace, f_rho: FreeSpace, anchor: Sequence[float], rho: float, robot: int = 0, tol: Tolerance = DEFAULT_TOL
) -> SnappedFreeSpace:
    """F* for the unit square around ``anchor``.

    Vertices of F's boundary that fall in cl((F minus F_rho) within the square)
    move to the nearest rho/2 grid point of the same component; the result is
    then clamped between F_rho and F inside the square.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    ax, ay = float(anchor[0]), float(anchor[1])
    sq = box(ax - 1, ay - 1, ax + 1, ay + 1)
    A = make_valid(f.region.shape.intersection(sq))
    A_rho = make_valid(f_rho.region.shape.intersection(sq))
    C = make_valid(A.difference(A_rho))
    comps = _polygons_of(C)
    fverts = {(v.x, v.y) for v in f.region.vertices}
    step = rho / 2.0
    moved = {}
    cache = {}
    for v in fverts:
        pv = SPoint(v)
        if not sq.buffer(tol.eta).covers(pv) or not comps:
            continue
        ci = min(range(len(comps)), key=lambda i: comps[i].distance(pv))
        if comps[ci].distance(pv) > tol.eta:
            continue
        if ci not in cache:
            cache[ci] = _grid_candidates(comps[ci], step)
        cands = cache[ci]
        if not cands:
            continue
        g = min(cands, key=lambda c: ((c[0] - v[0]) ** 2 + (c[1] - v[1]) ** 2, c))
        if g != v:
            moved[v] = g
    if moved:
        polys = []
        for poly in _polygons_of(A):
            rings = [poly.exterior, *poly.interiors]
            new = [[moved.get(tuple(c), tuple(c)) for c in r.coords] for r in rings]
            polys.append(make_valid(Polygon(new[0], new[1:])))
        raw = unary_union(polys) if polys else A
        star = make_valid(unary_union([raw, A_rho]).intersection(A))
    else:
        star = A
    region = PolygonalRegion.from_shapely(star)
    return SnappedFreeSpace(
        robot, Point(ax, ay), rho, region, tuple((Point(*k), Point(*v)) for k, v in sorted(moved.items()))
    )


def _reflex_vertices(poly: Polygon) -> list[tuple[float, float]]:
    out = []
    for ring, sign in ((poly.exterior, 1.0), *((r, -1.0) for r in poly.interiors)):
        pts = list(ring.coords)[:-1]
        ccw = ring.is_ccw
        n = len(pts)
        for i in range(n):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            # interior is on the left of a ccw exterior and on the right of a ccw hole
            turn = cross if ccw else -cross
            if sign * turn < -1e-12:
                out.append(b)
    return out


def vertical_decomposition(sfs: SnappedFreeSpace | PolygonalRegion) -> list[Polygon]:
    """Convex cells: walls are cast up and down from every reflex vertex."""
    region = sfs.region if isinstance(sfs, SnappedFreeSpace) else sfs
    cells: list[Polygon] = []
    for poly in _polygons_of(region.shape):
        _, y0, _, y1 = poly.bounds
        walls = []
        for vx, vy in _reflex_vertices(poly):
            line = LineString([(vx, y0 - 1), (vx, y1 + 1)])
            for piece in _lines_of(poly.intersection(line)):
                lo, hi = sorted(c[1] for c in (piece.coords[0], piece.coords[-1]))
                if lo - 1e-9 <= vy <= hi + 1e-9:
                    for seg in ((lo, vy), (vy, hi)):
                        if seg[1] - seg[0] > 1e-9:
                            walls.append(LineString([(vx, seg[0]), (vx, seg[1])]))
        if not walls:
            cells.append(poly)
            continue
        noded = unary_union([poly.boundary, *walls])
        for face in polygonize(noded):
            if face.area > 1e-12 and poly.covers(face.representative_point()):
                cells.append(face)
    cells.sort(key=lambda c: (round(c.bounds[0], 9), round(c.bounds[1], 9)))
    return cells


def _lines_of(geom) -> list[LineString]:
    if geom.is_empty:
        return []
    if isinstance(geom, LineString):
        return [geom]
    return [g for g in getattr(geom, "geoms", []) if isinstance(g, LineString)]


def _halfplanes(cell: Polygon) -> np.ndarray:
    """Rows (nx, ny, c): inside iff nx*x + ny*y <= c."""
    pts = np.asarray(cell.exterior.coords)[:-1]
    if not cell.exterior.is_ccw:
        pts = pts[::-1]
    nxt = np.roll(pts, -1, axis=0)
    d = nxt - pts
    n = np.stack([d[:, 1], -d[:, 0]], axis=1)
    return np.column_stack([n, (n * pts).sum(axis=1)])


def _in_cell(cell: Polygon, p, eps: float) -> bool:
    return cell.distance(SPoint(p[0], p[1])) <= eps


def locate(cells: Sequence[Polygon], p, direction=None, eps: float = 1e-9) -> int:
    """Cell of ``p``; on a shared edge the one next entered along ``direction``, else the lowest index."""
    hits = [i for i, c in enumerate(cells) if _in_cell(c, p, eps)]
    if not hits:
        pt = SPoint(p[0], p[1])
        return min(range(len(cells)), key=lambda i: (cells[i].distance(pt), i)) if cells else -1
    if len(hits) > 1 and direction is not None:
        n = math.hypot(direction[0], direction[1])
        if n > 0:
            q = (p[0] + 1e-7 * direction[0] / n, p[1] + 1e-7 * direction[1] / n)
            ahead = [i for i in hits if cells[i].covers(SPoint(q))]
            if ahead:
                return ahead[0]
    return hits[0]


def _robust_violations(plan: Plan, f_rho: FreeSpace, sep: float, tol: Tolerance) -> list[Violation]:
    out = []
    for m, (a, b) in enumerate(plan.legs()):
        for i, (p, q) in enumerate(zip(a, b)):
            t = segment_exit_param(f_rho.region, Segment(p, q), tol)
            if t is not None:
                out.append(Violation(m, "robot", (i,), t, float("nan")))
        for i, j in combinations(range(plan.k), 2):
            d0 = Point(a[i].x - a[j].x, a[i].y - a[j].y)
            d1 = Point(b[i].x - b[j].x, b[i].y - b[j].y)
            if not segment_avoids_open_square(Segment(d0, d1), (0.0, 0.0), sep, tol):
                out.append(Violation(m, "pair", (i, j), 0.0, float("nan")))
    return out


class _Shortcutter:
    def __init__(self, arr: np.ndarray, f: FreeSpace, f_rho: FreeSpace, rho: float, tol: Tolerance):
        self.arr = arr
        self.L = len(arr) - 1
        self.k = arr.shape[1]
        self.f = f
        self.f_rho = f_rho
        self.rho = rho
        self.tol = tol
        self.sep = 2.0 * f_rho.radius
        self.epochs = 0

    def at(self, t: float) -> np.ndarray:
        j = min(int(math.floor(t)), self.L - 1)
        u = t - j
        if u >= 1.0:
            return self.arr[j + 1].copy()
        return self.arr[j] + u * (self.arr[j + 1] - self.arr[j])

    def heading(self, t: float, i: int):
        j = min(int(math.floor(t + 1e-12)), self.L - 1)
        while j < self.L:
            d = self.arr[j + 1, i] - self.arr[j, i]
            if np.hypot(*d) > 1e-12 and (j + 1) > t + 1e-12:
                return d
            j += 1
        return None

    def new_epoch(self, t: float) -> Epoch:
        self.epochs += 1
        c = self.at(t)
        cells = [
            vertical_decomposition(snap_freespace(self.f, self.f_rho, c[i], self.rho, i, self.tol))
            for i in range(self.k)
        ]
        ep = Epoch(t, tuple(Point(*p) for p in c), cells, [0] * self.k)
        self.refresh(ep, t)
        return ep

    def refresh(self, ep: Epoch, t: float):
        c = self.at(t)
        ep.current = [locate(ep.cells[i], c[i], self.heading(t, i), self.tol.eta) for i in range(self.k)]
        ep.order = {
            (i, j): signed_directions(c[i], c[j], self.sep, self.tol) for i, j in combinations(range(self.k), 2)
        }

    def exit_time(self, ep: Epoch, tau: float) -> float:
        eta = self.tol.eta
        p = np.asarray(ep.anchor)
        j = min(int(math.floor(tau)), self.L - 1)
        u0 = tau - j
        while j < self.L:
            a, d = self.arr[j], self.arr[j + 1] - self.arr[j]
            hi = 1.0
            for bound, sgn in ((p + 1 + eta, 1.0), (p - 1 - eta, -1.0)):
                # sgn * (a + u d) <= sgn * bound
                with np.errstate(divide="ignore", invalid="ignore"):
                    u = (sgn * (bound - a)) / (sgn * d)
                lim = np.where(sgn * d > 0, u, np.inf)
                hi = min(hi, float(lim.min()))
            if hi < 1.0:
                return j + max(hi, u0)
            j += 1
            u0 = 0.0
        return float(self.L)

    def candidates(self, ep: Epoch, tau: float, t_exit: float) -> list[float]:
        out = {t_exit}
        j = min(int(math.floor(tau)), self.L - 1)
        T = self.sep
        while j < self.L and j < t_exit:
            out.add(float(j + 1))
            a, d = self.arr[j], self.arr[j + 1] - self.arr[j]
            for i in range(self.k):
                cell = ep.cells[i][ep.current[i]] if ep.cells[i] else None
                if cell is None:
                    continue
                hp = _halfplanes(cell)
                num = hp[:, 2] - hp[:, :2] @ a[i]
                den = hp[:, :2] @ d[i]
                with np.errstate(divide="ignore", invalid="ignore"):
                    us = num / den
                out.update(float(j + u) for u in us[np.isfinite(us)] if 0 < u < 1)
            for (i, k2), dirs in ep.order.items():
                for axis, sgn in dirs:
                    ax = 0 if axis == "x" else 1
                    rel0 = a[i, ax] - a[k2, ax]
                    drel = d[i, ax] - d[k2, ax]
                    if drel != 0:
                        u = (sgn * T - rel0) / drel
                        if 0 < u < 1:
                            out.add(float(j + u))
            j += 1
        return sorted((t for t in out if tau + 1e-9 < t <= t_exit + 1e-12), reverse=True)

    def valid(self, ep: Epoch, src: np.ndarray, t: float) -> bool:
        c = self.at(t)
        eps = max(self.tol.eta, 1e-9)
        for i in range(self.k):
            if not ep.cells[i] or not _in_cell(ep.cells[i][ep.current[i]], c[i], eps):
                return False
        for (i, j), dirs in ep.order.items():
            if not dirs & signed_directions(c[i], c[j], self.sep, self.tol):
                return False
        for i in range(self.k):
            if not contains_segment(self.f_rho.region, Segment(Point(*src[i]), Point(*c[i])), self.tol):
                return False
        for i, j in combinations(range(self.k), 2):
            d0 = src[i] - src[j]
            d1 = c[i] - c[j]
            if not relative_motions_clear(d0[0], d0[1], d1[0], d1[1], self.sep, self.tol):
                return False
        return True

    def run(self) -> list[np.ndarray]:
        tau = 0.0
        out = [self.arr[0].copy()]
        ep = self.new_epoch(0.0)
        guard = 0
        while tau < self.L - 1e-12:
            guard += 1
            if guard > 100 * (self.L + 1) * (self.k + 4):
                raise RuntimeError("shortcut failed to make progress")
            t_exit = self.exit_time(ep, tau)
            if t_exit <= tau + 1e-12:
                ep = self.new_epoch(tau)
                continue
            src = self.at(tau)
            lam = next((t for t in self.candidates(ep, tau, t_exit) if self.valid(ep, src, t)), None)
            if lam is None:
                # keep the original motion up to the next breakpoint or square exit
                lam = min(math.floor(tau + 1e-12) + 1.0, t_exit)
            out.append(self.at(lam))
            tau = lam
            if tau >= t_exit - 1e-12 and tau < self.L - 1e-12:
                ep = self.new_epoch(tau)
            else:
                self.refresh(ep, tau)
        return out


def shortcut(
    plan: Plan, f: FreeSpace, f_rho: FreeSpace, rho: float, tol: Tolerance = DEFAULT_TOL, *, max_passes: int = 20
) -> Plan:
    """Cost-non-increasing breakpoint reduction of a rho-robust plan.

    Each replacement leg is checked against the radius 1+rho free space and
    pair separation 2(1+rho), so the output stays rho-robust. Passes repeat
    while the breakpoint count drops; a pass that does not help is discarded.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    if abs(f_rho.radius - (f.radius + rho)) > 1e-12:
        raise ValueError(f"f_rho must be the radius {f.radius + rho} free space")
    bad = _robust_violations(plan, f_rho, 2.0 * f_rho.radius, tol)
    if bad:
        raise NotRobustError(bad, f_rho.radius)
    current = plan
    for _ in range(max_passes):
        if len(current.breakpoints) <= 2:
            break
        out = merge_collinear(_Shortcutter(current.array, f, f_rho, rho, tol).run())
        out[0], out[-1] = current.array[0], current.array[-1]
        if len(out) >= len(current.breakpoints):
            break
        current = Plan.from_configs(out)
    return current
