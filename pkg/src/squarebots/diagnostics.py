"""Free-space structure checks: far-point topology, corridors, parking, revolving areas, jiggle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from shapely.geometry import LineString

from .freespace import FreeSpace, Landmarks, local_component
from .geometry import (
    DEFAULT_TOL,
    Point,
    PolygonalRegion,
    Segment,
    Tolerance,
    contains_point,
    contains_segment,
    linf_dist,
    region_covers,
    square,
)
from .kinematics import motion_feasible
from .plan_model import Plan, cost


class PreconditionError(ValueError):
    def __init__(self, message: str, measurement: float | None = None):
        super().__init__(message)
        self.measurement = measurement


def _far_or_raise(lm: Landmarks, q, D: float, tol: Tolerance) -> float:
    d = float(lm.linf_to_nearest([q])[0])
    if d <= D + tol.eta:
        raise PreconditionError(f"{tuple(q)} is {D}-close (nearest landmark at l_inf {d})", d)
    return d


def far_topology_check(f: FreeSpace, lm: Landmarks, q: Sequence[float], D: float, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of distinct F edges that appear on the boundary of K(q, D/3)."""
    if not contains_point(f.region, q, tol):
        raise PreconditionError(f"{tuple(q)} is not in the free space")
    _far_or_raise(lm, q, D, tol)
    K = local_component(f, q, D / 3.0, tol)
    if K.is_empty:
        return 0
    rim = K.shape.boundary
    x0, y0, x1, y1 = K.bounds
    count = 0
    for ex0, ey0, ex1, ey1 in f.region.edges:
        if max(ex0, ex1) < x0 - tol.eta or min(ex0, ex1) > x1 + tol.eta:
            continue
        if max(ey0, ey1) < y0 - tol.eta or min(ey0, ey1) > y1 + tol.eta:
            continue
        seg = LineString([(ex0, ey0), (ex1, ey1)])
        if rim.intersection(seg.buffer(tol.eta, cap_style=2)).length > 10 * tol.eta:
            count += 1
    return count


@dataclass(frozen=True)
class Corridor:
    """Trapezoid of F between two facing blocker edges with axis-parallel portals.

    ``axis`` is "x" when the portals are vertical (the corridor runs along x).
    """

    blockers: tuple[Segment, Segment]
    portals: tuple[Segment, Segment]
    direction: Point
    bisector: Segment
    width: float
    depth: float
    axis: str = "x"

    def as_dict(self) -> dict:
        seg = lambda s: [[s.a.x, s.a.y], [s.b.x, s.b.y]]  # noqa: E731
        return {
            "axis": self.axis,
            "blockers": [seg(b) for b in self.blockers],
            "portals": [seg(p) for p in self.portals],
            "direction": [self.direction.x, self.direction.y],
            "bisector": seg(self.bisector),
            "width": self.width,
            "depth": self.depth,
        }


def _swap(p):
    return (p[1], p[0])


def _line_at(e, x):
    (x0, y0), (x1, y1) = e
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def _linear_window(xa, xb, g0, g1, lo, hi):
    """Sub-interval of [xa, xb] where the linear g (g0 at xa, g1 at xb) lies in (lo, hi]."""
    if g1 == g0:
        return (xa, xb) if lo < g0 <= hi else (1.0, 0.0)
    ta, tb = (lo - g0) / (g1 - g0), (hi - g0) / (g1 - g0)
    t0, t1 = max(0.0, min(ta, tb)), min(1.0, max(ta, tb))
    return xa + t0 * (xb - xa), xa + t1 * (xb - xa)


def _corridors_along_x(edges, vertices_x, inside_seg, landmarks_xy, eta):
    """Corridors with vertical portals, in a frame where the corridor runs along x."""
    lows, highs = [], []
    for x0, y0, x1, y1 in edges:
        dx, dy = x1 - x0, y1 - y0
        if abs(dx) <= eta or abs(dy) > abs(dx):
            continue
        # interior lies left of each edge: above when the edge runs in +x
        e = ((x0, y0), (x1, y1)) if dx > 0 else ((x1, y1), (x0, y0))
        (lows if dx > 0 else highs).append(e)
    found = []
    for lo in lows:
        for hi in highs:
            xa = max(lo[0][0], hi[0][0])
            xb = min(lo[1][0], hi[1][0])
            if xb - xa <= eta:
                continue
            g0 = _line_at(hi, xa) - _line_at(lo, xa)
            g1 = _line_at(hi, xb) - _line_at(lo, xb)
            lo_x, hi_x = _linear_window(xa, xb, g0, g1, eta, 2.0 + eta)
            if hi_x - lo_x <= eta:
                continue
            cuts = sorted({lo_x, hi_x, *(v for v in vertices_x if lo_x < v < hi_x)})
            good = [
                inside_seg(((m, _line_at(lo, m)), (m, _line_at(hi, m))))
                for m in ((u + v) / 2 for u, v in zip(cuts, cuts[1:]))
            ]
            runs = []
            for (u, v), ok in zip(zip(cuts, cuts[1:]), good):
                if not ok:
                    continue
                if runs and abs(runs[-1][1] - u) <= eta:
                    runs[-1][1] = v
                else:
                    runs.append([u, v])
            for u, v in runs:
                splits = sorted(
                    {
                        lx
                        for lx, ly in landmarks_xy
                        if u + eta < lx < v - eta and _line_at(lo, lx) - eta <= ly <= _line_at(hi, lx) + eta
                    }
                )
                bounds = [u, *splits, v]
                for s, t in zip(bounds, bounds[1:]):
                    if t - s > eta:
                        found.append((lo, hi, s, t))
    return found


def find_max_corridors(f: FreeSpace, lm: Landmarks, tol: Tolerance = DEFAULT_TOL) -> list[Corridor]:
    """Maximal corridors of F: width at most 2, no landmark inside, portals axis-parallel."""
    if f.is_empty:
        return []
    eta = tol.eta
    E = f.region.edges
    V = np.asarray(f.region.vertices, dtype=float).reshape(-1, 2)
    L = lm.array
    out = []
    for axis in ("x", "y"):
        if axis == "x":
            edges, vx, lmk = E, V[:, 0], [tuple(p) for p in L]
            conv = lambda p: Point(float(p[0]), float(p[1]))  # noqa: E731
        else:
            edges = E[:, [1, 0, 3, 2]]
            vx, lmk = V[:, 1], [_swap(p) for p in L]
            conv = lambda p: Point(float(p[1]), float(p[0]))  # noqa: E731
            # transposing flips orientation, so flip edges back to keep the interior on the left
            edges = edges[:, [2, 3, 0, 1]]

        def inside(seg, conv=conv):
            return contains_segment(f.region, Segment(conv(seg[0]), conv(seg[1])), tol)

        for lo, hi, s, t in _corridors_along_x(edges, vx, inside, lmk, eta):
            p_minus = Segment(conv((s, _line_at(lo, s))), conv((s, _line_at(hi, s))))
            p_plus = Segment(conv((t, _line_at(lo, t))), conv((t, _line_at(hi, t))))
            mid = lambda sg: Point((sg.a.x + sg.b.x) / 2, (sg.a.y + sg.b.y) / 2)  # noqa: E731
            bis = Segment(mid(p_minus), mid(p_plus))
            width = max(linf_dist(*p_minus), linf_dist(*p_plus))
            out.append(
                Corridor(
                    blockers=(Segment(conv(lo[0]), conv(lo[1])), Segment(conv(hi[0]), conv(hi[1]))),
                    portals=(p_minus, p_plus),
                    direction=conv((1.0, 0.0)),
                    bisector=bis,
                    width=width,
                    depth=linf_dist(*bis),
                    axis=axis,
                )
            )
    out.sort(key=lambda c: (c.axis, c.portals[0].a.x, c.portals[0].a.y))
    return out


def _along(c: Corridor, p: Point) -> float:
    return p.x if c.axis == "x" else p.y


def _section(c: Corridor, s: float) -> Segment:
    """Portal-parallel cut of the corridor at coordinate ``s`` along its axis."""
    lo, hi = c.blockers
    if c.axis == "x":
        y_lo = _line_at(((lo.a.x, lo.a.y), (lo.b.x, lo.b.y)), s)
        y_hi = _line_at(((hi.a.x, hi.a.y), (hi.b.x, hi.b.y)), s)
        return Segment(Point(s, y_lo), Point(s, y_hi))
    x_lo = _line_at(((lo.a.y, lo.a.x), (lo.b.y, lo.b.x)), s)
    x_hi = _line_at(((hi.a.y, hi.a.x), (hi.b.y, hi.b.x)), s)
    return Segment(Point(x_lo, s), Point(x_hi, s))


def corridor_sections(c: Corridor, r: float) -> tuple[Segment, Segment, PolygonalRegion]:
    """Cuts at l_inf distance r inside each portal and the r-sanctum between them."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if c.depth < 2 * r - 1e-12:
        raise PreconditionError(f"corridor depth {c.depth} is less than 2r = {2 * r}", c.depth)
    s0 = _along(c, c.portals[0].a) + r
    s1 = _along(c, c.portals[1].a) - r
    lo, hi = _section(c, s0), _section(c, s1)
    if s1 - s0 <= 1e-12:
        sanctum = PolygonalRegion.empty()
    else:
        sanctum = PolygonalRegion.from_rings([lo.a, hi.a, hi.b, lo.b])
    return lo, hi, sanctum


def _bisector_point(c: Corridor, s: float) -> Point:
    a, b = c.bisector
    u = (s - _along(c, a)) / (_along(c, b) - _along(c, a))
    return Point(a.x + u * (b.x - a.x), a.y + u * (b.y - a.y))


def parking_places(c: Corridor, k: int) -> tuple[list[Point], list[Point]]:
    """k bisector points per side on the 4-spaced grid, between depth 2 and 10k from each portal."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if c.depth < 20 * k - 1e-9:
        raise PreconditionError(f"corridor depth {c.depth} is less than 20k = {20 * k}", c.depth)
    s0 = _along(c, c.portals[0].a)
    s1 = _along(c, c.portals[1].a)
    near = [4.0 * i for i in range(math.ceil((s0 + 2) / 4 - 1e-12), math.floor((s0 + 10 * k) / 4 + 1e-12) + 1)]
    far = [4.0 * i for i in range(math.floor((s1 - 2) / 4 + 1e-12), math.ceil((s1 - 10 * k) / 4 - 1e-12) - 1, -1)]
    if len(near) < k or len(far) < k:
        raise PreconditionError("not enough grid lines in the parking window")
    return [_bisector_point(c, s) for s in near[:k]], [_bisector_point(c, s) for s in far[:k]]


def has_revolving_area(f: FreeSpace, p: Sequence[float], tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the unit square of placements around p lies in F."""
    if f.is_empty:
        return False
    return region_covers(f.region, square(p, 1.0), tol)


@dataclass
class WSRASet:
    centers: list[Point]
    far_distance: float = math.inf
    hypothesis_met: bool = True
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "centers": [[c.x, c.y] for c in self.centers],
            "far_distance": self.far_distance,
            "hypothesis_met": self.hypothesis_met,
            "notes": list(self.notes),
        }


def _in_corridor(c: Corridor, q) -> bool:
    s = _along(c, Point(*q))
    s0, s1 = _along(c, c.portals[0].a), _along(c, c.portals[1].a)
    if not s0 < s < s1:
        return False
    sec = _section(c, s)
    lo, hi = sorted(((sec.a.y, sec.b.y) if c.axis == "x" else (sec.a.x, sec.b.x)))
    v = q[1] if c.axis == "x" else q[0]
    return lo <= v <= hi


def wsra_centers(
    f: FreeSpace,
    lm: Landmarks,
    q: Sequence[float],
    j: int,
    tol: Tolerance = DEFAULT_TOL,
    corridors: Sequence[Corridor] | None = None,
) -> WSRASet:
    """j well-separated revolving areas inside K(q, 24j), nearest first, on the grid q + 4Z^2.

    Requires q to be 24j-far and outside every corridor; whether the stronger
    72j-far hypothesis holds is reported, not enforced.
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    if j == 0:
        return WSRASet([])
    if not contains_point(f.region, q, tol):
        raise PreconditionError(f"{tuple(q)} is not in the free space")
    d = _far_or_raise(lm, q, 24.0 * j, tol)
    for c in corridors if corridors is not None else find_max_corridors(f, lm, tol):
        if _in_corridor(c, q):
            raise PreconditionError(f"{tuple(q)} lies in a corridor")
    K = local_component(f, q, 24.0 * j, tol)
    n = 6 * j
    offs = [(a, b) for a in range(-n, n + 1) for b in range(-n, n + 1)]
    offs.sort(key=lambda o: (max(abs(o[0]), abs(o[1])), o[0] * o[0] + o[1] * o[1], o))
    centers = []
    for a, b in offs:
        p = Point(q[0] + 4.0 * a, q[1] + 4.0 * b)
        if contains_point(K, p, tol) and has_revolving_area(f, p, tol):
            centers.append(p)
            if len(centers) == j:
                break
    notes = [] if len(centers) >= j else [f"only {len(centers)} of {j} revolving areas found"]
    return WSRASet(centers, d, d > 72.0 * j + tol.eta, notes)


_CW_CORNERS = ((1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0))


def _rim_point(s: float) -> np.ndarray:
    """Point at clockwise arclength s on the unit square's boundary, from (1, 1)."""
    s = s % 8.0
    e = min(int(s // 2), 3)
    a, b = np.asarray(_CW_CORNERS[e]), np.asarray(_CW_CORNERS[(e + 1) % 4])
    return a + (s - 2 * e) / 2.0 * (b - a)


def _rim_edge(v) -> int:
    """Clockwise edge index (0 right, 1 bottom, 2 left, 3 top) by dominant axis."""
    if abs(v[0]) >= abs(v[1]):
        return 0 if v[0] > 0 else 2
    return 3 if v[1] > 0 else 1


def _rim_param(pt, e: int) -> float:
    x, y = pt
    local = (1 - y, 1 - x, 1 + y, 1 + x)[e]
    return 2 * e + min(max(local, 0.0), 2.0)


def jiggle_plan(
    p: Sequence[float], a: Sequence[float], b: Sequence[float], f: FreeSpace, tol: Tolerance = DEFAULT_TOL
) -> Plan:
    """Two-robot plan: robot 1 starts and ends at p, robot 2 moves a -> b around the revolving area at p.

    Robot 2 steps onto the rim of the revolving area, both robots circle it
    clockwise on opposite edges, then robot 2 steps out to b and robot 1
    returns to p.
    """
    P = np.asarray(p, dtype=float)
    A, B = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    for name, x in (("a", A), ("b", B)):
        d = float(np.abs(x - P).max())
        if abs(d - 2.0) > 10 * tol.eta:
            raise PreconditionError(f"{name} must lie at l_inf distance 2 from p, got {d}", d)
    if not has_revolving_area(f, P, tol):
        raise PreconditionError(f"no revolving area at {tuple(P)}")
    if np.array_equal(A, B):
        c = (Point(*P), Point(*A))
        return Plan((c, c))
    ra, rb = A - P, B - P
    e2, eb = _rim_edge(ra), _rim_edge(rb)
    a_rim, b_rim = np.clip(ra, -1, 1), np.clip(rb, -1, 1)
    s2, sb = _rim_param(a_rim, e2), _rim_param(b_rim, eb)
    e1 = (e2 + 2) % 4
    r1 = np.zeros(2)
    r2 = ra.copy()
    steps = [(r1.copy(), r2.copy())]

    def move(which, target):
        nonlocal r1, r2
        if which == 1:
            r1 = np.asarray(target, dtype=float)
        else:
            r2 = np.asarray(target, dtype=float)
        steps.append((r1.copy(), r2.copy()))

    move(1, _rim_point(2 * e1 + 1))
    move(2, a_rim)
    for _ in range(5):
        if e2 == eb and sb >= s2 - 1e-12:
            move(2, _rim_point(sb))
            break
        move(2, _CW_CORNERS[(e2 + 1) % 4])
        move(1, _CW_CORNERS[(e1 + 1) % 4])
        e2, e1 = (e2 + 1) % 4, (e1 + 1) % 4
        s2 = 2.0 * e2
    move(2, rb)
    move(1, np.zeros(2))
    configs = []
    for x1, x2 in steps:
        c = (Point(*(P + x1)), Point(*(P + x2)))
        if not configs or c != configs[-1]:
            configs.append(c)
    configs[0] = (Point(*P), Point(*A))
    configs[-1] = (Point(*P), Point(*B))
    plan = Plan(tuple(configs))
    for u, v in plan.legs():
        if not motion_feasible(u, v, f, tol):
            raise PreconditionError("the workspace around a or b blocks the maneuver")
    c = cost(plan)
    if c > 22.0 + 1e-9:
        raise RuntimeError(f"jiggle cost {c} exceeds 22")
    return plan


def far_topology_sweep(
    f: FreeSpace, lm: Landmarks, D: float, samples: int = 1000, seed: int = 0, tol: Tolerance = DEFAULT_TOL
) -> dict:
    """Run far_topology_check on random D-far points of F; report the count histogram."""
    rng = np.random.default_rng(seed)
    if f.is_empty:
        return {"D": D, "checked": 0, "max_edges": 0, "histogram": {}, "violations": []}
    x0, y0, x1, y1 = f.region.bounds
    hist: dict[int, int] = {}
    bad = []
    checked = tries = 0
    while checked < samples and tries < 200 * samples:
        tries += 1
        q = (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        if not contains_point(f.region, q, tol) or lm.linf_to_nearest([q])[0] <= D + tol.eta:
            continue
        n = far_topology_check(f, lm, q, D, tol)
        hist[n] = hist.get(n, 0) + 1
        if n > 2:
            bad.append(list(q))
        checked += 1
    return {
        "D": D,
        "checked": checked,
        "max_edges": max(hist, default=0),
        "histogram": {str(k): v for k, v in sorted(hist.items())},
        "violations": bad,
    }
