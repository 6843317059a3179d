"""Brute-force reference oracles used to validate the planner.

Nothing here imports the rest of the package: every predicate is re-derived
with its own formula (separating axes, candidate-time minimization, raster
sweeps) so that agreement with the main code path means something.
Environments are duck-typed: anything with ``faces`` of (outer, holes) rings.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import product

import numpy as np


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class RasterMask:
    origin: tuple[float, float]
    pitch: float
    free: np.ndarray  # (ny, nx) bool, row j / column i -> cell center origin + (i+.5, j+.5) * pitch

    def centers(self) -> np.ndarray:
        ny, nx = self.free.shape
        xs = self.origin[0] + (np.arange(nx) + 0.5) * self.pitch
        ys = self.origin[1] + (np.arange(ny) + 0.5) * self.pitch
        gx, gy = np.meshgrid(xs, ys)
        return np.stack([gx.ravel(), gy.ravel()], axis=1)


def _env_edges(env) -> np.ndarray:
    rows = []
    for outer, holes in env.faces:
        for ring in (outer, *holes):
            n = len(ring)
            for i in range(n):
                rows.append((ring[i][0], ring[i][1], ring[(i + 1) % n][0], ring[(i + 1) % n][1]))
    return np.asarray(rows, dtype=float).reshape(-1, 4)


def _inside(edges: np.ndarray, px, py, eps=1e-9) -> np.ndarray:
    """Winding-number containment, closed (points within eps of an edge count)."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    wn = np.zeros(px.shape, dtype=int)
    on = np.zeros(px.shape, dtype=bool)
    for x1, y1, x2, y2 in edges:
        side = (x2 - x1) * (py - y1) - (px - x1) * (y2 - y1)
        up = (y1 <= py) & (y2 > py) & (side > 0)
        down = (y1 > py) & (y2 <= py) & (side < 0)
        wn += up.astype(int) - down.astype(int)
        ll = math.hypot(x2 - x1, y2 - y1)
        if ll == 0:
            on |= np.hypot(px - x1, py - y1) <= eps
            continue
        t = ((px - x1) * (x2 - x1) + (py - y1) * (y2 - y1)) / (ll * ll)
        on |= (np.abs(side) / ll <= eps) & (t >= -eps / ll) & (t <= 1 + eps / ll)
    return (wn != 0) | on


def _edge_hits_open_box(x1, y1, x2, y2, cx, cy, r, eps=1e-9):
    """Separating-axis test: does segment (x1,y1)-(x2,y2) meet the open box B(c, r)?"""
    rr = r - eps
    # axis x and axis y
    sep = (np.maximum(x1, x2) <= cx - rr) | (np.minimum(x1, x2) >= cx + rr)
    sep |= (np.maximum(y1, y2) <= cy - rr) | (np.minimum(y1, y2) >= cy + rr)
    # segment normal
    nx, ny = -(y2 - y1), (x2 - x1)
    d = nx * (cx - x1) + ny * (cy - y1)
    ext = rr * (abs(nx) + abs(ny))
    sep |= np.abs(d) >= ext
    return ~sep


def raster_erode(env, r: float, pitch: float) -> RasterMask:
    """Cell free iff the closed r-square at its center lies inside the environment."""
    if not pitch > 0:
        raise ValueError("pitch must be > 0")
    edges = _env_edges(env)
    xs_all = np.concatenate([edges[:, 0], edges[:, 2]])
    ys_all = np.concatenate([edges[:, 1], edges[:, 3]])
    x0, y0 = float(xs_all.min()), float(ys_all.min())
    nx = int(math.ceil((xs_all.max() - x0) / pitch))
    ny = int(math.ceil((ys_all.max() - y0) / pitch))
    cx = x0 + (np.arange(nx) + 0.5) * pitch
    cy = y0 + (np.arange(ny) + 0.5) * pitch
    gx, gy = np.meshgrid(cx, cy)
    free = np.ones(gx.shape, dtype=bool)
    for sx, sy in ((-r, -r), (r, -r), (r, r), (-r, r)):
        free &= _inside(edges, gx + sx, gy + sy)
    for x1, y1, x2, y2 in edges:
        free &= ~_edge_hits_open_box(x1, y1, x2, y2, gx, gy, r)
    return RasterMask((x0, y0), pitch, free)


def _linf_to_segment(px, py, x1, y1, x2, y2) -> float:
    """l_inf distance from a point to a segment by candidate-time minimization."""
    dx, dy = x2 - x1, y2 - y1
    ax, ay = x1 - px, y1 - py
    cands = [0.0, 1.0]
    for num, den in ((-ax, dx), (-ay, dy), (-(ax - ay), dx - dy), (-(ax + ay), dx + dy)):
        if den != 0:
            t = num / den
            if 0 < t < 1:
                cands.append(t)
    return min(max(abs(ax + t * dx), abs(ay + t * dy)) for t in cands)


def _min_linf_on_motion(d0x, d0y, d1x, d1y) -> tuple[float, float]:
    """Minimum over t in [0,1] of ||d0 + t (d1 - d0)||_inf and the minimizing t."""
    dx, dy = d1x - d0x, d1y - d0y
    cands = [0.0, 1.0]
    for num, den in ((-d0x, dx), (-d0y, dy), (-(d0x - d0y), dx - dy), (-(d0x + d0y), dx + dy)):
        if den != 0:
            t = num / den
            if 0 < t < 1:
                cands.append(t)
    return min((max(abs(d0x + t * dx), abs(d0y + t * dy)), t) for t in cands)


def workspace_clearance(env, p) -> float:
    """Signed l_inf distance from p to the environment boundary (negative outside)."""
    edges = _env_edges(env)
    d = min(_linf_to_segment(p[0], p[1], *e) for e in edges)
    inside = bool(_inside(edges, np.array([p[0]]), np.array([p[1]]), eps=0.0)[0])
    return d if inside else -d


def sampled_motion_check(a, b, env, radius: float = 1.0, samples: int = 10_000) -> tuple[float, float]:
    """Minimum workspace clearance and pairwise l_inf separation over sampled times."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    A = np.asarray(a, dtype=float).reshape(-1, 2)
    B = np.asarray(b, dtype=float).reshape(-1, 2)
    ts = np.linspace(0.0, 1.0, samples)
    pos = A[None] + ts[:, None, None] * (B - A)[None]  # (T, k, 2)
    edges = _env_edges(env)
    k = len(A)
    min_clear = math.inf
    for i in range(k):
        px, py = pos[:, i, 0], pos[:, i, 1]
        d = np.full(samples, np.inf)
        for x1, y1, x2, y2 in edges:
            d = np.minimum(d, _linf_to_segment_vec(px, py, x1, y1, x2, y2))
        inside = _inside(edges, px, py, eps=0.0)
        signed = np.where(inside, d, -d)
        min_clear = min(min_clear, float(signed.min()))
    min_sep = math.inf
    for i in range(k):
        for j in range(i + 1, k):
            s = np.abs(pos[:, i] - pos[:, j]).max(axis=1)
            min_sep = min(min_sep, float(s.min()))
    return min_clear, min_sep


def _linf_to_segment_vec(px, py, x1, y1, x2, y2) -> np.ndarray:
    dx, dy = x2 - x1, y2 - y1
    ax, ay = x1 - px, y1 - py
    best = np.maximum(np.abs(ax), np.abs(ay))
    best = np.minimum(best, np.maximum(np.abs(ax + dx), np.abs(ay + dy)))
    for num, den in ((-ax, dx), (-ay, dy), (-(ax - ay), dx - dy), (-(ax + ay), dx + dy)):
        if den == 0:
            continue
        t = np.clip(num / den, 0.0, 1.0)
        best = np.minimum(best, np.maximum(np.abs(ax + t * dx), np.abs(ay + t * dy)))
    return best


def _swept_square_free(edges, p, q, r=1.0, eps=1e-9) -> bool:
    """Whether the r-square swept from p to q stays inside the environment.

    The sweep is the convex hull of the two end squares; it is inside iff its
    corners are inside and no environment edge meets its interior (SAT).
    """
    corners = [(p[0] + sx, p[1] + sy) for sx, sy in ((-r, -r), (r, -r), (r, r), (-r, r))]
    corners += [(q[0] + sx, q[1] + sy) for sx, sy in ((-r, -r), (r, -r), (r, r), (-r, r))]
    hull = _convex_hull(corners)
    cx = np.array([c[0] for c in hull])
    cy = np.array([c[1] for c in hull])
    if not _inside(edges, cx, cy).all():
        return False
    m = len(hull)
    axes = [(-(hull[(i + 1) % m][1] - hull[i][1]), hull[(i + 1) % m][0] - hull[i][0]) for i in range(m)]
    for x1, y1, x2, y2 in edges:
        sep = False
        for ax, ay in axes + [(-(y2 - y1), x2 - x1)]:
            n = math.hypot(ax, ay)
            if n == 0:
                continue
            ph = [(hx * ax + hy * ay) / n for hx, hy in hull]
            ps = [(x1 * ax + y1 * ay) / n, (x2 * ax + y2 * ay) / n]
            if max(ps) <= min(ph) + eps or min(ps) >= max(ph) - eps:
                sep = True
                break
        if not sep:
            return False
    return True


def _convex_hull(pts):
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


_MOVES = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]


def product_grid_optimum(env, starts, targets, pitch: float, max_states: int = 2_000_000):
    """Min-sum cost over the product of 8-connected per-robot lattices (pitch * Z^2).

    Every step moves all robots simultaneously by at most one lattice step and
    is checked exactly (swept squares inside the environment, relative motion
    never closer than 2 in l_inf). Returns the cost, or None if unreachable.
    """
    k = len(starts)
    if k > 2:
        raise ValueError("product grid oracle supports k <= 2")
    edges = _env_edges(env)
    xs_all = np.concatenate([edges[:, 0], edges[:, 2]])
    ys_all = np.concatenate([edges[:, 1], edges[:, 3]])
    i0, i1 = math.ceil(xs_all.min() / pitch - 1e-9), math.floor(xs_all.max() / pitch + 1e-9)
    j0, j1 = math.ceil(ys_all.min() / pitch - 1e-9), math.floor(ys_all.max() / pitch + 1e-9)
    if i1 - i0 > 40 or j1 - j0 > 40:
        raise ValueError("grid larger than 40x40 cells per robot")

    def lattice(p):
        i, j = p[0] / pitch, p[1] / pitch
        if abs(i - round(i)) > 1e-9 or abs(j - round(j)) > 1e-9:
            raise ValueError(f"{p} is not a lattice point at pitch {pitch}")
        return int(round(i)), int(round(j))

    s = tuple(lattice(p) for p in starts)
    t = tuple(lattice(p) for p in targets)
    free = {}
    for i in range(i0, i1 + 1):
        for j in range(j0, j1 + 1):
            x, y = i * pitch, j * pitch
            pts_x = np.array([x - 1, x + 1, x + 1, x - 1])
            pts_y = np.array([y - 1, y - 1, y + 1, y + 1])
            ok = bool(_inside(edges, pts_x, pts_y).all())
            if ok:
                ok = not any(bool(_edge_hits_open_box(*e, x, y, 1.0)) for e in edges)
            free[(i, j)] = ok
    step_ok: dict = {}

    def move_ok(u, v):
        key = (u, v)
        if key not in step_ok:
            step_ok[key] = u == v or _swept_square_free(edges, (u[0] * pitch, u[1] * pitch), (v[0] * pitch, v[1] * pitch))
        return step_ok[key]

    def octile(u, v):
        dx, dy = abs(u[0] - v[0]), abs(u[1] - v[1])
        return pitch * (max(dx, dy) + (math.sqrt(2) - 1) * min(dx, dy))

    def h(state):
        return sum(octile(u, v) for u, v in zip(state, t))

    def sep_ok(a, b):
        if k < 2:
            return True
        d0 = ((a[0][0] - a[1][0]) * pitch, (a[0][1] - a[1][1]) * pitch)
        d1 = ((b[0][0] - b[1][0]) * pitch, (b[0][1] - b[1][1]) * pitch)
        return _min_linf_on_motion(d0[0], d0[1], d1[0], d1[1])[0] >= 2 - 1e-9

    for u in s + t:
        if not free.get(u, False):
            raise ValueError("start or target placement is not free")
    if not sep_ok(s, s) or not sep_ok(t, t):
        raise ValueError("start or target configuration is not feasible")
    dist = {s: 0.0}
    heap = [(h(s), 0.0, s)]
    done = set()
    while heap:
        _, g, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == t:
            return g
        done.add(u)
        if len(done) > max_states:
            raise OracleBudgetExceeded(f"explored more than {max_states} states")
        for steps in product(_MOVES, repeat=k):
            v = tuple((p[0] + d[0], p[1] + d[1]) for p, d in zip(u, steps))
            if v in done or not all(free.get(p, False) for p in v):
                continue
            if not all(move_ok(p, q) for p, q in zip(u, v)) or not sep_ok(u, v):
                continue
            w = sum(pitch * math.hypot(*d) for d in steps)
            ng = g + w
            if ng < dist.get(v, math.inf) - 1e-12:
                dist[v] = ng
                heapq.heappush(heap, (ng + h(v), ng, v))
    return None
