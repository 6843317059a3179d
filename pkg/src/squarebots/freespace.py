"""Eroded free spaces, landmarks, local components and conditional free space."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from shapely.geometry import MultiPoint, box
from shapely.ops import unary_union

from .geometry import (
    DEFAULT_TOL,
    Point,
    PolygonalEnvironment,
    PolygonalRegion,
    Tolerance,
    contains_point,
)


@dataclass(frozen=True)
class FreeSpace:
    radius: float
    region: PolygonalRegion

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self.region.vertices

    @property
    def is_empty(self) -> bool:
        return self.region.is_empty


@dataclass(frozen=True)
class Landmarks:
    points: tuple[Point, ...]

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.points)

    def linf_to_nearest(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(self.points) == 0:
            return np.full(len(pts), np.inf)
        d = np.abs(pts[:, None, :] - self.array[None, :, :]).max(axis=2)
        return d.min(axis=1)


@lru_cache(maxsize=64)
def erode(workspace: PolygonalEnvironment, r: float) -> FreeSpace:
    """Placements whose closed r-square fits inside the workspace.

    Each boundary edge swept by the square is a convex hexagon (the hull of the
    edge's endpoints shifted to the four square corners); the free space is the
    workspace minus the union of those hexagons. Empty results are legal.
    """
    if not r > 0:
        raise ValueError(f"erosion radius must be > 0, got {r}")
    if workspace.is_empty:
        return FreeSpace(r, PolygonalRegion.empty())
    corners = ((-r, -r), (r, -r), (r, r), (-r, r))
    sweeps = []
    for x1, y1, x2, y2 in workspace.edges:
        pts = [(x1 + cx, y1 + cy) for cx, cy in corners] + [(x2 + cx, y2 + cy) for cx, cy in corners]
        sweeps.append(MultiPoint(pts).convex_hull)
    free = workspace.shape.difference(unary_union(sweeps))
    return FreeSpace(r, PolygonalRegion.from_shapely(free))


def landmarks(
    f1: FreeSpace,
    f2: FreeSpace,
    starts: Sequence[Sequence[float]] = (),
    targets: Sequence[Sequence[float]] = (),
    tol: Tolerance = DEFAULT_TOL,
) -> Landmarks:
    """Vertices of F^(1) and F^(2) plus all start and target placements, deduplicated."""
    if f1.radius != 1 or f2.radius != 2:
        raise ValueError("landmarks need the radius-1 and radius-2 free spaces")
    for p in (*starts, *targets):
        if not contains_point(f1.region, p, tol):
            raise ValueError(f"placement {tuple(p)} is outside the free space")
    merge = 10 * tol.eta
    kept: list[Point] = []
    for p in (*f1.vertices, *f2.vertices, *starts, *targets):
        p = Point(float(p[0]), float(p[1]))
        if any(abs(p.x - q.x) <= merge and abs(p.y - q.y) <= merge for q in kept):
            continue
        kept.append(p)
    return Landmarks(tuple(kept))


def is_close(p: Sequence[float], lm: Landmarks, D: float, tol: Tolerance = DEFAULT_TOL) -> bool:
    if D < 0:
        raise ValueError("D must be >= 0")
    return bool(lm.linf_to_nearest([p])[0] <= D + tol.eta)


def _component_containing(geom, q, tol: Tolerance):
    from shapely.geometry import Point as SPoint

    from .geometry import _polygons_of

    qp = SPoint(q[0], q[1])
    polys = _polygons_of(geom)
    if not polys:
        return None
    best = min(polys, key=lambda g: g.distance(qp))
    if best.distance(qp) > max(tol.eta, 1e-12):
        return None
    return best


def local_component(f: FreeSpace, q: Sequence[float], r: float, tol: Tolerance = DEFAULT_TOL) -> PolygonalRegion:
    """K(q, r): the component of B(q, r) intersected with F that contains q."""
    if not contains_point(f.region, q, tol):
        raise ValueError(f"{tuple(q)} is not in the free space")
    clip = f.region.shape.intersection(box(q[0] - r, q[1] - r, q[0] + r, q[1] + r))
    comp = _component_containing(clip, q, tol)
    if comp is None:
        # q sits on a zero-area sliver of F
        return PolygonalRegion.empty()
    return PolygonalRegion.from_shapely(comp)


def conditional_freespace(f: FreeSpace, parked: Sequence[Sequence[float]]) -> PolygonalRegion:
    """F[P]: F minus the open radius-2 squares around parked placements."""
    if not parked:
        return f.region
    blocks = unary_union([box(p[0] - 2, p[1] - 2, p[0] + 2, p[1] + 2) for p in parked])
    return PolygonalRegion.from_shapely(f.region.shape.difference(blocks))
