"""Configuration and straight-line joint-motion feasibility, order types."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .freespace import FreeSpace
from .geometry import (
    DEFAULT_TOL,
    Point,
    Segment,
    Tolerance,
    contains_point,
    contains_segment,
    linf_dist,
    segment_avoids_open_square,
)

Configuration = tuple[Point, ...]


def as_config(placements: Sequence[Sequence[float]]) -> Configuration:
    return tuple(Point(float(p[0]), float(p[1])) for p in placements)


def separation(f: FreeSpace) -> float:
    """Center l_inf distance at which two robots of the free space's radius touch."""
    return 2.0 * f.radius


def pairs_separated(c: Configuration, sep: float = 2.0, tol: Tolerance = DEFAULT_TOL) -> bool:
    return all(linf_dist(p, q) >= sep - tol.eta for p, q in combinations(c, 2))


def config_feasible(c: Configuration, f: FreeSpace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """All placements in F and pairwise l_inf separation at least 2 (touching allowed)."""
    return all(contains_point(f.region, p, tol) for p in c) and pairs_separated(c, separation(f), tol)


@dataclass(frozen=True)
class OrderType:
    """Per unordered pair (i, j), i < j, the axes along which the pair is separated."""

    pair_directions: dict

    def __getitem__(self, pair):
        return self.pair_directions[pair]

    def __eq__(self, other):
        return isinstance(other, OrderType) and self.pair_directions == other.pair_directions

    def __hash__(self):
        return hash(tuple(sorted(self.pair_directions.items())))


def order_types(c: Configuration, sep: float = 2.0, tol: Tolerance = DEFAULT_TOL) -> OrderType:
    out = {}
    for i, j in combinations(range(len(c)), 2):
        dirs = set()
        if abs(c[i].x - c[j].x) >= sep - tol.eta:
            dirs.add("x")
        if abs(c[i].y - c[j].y) >= sep - tol.eta:
            dirs.add("y")
        if not dirs:
            raise ValueError(f"robots {i} and {j} overlap; configuration is infeasible")
        out[(i, j)] = frozenset(dirs)
    return OrderType(out)


def signed_directions(p: Sequence[float], q: Sequence[float], sep: float = 2.0, tol: Tolerance = DEFAULT_TOL) -> frozenset:
    """Axis/sign pairs (axis, s) with s * (q - p) along axis >= sep."""
    out = set()
    for axis, d in (("x", q[0] - p[0]), ("y", q[1] - p[1])):
        if d >= sep - tol.eta:
            out.add((axis, 1))
        if -d >= sep - tol.eta:
            out.add((axis, -1))
    return frozenset(out)


def same_order_type(a: Configuration, b: Configuration, sep: float = 2.0, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Every pair keeps a common separating axis with the same sign at both configurations."""
    for i, j in combinations(range(len(a)), 2):
        if not signed_directions(a[i], a[j], sep, tol) & signed_directions(b[i], b[j], sep, tol):
            return False
    return True


def motion_feasible(a: Configuration, b: Configuration, f: FreeSpace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Exact test that the straight joint motion a -> b stays in the joint free space.

    Each robot's segment must lie in F, and for each pair the relative
    displacement (a_i - a_j) -> (b_i - b_j) must avoid the open square of
    radius 2 at the origin.
    """
    if len(a) != len(b):
        raise ValueError("configurations have different robot counts")
    for p, q in zip(a, b):
        if not contains_segment(f.region, Segment(p, q), tol):
            return False
    sep = separation(f)
    for i, j in combinations(range(len(a)), 2):
        d0 = Point(a[i].x - a[j].x, a[i].y - a[j].y)
        d1 = Point(b[i].x - b[j].x, b[i].y - b[j].y)
        if not segment_avoids_open_square(Segment(d0, d1), (0.0, 0.0), sep, tol):
            return False
    return True


def geodesic_condition(a: Configuration, b: Configuration, f: FreeSpace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Sufficient condition for the straight joint motion to be feasible.

    Each robot's segment lies in F and both endpoints share a signed order type.
    """
    if not same_order_type(a, b, separation(f), tol):
        return False
    return all(contains_segment(f.region, Segment(p, q), tol) for p, q in zip(a, b))
