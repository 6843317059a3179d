import pytest
from shapely.geometry import box
from shapely.ops import unary_union

from squarebots.freespace import erode, landmarks
from squarebots.geometry import PolygonalRegion


def room(w, h=None):
    h = w if h is None else h
    return PolygonalRegion.from_rings([(0, 0), (w, 0), (w, h), (0, h)])


def room_with_hole(w=10, hole=(4, 4, 6, 6)):
    x0, y0, x1, y1 = hole
    return PolygonalRegion.from_rings([(0, 0), (w, 0), (w, w), (0, w)], [[(x0, y0), (x1, y0), (x1, y1), (x0, y1)]])


def l_shape():
    return PolygonalRegion.from_rings([(0, 0), (20, 0), (20, 4), (10, 4), (10, 10), (0, 10)])


def dumbbell(length=20.0, width=1.0):
    """Two 12x12 workspace rooms; the passage between them is ``width`` wide and ``length`` long in F."""
    h = (width + 2) / 2
    a = 12 + length - 2
    return PolygonalRegion.from_rings(
        [(0, 0), (12, 0), (12, 6 - h), (a, 6 - h), (a, 0), (a + 12, 0), (a + 12, 12), (a, 12),
         (a, 6 + h), (12, 6 + h), (12, 12), (0, 12)]
    )


def comb():
    teeth = [box(2 + 6 * i, 4, 5 + 6 * i, 12) for i in range(5)]
    return PolygonalRegion.from_shapely(unary_union([box(0, 0, 30, 4), *teeth]))


def strip(length=12, height=3):
    return room(length, height)


def lm_of(env, starts=(), targets=()):
    return landmarks(erode(env, 1.0), erode(env, 2.0), starts, targets)


@pytest.fixture
def square_room():
    return room(20)


def robust_walk(rng, env, k, rho, steps, step=1.5, tries=200):
    """Random walk of joint configurations whose every leg is clear at radius 1 + rho."""
    import numpy as np

    from squarebots.plan_model import Plan, verify

    r = 1.0 + rho
    x0, y0, x1, y1 = env.bounds
    for _ in range(tries):
        c = rng.uniform((x0 + r, y0 + r), (x1 - r, y1 - r), (k, 2))
        if verify(Plan.from_configs([c]), env, r).feasible:
            break
    else:
        raise RuntimeError("no robust start found")
    pts = [c]
    while len(pts) <= steps:
        nxt = pts[-1] + rng.uniform(-step, step, (k, 2))
        if verify(Plan.from_configs([pts[-1], nxt]), env, r).feasible:
            pts.append(nxt)
    return Plan.from_configs(pts)
