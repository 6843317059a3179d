import numpy as np
import pytest
from conftest import comb, dumbbell, l_shape, lm_of, room, room_with_hole
from shapely.geometry import box

from squarebots.freespace import Landmarks, conditional_freespace, erode, is_close, landmarks, local_component
from squarebots.geometry import (
    Point,
    PolygonalRegion,
    boundary_distance,
    contains_point,
    contains_points,
    region_covers,
    square,
)
from squarebots.oracles import raster_erode


def test_erode_convex_room():
    f = erode(room(10), 1)
    assert set(f.vertices) == {(1, 1), (9, 1), (9, 9), (1, 9)}


def test_erode_hole_dilates():
    f = erode(room_with_hole(), 1)
    assert len(f.vertices) == 8
    assert not contains_point(f.region, (5, 5))
    assert contains_point(f.region, (3, 3))
    assert not contains_point(f.region, (3.5, 5))


def test_erode_l_shape_matches_raster():
    env = l_shape()
    f = erode(env, 1)
    mask = raster_erode(env, 1, 0.05)
    got = contains_points(f.region, mask.centers())
    assert (got == mask.free.ravel()).mean() >= 0.999


def test_erode_can_be_empty():
    f = erode(room(3), 2)
    assert f.is_empty
    assert not contains_point(f.region, (1.5, 1.5))


def test_erode_rejects_bad_radius():
    with pytest.raises(ValueError):
        erode(room(10), 0)


@pytest.mark.parametrize("env", [room_with_hole(), l_shape(), comb(), dumbbell()])
def test_erosion_monotone_in_radius(env):
    pts = np.random.default_rng(0).uniform(-1, 45, (1000, 2))
    inner = contains_points(erode(env, 2).region, pts)
    outer = contains_points(erode(env, 1).region, pts)
    assert not (inner & ~outer).any()


@pytest.mark.parametrize("env", [room_with_hole(), l_shape(), comb()])
def test_erosion_matches_square_containment(env):
    rng = np.random.default_rng(1)
    x0, y0, x1, y1 = env.bounds
    pts = rng.uniform([x0, y0], [x1, y1], (10_000, 2))
    f = erode(env, 1.0)
    # stay out of the tolerance band along the free-space boundary
    pts = pts[boundary_distance(f.region, pts) > 1e-6] if not f.is_empty else pts
    got = contains_points(f.region, pts)
    shape = env.shape
    want = np.array([shape.covers(box(x - 1, y - 1, x + 1, y + 1)) for x, y in pts])
    assert (got == want).all()


def test_landmarks_corners_and_endpoints():
    env = room(10)
    # (2,2) and (8,8) are corners of the radius-2 free space, so they merge
    lm = lm_of(env, [(2, 2)], [(8, 8)])
    assert len(lm) == 8
    assert {(2.0, 2.0), (8.0, 8.0), (1.0, 1.0), (9.0, 9.0)} <= set(lm.points)
    lm = lm_of(env, [(3, 2)], [(8, 7)])
    assert len(lm) == 10


def test_landmarks_dedup_endpoint_on_vertex():
    # (1,1) is already a corner of the radius-1 free space
    lm = lm_of(room(10), [(1, 1)], [(1, 1)])
    assert len(lm) == 8


def test_landmarks_with_hole_count():
    env = room_with_hole(20, (8, 8, 12, 12))
    f1, f2 = erode(env, 1), erode(env, 2)
    lm = landmarks(f1, f2, [(3, 3)], [(17, 17)])
    assert len(lm) == len(f1.vertices) + len(f2.vertices) + 2


def test_landmarks_reject_infeasible_start():
    with pytest.raises(ValueError):
        lm_of(room(10), [(0.5, 5)], [(5, 5)])


def test_landmarks_contain_endpoints():
    rng = np.random.default_rng(2)
    env = room_with_hole()
    for _ in range(10):
        s, t = rng.uniform(1, 3, 2), rng.uniform(7, 9, 2)
        lm = lm_of(env, [tuple(s)], [tuple(t)])
        assert tuple(s) in lm.points and tuple(t) in lm.points


def test_empty_f2_adds_nothing():
    env = room(3.5)
    lm = lm_of(env)
    assert erode(env, 2).is_empty
    assert len(lm) == 4


def test_is_close_examples():
    lm = Landmarks((Point(0, 0),))
    assert is_close((3, 4), lm, 4)
    assert not is_close((3, 4), lm, 3.9)
    assert is_close((0, 0), lm, 0)


def test_local_component_interior():
    f = erode(room(102), 1)
    k = local_component(f, (50, 50), 10)
    assert set(k.vertices) == {(40, 40), (60, 40), (60, 60), (40, 60)}


def test_local_component_keeps_only_the_piece_with_q():
    # two rooms linked far above the clipping box
    outer = [(0, 0), (10, 0), (10, 10), (6, 10), (6, 30), (17, 30), (17, 10), (14, 10), (14, 0), (24, 0),
             (24, 10), (20, 10), (20, 33), (3, 33), (3, 10), (0, 10)]
    env = PolygonalRegion.from_rings(outer)
    f = erode(env, 1)
    k = local_component(f, (5, 2), 19)
    assert contains_point(k, (5, 5))
    assert not contains_point(k, (20, 5))
    assert region_covers(f.region, k)
    assert region_covers(square((5, 2), 19), k)
    assert len(k.faces) == 1


def test_local_component_rejects_outside_point():
    with pytest.raises(ValueError):
        local_component(erode(room(10), 1), (0.5, 0.5), 2)


def test_conditional_freespace():
    f = erode(room(12), 1)
    assert conditional_freespace(f, []) == f.region
    g = conditional_freespace(f, [(5, 5)])
    assert not contains_point(g, (5, 5))
    assert not contains_point(g, (6.5, 6.5))
    assert contains_point(g, (7, 7))
    assert contains_point(g, (3, 3))


def test_conditional_freespace_two_parked_against_raster():
    f = erode(room(12), 1)
    g = conditional_freespace(f, [(3, 3), (7, 7)])
    xs = np.arange(0.025, 12, 0.05)
    gx, gy = np.meshgrid(xs, xs)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    want = (
        (pts >= 1).all(axis=1)
        & (pts <= 11).all(axis=1)
        & (np.abs(pts - [3, 3]).max(axis=1) >= 2)
        & (np.abs(pts - [7, 7]).max(axis=1) >= 2)
    )
    assert (contains_points(g, pts) == want).mean() >= 0.999
