"""The eleven acceptance criteria, one test each, each printing a PASS/FAIL line."""
import contextlib
import itertools
import math
import time

import numpy as np
import pytest
from conftest import comb, dumbbell, l_shape, lm_of, robust_walk, room, room_with_hole

from squarebots.cli import main
from squarebots.diagnostics import (
    far_topology_sweep,
    find_max_corridors,
    has_revolving_area,
    jiggle_plan,
    parking_places,
    wsra_centers,
)
from squarebots.freespace import erode
from squarebots.geometry import Segment, contains_points, linf_dist, segment_exit_param
from squarebots.io import write_environment
from squarebots.kinematics import as_config, config_feasible, geodesic_condition, motion_feasible
from squarebots.oracles import product_grid_optimum, raster_erode, sampled_motion_check
from squarebots.plan_model import breakpoint_budget, cost, verify
from squarebots.planner import build_graph, plan
from squarebots.sampling import derive_params
from squarebots.simplify import shortcut


class _Record:
    detail = ""


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def run(n, title, limit=None):
        rec = _Record()
        t0 = time.perf_counter()
        ok = False
        try:
            yield rec
            ok = True
        finally:
            dt = time.perf_counter() - t0
            if ok and limit is not None and dt > limit:
                ok = False
                rec.detail += f" (took {dt:.1f}s, limit {limit}s)"
            with capsys.disabled():
                print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'} {title}: {rec.detail} [{dt:.1f}s]")
        assert ok, f"criterion {n} exceeded its {limit}s limit"

    return run


ENVIRONMENTS = {
    "convex": lambda: room(20, 14),
    "hole": lambda: room_with_hole(20, (8, 7, 12, 12)),
    "l_shape": l_shape,
    "dumbbell": dumbbell,
    "comb": comb,
}


@pytest.mark.parametrize("name", list(ENVIRONMENTS))
def test_1_erosion_matches_raster(name, criterion):
    with criterion(1, f"erosion vs raster ({name})", limit=5) as rec:
        env = ENVIRONMENTS[name]()
        f = erode(env, 1.0)
        mask = raster_erode(env, 1.0, 0.05)
        got = contains_points(f.region, mask.centers())
        agree = float((got == mask.free.ravel()).mean())
        rec.detail = f"agreement {agree:.5f}"
        assert agree >= 0.999
        if name == "convex":
            assert set(f.region.vertices) == {(1, 1), (19, 1), (19, 13), (1, 13)}


def test_2_single_robot_near_optimal(criterion):
    with criterion(2, "single robot in [0,20]^2", limit=10) as rec:
        res = plan(room(20), [(2, 2)], [(18, 18)], derive_params(1, 0.5))
        opt = 16 * math.sqrt(2)
        rec.detail = f"cost {res.cost:.9f}, optimum {opt:.9f}"
        assert res.found
        assert res.cost <= 1.5 * opt + 0.5
        assert abs(res.cost - opt) <= 1e-6


def test_3_two_robot_swap(criterion):
    with criterion(3, "two-robot swap in [0,12]^2", limit=120) as rec:
        env = room(12)
        starts, targets = [(4, 6), (8, 6)], [(8, 6), (4, 6)]
        params = derive_params(2, 0.5, pitch_floor=0.5)
        res = plan(env, starts, targets, params)
        ref = product_grid_optimum(env, starts, targets, 0.5)
        bound = 1.1 * ref * 1.0824 + 2 * params.pitch * 2
        rec.detail = f"cost {res.cost:.5f}, grid optimum {ref:.5f}, bound {bound:.5f}, pitch {params.pitch}"
        assert res.found and res.cost <= bound
        assert verify(res.plan, env).feasible


EDGE_ENVS = [room_with_hole(20, (8, 8, 12, 12)), l_shape(), comb()]


def _random_edges(rng, env, n):
    f = erode(env, 1.0)
    x0, y0, x1, y1 = f.region.bounds
    params = derive_params(2, 0.5, delta=3, pitch=0.5)
    starts = None
    while starts is None:
        c = as_config(rng.uniform((x0, y0), (x1, y1), (2, 2)))
        if config_feasible(c, f):
            starts = c
    graph, _ = build_graph(env, starts, starts, params)
    pts = graph.samples.array
    edges = []
    while len(edges) < n:
        a = pts[rng.integers(len(pts), size=2)]
        near = [np.flatnonzero(np.abs(pts - p).max(axis=1) <= 4) for p in a]
        b = np.stack([pts[rng.choice(ix)] for ix in near])
        a, b = as_config(a), as_config(b)
        if config_feasible(a, f) and config_feasible(b, f):
            edges.append((a, b))
    return f, edges


def test_4_edge_predicate_sound(criterion):
    with criterion(4, "edge predicate vs time sampling") as rec:
        rng = np.random.default_rng(0)
        counts = {True: 0, False: 0}
        bad = 0
        for i, env in enumerate(EDGE_ENVS):
            n = 334 if i < 2 else 332
            f, edges = _random_edges(rng, env, n)
            for a, b in edges:
                ok = motion_feasible(a, b, f)
                counts[ok] += 1
                clear, sep = sampled_motion_check(a, b, env, samples=10_000)
                if ok:
                    bad += not (clear >= 1 - 1e-6 and sep >= 2 - 1e-6)
                else:
                    exits = any(segment_exit_param(f.region, Segment(p, q)) is not None for p, q in zip(a, b))
                    bad += not (clear < 1 or sep < 2 or exits)
        rec.detail = f"{counts[True]} feasible, {counts[False]} infeasible, {bad} violations"
        assert sum(counts.values()) == 1000 and counts[True] and counts[False]
        assert bad == 0


def test_5_geodesic_condition_implies_feasible(criterion):
    with criterion(5, "geodesic condition implies feasible motion") as rec:
        env = room_with_hole(20, (8, 8, 12, 12))
        f = erode(env, 1.0)
        rng = np.random.default_rng(1)
        n = held = 0
        while n < 1000:
            a = as_config(rng.uniform(1, 19, (2, 2)))
            b = as_config(np.asarray(a) + rng.uniform(-4, 4, (2, 2)))
            if not (config_feasible(a, f) and config_feasible(b, f)):
                continue
            n += 1
            if geodesic_condition(a, b, f):
                held += 1
                assert motion_feasible(a, b, f)
        rec.detail = f"{held} of {n} pairs met the condition, all feasible"
        assert held > 100


def test_6_simplifier_contract(criterion):
    with criterion(6, "simplifier contract on 100 robust plans", limit=60) as rec:
        envs = [room(30), room_with_hole(30, (10, 10, 20, 20))]
        spaces = [(erode(e, 1.0), erode(e, 2.0)) for e in envs]
        rng = np.random.default_rng(2)
        bp_in = bp_out = 0
        for i in range(100):
            env = envs[i % 2]
            f, fr = spaces[i % 2]
            k = 1 + (i // 2) % 2
            p = robust_walk(rng, env, k, 1.0, int(rng.integers(5, 30)), step=float(rng.choice([0.3, 1.0, 2.0])))
            q = shortcut(p, f, fr, 1.0)
            assert verify(q, env).feasible
            assert cost(q) <= cost(p) + 1e-6
            assert len(q.breakpoints) <= breakpoint_budget(k, 1.0, cost(q))
            assert len(shortcut(q, f, fr, 1.0).breakpoints) == len(q.breakpoints)
            bp_in += len(p.breakpoints)
            bp_out += len(q.breakpoints)
        rec.detail = f"breakpoints {bp_in} -> {bp_out}"


SWEEP_ENVS = {
    "room": (lambda: room(100), 10.0),
    "hole": (lambda: room_with_hole(60, (20, 20, 40, 40)), 6.0),
    "l_shape": (l_shape, 2.0),
    "dumbbell": (dumbbell, 3.0),
    "comb": (comb, 1.5),
}


@pytest.mark.parametrize("name", list(SWEEP_ENVS))
def test_7_far_topology_sweep(name, criterion):
    with criterion(7, f"far-point topology ({name})") as rec:
        make, D = SWEEP_ENVS[name]
        env = make()
        rep = far_topology_sweep(erode(env, 1.0), lm_of(env), D, samples=1000, seed=7)
        rec.detail = f"D={D}, checked {rep['checked']}, max edges {rep['max_edges']}, histogram {rep['histogram']}"
        assert rep["checked"] == 1000
        assert rep["max_edges"] <= 2 and not rep["violations"]


def test_8_corridor_and_parking(criterion):
    with criterion(8, "dumbbell corridor and parking places") as rec:
        env = dumbbell(length=40)
        lm = lm_of(env)
        cs = find_max_corridors(erode(env, 1.0), lm)
        assert len(cs) == 1
        c = cs[0]
        ends = [c.portals[0].a, c.portals[0].b, c.portals[1].a, c.portals[1].b]
        on_portal = float(lm.linf_to_nearest(ends).min())
        minus, plus = parking_places(c, 2)
        rec.detail = f"width {c.width}, depth {c.depth}, parking {len(minus)}+{len(plus)}"
        assert abs(c.width - 1) <= 0.01 and on_portal <= 1e-8
        for side in (minus, plus):
            assert len(side) >= 2
            assert all(linf_dist(p, q) >= 4 - 1e-9 for p, q in itertools.combinations(side, 2))
            assert all(abs(p.y - c.bisector.a.y) <= 1e-9 for p in side)


def test_9_wsra(criterion):
    with criterion(9, "WSRA in an empty 400x400 room") as rec:
        env = room(400)
        f, lm = erode(env, 1.0), lm_of(env)
        q = (200.0, 200.0)
        found = []
        for j in (1, 2, 3):
            s = wsra_centers(f, lm, q, j)
            found.append(len(s.centers))
            assert len(s.centers) >= j
            assert all(has_revolving_area(f, p) and linf_dist(p, q) <= 24 * j for p in s.centers)
            assert all(linf_dist(p, r) >= 4 - 1e-9 for p, r in itertools.combinations(s.centers, 2))
        rec.detail = f"centers per j: {found}"


def _rim_point(rng, p):
    side = rng.integers(4)
    u = rng.uniform(-2, 2)
    off = [(2, u), (u, 2), (-2, u), (u, -2)][side]
    return (p[0] + off[0], p[1] + off[1])


def test_10_jiggle(criterion):
    with criterion(10, "jiggle maneuver on 50 random pairs") as rec:
        env = room(20)
        f = erode(env, 1.0)
        p = (10.0, 10.0)
        rng = np.random.default_rng(10)
        worst = 0.0
        n = 0
        while n < 50:
            a, b = _rim_point(rng, p), _rim_point(rng, p)
            if linf_dist(a, b) < 2:
                continue
            n += 1
            jp = jiggle_plan(p, a, b, f)
            assert verify(jp, env).feasible
            worst = max(worst, cost(jp))
            assert cost(jp) <= 22
            for t in np.linspace(0, len(jp.breakpoints) - 1, 400):
                assert all(linf_dist(x, p) <= 2 + 1e-9 for x in jp.at(t))
        rec.detail = f"worst cost {worst:.3f}"


def test_11_determinism(criterion, tmp_path):
    with criterion(11, "byte-identical plan files") as rec:
        envf = tmp_path / "room.json"
        write_environment(envf, room(12), "room")
        blobs = []
        for n, threads in enumerate(("1", "1", "8")):
            out = tmp_path / f"plan{n}.json"
            code = main(["plan", str(envf), "--start", "4,6", "--start", "8,6", "--target", "8,6",
                         "--target", "4,6", "--pitch-floor", "0.5", "--threads", threads, "-o", str(out)])
            assert code == 0
            blobs.append(out.read_bytes())
        rec.detail = f"{len(blobs[0])} bytes, threads 1/1/8"
        assert blobs[0] == blobs[1] == blobs[2]
