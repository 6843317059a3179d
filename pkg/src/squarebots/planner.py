"""Shortest paths in the implicit configuration graph over SampleSet^k."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .freespace import FreeSpace, Landmarks, erode, landmarks
from .geometry import PolygonalEnvironment, relative_motions_clear, segments_contained_from
from .kinematics import Configuration, as_config, config_feasible
from .plan_model import Plan, merge_collinear
from .sampling import PlannerParams, SampleSet, sample


class InputError(ValueError):
    """Start or target configuration is unusable."""


class BudgetExceeded(RuntimeError):
    def __init__(self, reason: str, stats: "SearchStats"):
        super().__init__(f"search budget exceeded ({reason}) after {stats.expanded} expansions")
        self.reason = reason
        self.stats = stats


@dataclass
class SearchStats:
    expanded: int = 0
    relaxed: int = 0
    wall_time: float = 0.0
    rounds: int = 0
    samples: int = 0
    containment_sources: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SearchResult:
    status: str  # "found" or "unreachable"
    plan: Plan | None
    cost: float | None
    stats: SearchStats
    params: PlannerParams
    landmark_count: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.status == "found"


class ConfigGraph:
    """Vertices are k-tuples of sample indices; edges are exact straight-line motions.

    Nothing is materialized up front. Per-robot segment containment is
    memoized per source sample, so each sample's row is computed once.
    """

    def __init__(self, f: FreeSpace, samples: SampleSet, params: PlannerParams):
        self.f = f
        self.samples = samples
        self.params = params
        self.X = samples.array
        self.sep = 2.0 * f.radius
        self._rows: dict[int, np.ndarray] = {}
        self.last_cut = False

    @property
    def k(self) -> int:
        return self.params.k

    def reachable_from(self, a: int) -> np.ndarray:
        """Boolean row: which samples robot can reach from sample ``a`` by one segment in F."""
        row = self._rows.get(a)
        if row is None:
            row = segments_contained_from(self.f.region, self.X[a], self.X, self.params.tol)
            R = self.params.neighbor_policy.radius
            if R is not None:
                row &= np.abs(self.X - self.X[a]).max(axis=1) <= R + self.params.tol.eta
            self._rows[a] = row
        return row

    def config(self, v: Sequence[int]) -> Configuration:
        return as_config(self.X[list(v)])

    def is_vertex(self, v: Sequence[int]) -> bool:
        return config_feasible(self.config(v), self.f, self.params.tol)

    def _combos(self, v: tuple[int, ...], per_robot, budget: float):
        """Index combos whose summed per-robot value stays within ``budget``.

        ``per_robot`` holds (candidate indices, values) sorted by value.
        """
        k = len(per_robot)
        mins = [vals[0] if len(vals) else math.inf for _, vals in per_robot]
        rest = [sum(mins[i + 1 :]) for i in range(k)]
        partial = np.zeros(1)
        picks = np.zeros((1, 0), dtype=np.int64)
        for i, (idx, vals) in enumerate(per_robot):
            counts = np.searchsorted(vals, budget - partial - rest[i] + 1e-12, side="right")
            total = int(counts.sum())
            if total == 0:
                return np.zeros((0, k), dtype=np.int64), np.zeros(0)
            owner = np.repeat(np.arange(len(partial)), counts)
            offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
            partial = partial[owner] + vals[offs]
            picks = np.concatenate([picks[owner], idx[offs][:, None]], axis=1)
        return picks, partial

    def successors(self, v: tuple[int, ...], h_rows: Sequence[np.ndarray] | None = None, budget: float = math.inf):
        """Feasible neighbors of v as (index array (m,k), edge weights (m,)).

        With ``h_rows`` the per-robot value is step length plus heuristic and
        only combos whose total is at most ``budget`` are produced.
        """
        X = self.X
        per_robot = []
        for i, a in enumerate(v):
            idx = np.flatnonzero(self.reachable_from(a))
            step = np.hypot(X[idx, 0] - X[a, 0], X[idx, 1] - X[a, 1])
            val = step + h_rows[i][idx] if h_rows is not None else step
            order = np.argsort(val, kind="stable")
            per_robot.append((idx[order], val[order]))
        # did the budget cut anything off? (conservative: ignores pair checks)
        self.last_cut = all(len(vals) for _, vals in per_robot) and (
            sum(float(vals[-1]) for _, vals in per_robot) > budget
        )
        picks, _ = self._combos(v, per_robot, budget)
        if len(picks) == 0:
            return picks, np.zeros(0)
        keep = ~np.all(picks == np.asarray(v)[None, :], axis=1)
        src = X[list(v)]
        for i, j in combinations(range(len(v)), 2):
            d0 = src[i] - src[j]
            d1x = X[picks[:, i], 0] - X[picks[:, j], 0]
            d1y = X[picks[:, i], 1] - X[picks[:, j], 1]
            keep &= relative_motions_clear(d0[0], d0[1], d1x, d1y, self.sep, self.params.tol)
        picks = picks[keep]
        w = np.zeros(len(picks))
        for i, a in enumerate(v):
            w += np.hypot(X[picks[:, i], 0] - X[a, 0], X[picks[:, i], 1] - X[a, 1])
        return picks, w


def neighbors(v: Configuration, graph: ConfigGraph) -> Iterator[tuple[Configuration, float]]:
    """All feasible neighbors of ``v`` with edge weight sum of Euclidean step lengths."""
    vi = tuple(graph.samples.index_of(p) for p in v)
    picks, w = graph.successors(vi)
    for row, wt in zip(picks, w):
        yield graph.config(row), float(wt)


def build_graph(
    env: PolygonalEnvironment, starts: Sequence, targets: Sequence, params: PlannerParams
) -> tuple[ConfigGraph, Landmarks]:
    starts, targets = as_config(starts), as_config(targets)
    if len(starts) != params.k or len(targets) != params.k:
        raise InputError(f"expected {params.k} starts and targets, got {len(starts)} and {len(targets)}")
    f1 = erode(env, 1.0)
    for name, c in (("start", starts), ("target", targets)):
        if not config_feasible(c, f1, params.tol):
            raise InputError(f"{name} configuration is infeasible")
    lm = landmarks(f1, erode(env, 2.0), starts, targets, params.tol)
    return ConfigGraph(f1, sample(f1, lm, params, starts, targets), params), lm


def _search(graph: ConfigGraph, s, t, h_rows, bound, stats, deadline, max_exp):
    """A* restricted to successors with f <= bound. Returns (path or None, pruned_any)."""
    h_s = sum(float(h_rows[i][a]) for i, a in enumerate(s))
    best = {s: 0.0}
    parent: dict = {s: None}
    heap = [(h_s, s, 0.0)]
    closed = set()
    pruned = False
    while heap:
        fv, v, g = heapq.heappop(heap)
        if v in closed or g > best[v]:
            continue
        if v == t:
            path = []
            while v is not None:
                path.append(v)
                v = parent[v]
            return path[::-1], pruned
        closed.add(v)
        stats.expanded += 1
        if max_exp is not None and stats.expanded > max_exp:
            raise BudgetExceeded("expansions", stats)
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("seconds", stats)
        picks, w = graph.successors(v, h_rows, bound - g)
        pruned = pruned or graph.last_cut
        stats.relaxed += len(picks)
        hv = np.zeros(len(picks))
        for i in range(len(v)):
            hv += h_rows[i][picks[:, i]]
        for row, wt, hu in zip(picks, w, hv):
            u = tuple(int(x) for x in row)
            gu = g + float(wt)
            if u in closed or gu >= best.get(u, math.inf):
                continue
            best[u] = gu
            parent[u] = v
            heapq.heappush(heap, (gu + float(hu), u, gu))
    return None, pruned


def plan(
    env: PolygonalEnvironment, starts: Sequence, targets: Sequence, params: PlannerParams
) -> SearchResult:
    """Minimum-cost plan from starts to targets in the sampled graph.

    The search is A* with the admissible, consistent heuristic sum of
    straight-line distances to the targets, so its cost equals plain Dijkstra's.
    Successor generation is capped by an f-bound that doubles until the
    target is found or nothing was cut off. Unreachable means unreachable in
    this sampled graph only.
    """
    t0 = time.monotonic()
    graph, lm = build_graph(env, starts, targets, params)
    stats = SearchStats(samples=len(graph.samples))
    s = tuple(graph.samples.index_of(p) for p in as_config(starts))
    t = tuple(graph.samples.index_of(p) for p in as_config(targets))
    X = graph.X
    h_rows = [np.hypot(X[:, 0] - X[b, 0], X[:, 1] - X[b, 1]) for b in t]
    deadline = None if params.max_seconds is None else t0 + params.max_seconds
    h_s = sum(float(h_rows[i][a]) for i, a in enumerate(s))
    slack = 0.25 * h_s + 1.0
    path = None
    try:
        while True:
            stats.rounds += 1
            path, pruned = _search(graph, s, t, h_rows, h_s + slack, stats, deadline, params.max_expansions)
            if path is not None or not pruned:
                break
            slack *= 2.0
    finally:
        stats.wall_time = time.monotonic() - t0
        stats.containment_sources = len(graph._rows)
    if path is None:
        return SearchResult("unreachable", None, None, stats, params, len(lm))
    # collinear joint legs through intermediate samples add nothing
    p = Plan.from_configs(merge_collinear([X[list(v)] for v in path]))
    c = 0.0
    for a, b in zip(path, path[1:]):
        c += float(sum(np.hypot(*(X[b[i]] - X[a[i]])) for i in range(len(a))))
    return SearchResult("found", p, c, stats, params, len(lm))
