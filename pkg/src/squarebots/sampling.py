"""Planner parameters and the landmark-neighborhood grid sample set."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .freespace import FreeSpace, Landmarks
from .geometry import DEFAULT_TOL, Point, Tolerance, contains_points

DEFAULT_PITCH_FLOOR = 0.05


def f_budget(k: int, rho: float) -> float:
    """Breakpoints allowed per epoch: 2^k (order types) times (2/rho)^k (cell tuples)."""
    return 2.0**k * (2.0 / rho) ** k


@dataclass(frozen=True)
class NeighborPolicy:
    """Full when ``radius`` is None, otherwise moves limited to l_inf ``radius`` per robot."""

    radius: float | None = None

    @property
    def is_full(self) -> bool:
        return self.radius is None

    def __str__(self):
        return "full" if self.radius is None else f"radius({self.radius!r})"


@dataclass(frozen=True)
class PlannerParams:
    k: int
    epsilon: float
    rho: float
    delta: float
    pitch: float
    tol: Tolerance = DEFAULT_TOL
    neighbor_policy: NeighborPolicy = NeighborPolicy()
    overrides_used: tuple[str, ...] = ()
    delta_constant: float = 1.0
    pitch_uncapped: float = math.nan
    pitch_floor: float = DEFAULT_PITCH_FLOOR
    max_expansions: int | None = None
    max_seconds: float | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not (self.delta > 0 and self.pitch > 0):
            raise ValueError("delta and pitch must be positive")
        if self.pitch > self.delta:
            raise ValueError(f"pitch {self.pitch} exceeds delta {self.delta}")
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "epsilon": self.epsilon,
            "rho": self.rho,
            "delta": self.delta,
            "delta_constant": self.delta_constant,
            "pitch": self.pitch,
            "pitch_uncapped": self.pitch_uncapped,
            "pitch_floor": self.pitch_floor,
            "tolerance": self.tol.eta,
            "neighbor_policy": str(self.neighbor_policy),
            "overrides_used": list(self.overrides_used),
            "max_expansions": self.max_expansions,
            "max_seconds": self.max_seconds,
        }


def derive_params(
    k: int,
    epsilon: float,
    *,
    rho: float | None = None,
    delta: float | None = None,
    pitch: float | None = None,
    pitch_floor: float = DEFAULT_PITCH_FLOOR,
    delta_constant: float = 1.0,
    neighbor_radius: float | None = None,
    tol: Tolerance = DEFAULT_TOL,
    max_expansions: int | None = None,
    max_seconds: float | None = None,
) -> PlannerParams:
    """Derive delta = C k^2 / epsilon and the grid pitch epsilon / (f(k, epsilon) sqrt(2) k).

    The theoretical pitch is tiny, so unless ``pitch`` is given it is raised to
    ``pitch_floor``; every cap or override is listed in ``overrides_used``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    used = []
    rho = epsilon if rho is None else rho
    if rho != epsilon:
        used.append("rho")
    derived_delta = delta_constant * k * k / epsilon
    if delta is None:
        delta = derived_delta
    else:
        used.append("delta")
    uncapped_pitch = epsilon / (f_budget(k, epsilon) * math.sqrt(2) * k)
    if pitch is None:
        pitch = uncapped_pitch
        if pitch < pitch_floor:
            pitch = pitch_floor
            used.append("pitch_floor")
    else:
        used.append("pitch")
    policy = NeighborPolicy(neighbor_radius)
    if neighbor_radius is not None:
        used.append("neighbor_radius")
    return PlannerParams(
        k=k,
        epsilon=epsilon,
        rho=rho,
        delta=delta,
        pitch=pitch,
        tol=tol,
        neighbor_policy=policy,
        overrides_used=tuple(used),
        delta_constant=delta_constant,
        pitch_uncapped=uncapped_pitch,
        pitch_floor=pitch_floor,
        max_expansions=max_expansions,
        max_seconds=max_seconds,
    )


@dataclass(frozen=True)
class SampleSet:
    points: tuple[Point, ...]
    includes_endpoints: bool = True
    grid_count: int = field(default=0, compare=False)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.points)

    def index_of(self, p: Sequence[float]) -> int:
        hits = np.flatnonzero((self.array[:, 0] == p[0]) & (self.array[:, 1] == p[1]))
        if len(hits) == 0:
            raise KeyError(f"{tuple(p)} is not a sample")
        return int(hits[0])


def _grid_near_landmarks(f: FreeSpace, lm: Landmarks, delta: float, pitch: float, eta: float) -> np.ndarray:
    x0, y0, x1, y1 = f.region.bounds
    cells = []
    for ux, uy in lm.points:
        lo_x, hi_x = max(ux - delta, x0), min(ux + delta, x1)
        lo_y, hi_y = max(uy - delta, y0), min(uy + delta, y1)
        if lo_x > hi_x + eta or lo_y > hi_y + eta:
            continue
        ii = np.arange(math.ceil((lo_x - eta) / pitch), math.floor((hi_x + eta) / pitch) + 1)
        jj = np.arange(math.ceil((lo_y - eta) / pitch), math.floor((hi_y + eta) / pitch) + 1)
        if len(ii) == 0 or len(jj) == 0:
            continue
        gi, gj = np.meshgrid(ii, jj, indexing="ij")
        cells.append(np.stack([gi.ravel(), gj.ravel()], axis=1))
    if not cells:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(np.concatenate(cells), axis=0)


def sample(
    f: FreeSpace,
    lm: Landmarks,
    params: PlannerParams,
    starts: Sequence[Sequence[float]] = (),
    targets: Sequence[Sequence[float]] = (),
) -> SampleSet:
    """Grid points of pitch * Z^2 in F within l_inf delta of a landmark, plus the endpoints."""
    tol = params.tol
    ij = _grid_near_landmarks(f, lm, params.delta, params.pitch, tol.eta)
    pts = ij.astype(float) * params.pitch
    if len(pts):
        keep = lm.linf_to_nearest(pts) <= params.delta + tol.eta
        pts = pts[keep]
    if len(pts):
        inside = np.concatenate(
            [contains_points(f.region, pts[i : i + 50_000], tol) for i in range(0, len(pts), 50_000)]
        )
        pts = pts[inside]
    ends = [Point(float(p[0]), float(p[1])) for p in (*starts, *targets)]
    if ends and len(pts):
        e = np.asarray(ends, dtype=float)
        d = np.abs(pts[:, None, :] - e[None, :, :]).max(axis=2).min(axis=1)
        pts = pts[d > 10 * tol.eta]
    grid = [Point(float(x), float(y)) for x, y in pts]
    seen = set()
    extra = []
    for p in ends:
        if p not in seen:
            seen.add(p)
            extra.append(p)
    return SampleSet(tuple(grid) + tuple(extra), includes_endpoints=True, grid_count=len(grid))
