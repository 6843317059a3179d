"""Plans, their cost, and the leg-by-leg verifier."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .freespace import Landmarks, erode, landmarks
from .geometry import (
    DEFAULT_TOL,
    Point,
    PolygonalEnvironment,
    Segment,
    Tolerance,
    segment_avoids_open_square,
    segment_exit_param,
)
from .kinematics import Configuration, as_config
from .sampling import f_budget


@dataclass(frozen=True)
class Plan:
    """Synchronized piecewise-linear joint motion through ``breakpoints``."""

    breakpoints: tuple[Configuration, ...]

    def __post_init__(self):
        bps = tuple(as_config(c) for c in self.breakpoints)
        if len(bps) < 2:
            raise ValueError("a plan needs at least two breakpoints")
        k = len(bps[0])
        if k < 1 or any(len(c) != k for c in bps):
            raise ValueError("every breakpoint must place the same number of robots")
        object.__setattr__(self, "breakpoints", bps)

    @classmethod
    def from_configs(cls, configs: Sequence[Sequence[Sequence[float]]]) -> "Plan":
        configs = list(configs)
        if len(configs) == 1:
            configs = configs * 2
        return cls(tuple(as_config(c) for c in configs))

    @property
    def k(self) -> int:
        return len(self.breakpoints[0])

    @property
    def start(self) -> Configuration:
        return self.breakpoints[0]

    @property
    def end(self) -> Configuration:
        return self.breakpoints[-1]

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.breakpoints, dtype=float)

    def legs(self):
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def at(self, t: float) -> Configuration:
        """Configuration at leg-parameter ``t`` in [0, number of legs]."""
        m = len(self.breakpoints) - 1
        t = min(max(t, 0.0), float(m))
        i = min(int(math.floor(t)), m - 1)
        u = t - i
        a, b = self.array[i], self.array[i + 1]
        return as_config(a + u * (b - a))


def merge_collinear(configs: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Drop zero-length legs and merge consecutive collinear joint legs."""
    configs = [np.asarray(c, dtype=float) for c in configs]
    pts = [configs[0]]
    for c in configs[1:]:
        if np.abs(c - pts[-1]).max() > 1e-12:
            pts.append(c)
    if len(pts) == 1:
        return [pts[0], pts[0].copy()]
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        d1 = (pts[i] - out[-1]).ravel()
        d2 = (pts[i + 1] - pts[i]).ravel()
        u1, u2 = d1 / np.linalg.norm(d1), d2 / np.linalg.norm(d2)
        if np.abs(u1 - u2).max() <= 1e-9:
            continue
        out.append(pts[i])
    out.append(pts[-1])
    return out


def cost(plan: Plan) -> float:
    """Sum over robots of Euclidean path length."""
    d = np.diff(plan.array, axis=0)
    return float(np.hypot(d[..., 0], d[..., 1]).sum())


def breakpoint_budget(k: int, rho: float, plan_cost: float) -> int:
    """ceil(2^k (2/rho)^k (cost + 1))."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return int(math.ceil(f_budget(k, rho) * (plan_cost + 1) - 1e-9))


def tameness(plan: Plan, lm: Landmarks, delta: float, tol: Tolerance = DEFAULT_TOL) -> tuple[bool, list]:
    """(tame?, [(breakpoint index, robot index), ...] of delta-far placements)."""
    arr = plan.array
    d = lm.linf_to_nearest(arr.reshape(-1, 2)).reshape(arr.shape[:2])
    far = [(int(b), int(r)) for b, r in zip(*np.nonzero(d > delta + tol.eta))]
    return not far, far


@dataclass(frozen=True)
class Violation:
    leg: int
    kind: str  # "robot" or "pair"
    who: tuple[int, ...]
    time: float
    measure: float

    def as_dict(self) -> dict:
        return {"leg": self.leg, "kind": self.kind, "who": list(self.who), "time": self.time, "measure": self.measure}


@dataclass
class VerificationReport:
    feasible: bool
    radius_checked: float
    violations: list[Violation]
    cost: float
    tame: bool | None
    far_breakpoints: list
    breakpoint_count: int
    budget: int | None = None
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "radius_checked": self.radius_checked,
            "violations": [v.as_dict() for v in self.violations],
            "cost": self.cost,
            "tame": self.tame,
            "far_breakpoints": [list(x) for x in self.far_breakpoints],
            "breakpoint_count": self.breakpoint_count,
            "budget": self.budget,
        }


def _linf_rel(d0, d1, t):
    return max(abs(d0[0] + t * (d1[0] - d0[0])), abs(d0[1] + t * (d1[1] - d0[1])))


def closest_approach(d0, d1, samples: int = 101) -> tuple[float, float]:
    """Time and value of the minimum l_inf norm along d0 -> d1 (sampled, then golden-section)."""
    ts = np.linspace(0.0, 1.0, samples)
    vals = np.maximum(np.abs(d0[0] + ts * (d1[0] - d0[0])), np.abs(d0[1] + ts * (d1[1] - d0[1])))
    i = int(np.argmin(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, samples - 1)]
    g = (math.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    for _ in range(60):
        if _linf_rel(d0, d1, c) < _linf_rel(d0, d1, d):
            hi = d
        else:
            lo = c
        c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    t = 0.5 * (lo + hi)
    best = min((t, _linf_rel(d0, d1, t)), (ts[i], float(vals[i])), key=lambda x: x[1])
    return float(best[0]), float(best[1])


def verify(
    plan: Plan,
    env: PolygonalEnvironment,
    radius: float = 1.0,
    tol: Tolerance = DEFAULT_TOL,
    *,
    lm: Landmarks | None = None,
    delta: float | None = None,
    rho: float | None = None,
) -> VerificationReport:
    """Check every leg exactly for robots of half-width ``radius``.

    Robots must stay in the radius-eroded workspace and pairs must keep
    l_inf center distance ``2 * radius``.
    """
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    f = erode(env, radius)
    sep = 2.0 * radius
    violations: list[Violation] = []
    for m, (a, b) in enumerate(plan.legs()):
        for i, (p, q) in enumerate(zip(a, b)):
            t = segment_exit_param(f.region, Segment(p, q), tol)
            if t is not None:
                violations.append(Violation(m, "robot", (i,), t, float("nan")))
        for i in range(plan.k):
            for j in range(i + 1, plan.k):
                d0 = Point(a[i].x - a[j].x, a[i].y - a[j].y)
                d1 = Point(b[i].x - b[j].x, b[i].y - b[j].y)
                if not segment_avoids_open_square(Segment(d0, d1), (0.0, 0.0), sep, tol):
                    t, v = closest_approach(d0, d1)
                    violations.append(Violation(m, "pair", (i, j), t, v))
    c = cost(plan)
    notes = []
    if delta is not None:
        if lm is None:
            lm = landmarks(erode(env, 1.0), erode(env, 2.0), plan.start, plan.end, tol) if not violations else None
        if lm is not None:
            tame, far = tameness(plan, lm, delta, tol)
        else:
            tame, far = None, []
            notes.append("tameness skipped: landmarks need feasible endpoints")
    else:
        tame, far = None, []
    budget = breakpoint_budget(plan.k, rho, c) if rho is not None else None
    return VerificationReport(
        feasible=not violations,
        radius_checked=radius,
        violations=violations,
        cost=c,
        tame=tame,
        far_breakpoints=far,
        breakpoint_count=len(plan.breakpoints),
        budget=budget,
        notes=notes,
    )
