"""Environment and plan files: JSON with numbers written as decimal strings."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .geometry import PolygonalEnvironment, PolygonalRegion
from .plan_model import Plan


class FileFormatError(ValueError):
    """A file could not be parsed; the message names the location."""


def num(x: float) -> str:
    # repr round-trips floats exactly
    return repr(float(x))


def _parse_num(v: Any, where: str) -> float:
    if isinstance(v, bool):
        raise FileFormatError(f"{where}: expected a number, got {v!r}")
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise FileFormatError(f"{where}: expected a number, got {v!r}") from None
    if x != x or x in (float("inf"), float("-inf")):
        raise FileFormatError(f"{where}: number must be finite")
    return x


def _parse_point(v: Any, where: str) -> tuple[float, float]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise FileFormatError(f"{where}: expected a [x, y] pair")
    return _parse_num(v[0], f"{where}[0]"), _parse_num(v[1], f"{where}[1]")


def _parse_ring(v: Any, where: str) -> list[tuple[float, float]]:
    if not isinstance(v, list) or len(v) < 3:
        raise FileFormatError(f"{where}: expected a list of at least 3 vertices")
    return [_parse_point(p, f"{where}[{i}]") for i, p in enumerate(v)]


def _loads(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def environment_to_dict(env: PolygonalEnvironment, name: str = "") -> dict:
    if len(env.faces) != 1:
        raise ValueError("environment files hold a single polygon with holes")
    outer, holes = env.faces[0]
    ring = lambda r: [[num(x), num(y)] for x, y in r]  # noqa: E731
    return {"name": name, "outer": ring(outer), "holes": [ring(h) for h in holes]}


def environment_from_dict(d: Any, source: str = "<environment>") -> tuple[PolygonalEnvironment, str]:
    if not isinstance(d, dict):
        raise FileFormatError(f"{source}: expected an object at top level")
    if "outer" not in d:
        raise FileFormatError(f"{source}: missing field 'outer'")
    outer = _parse_ring(d["outer"], f"{source}: outer")
    holes_raw = d.get("holes", [])
    if not isinstance(holes_raw, list):
        raise FileFormatError(f"{source}: holes must be a list")
    holes = [_parse_ring(h, f"{source}: holes[{i}]") for i, h in enumerate(holes_raw)]
    name = d.get("name", "")
    if not isinstance(name, str):
        raise FileFormatError(f"{source}: name must be a string")
    env = PolygonalRegion.from_rings(outer, holes)
    if env.is_empty or not env.shape.is_valid or env.area <= 0:
        raise FileFormatError(f"{source}: polygon is degenerate or self-intersecting")
    return env, name


def read_environment(path: str | Path) -> tuple[PolygonalEnvironment, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FileFormatError(f"{path}: {e.strerror}") from None
    return environment_from_dict(_loads(text, str(path)), str(path))


def write_environment(path: str | Path, env: PolygonalEnvironment, name: str = "") -> None:
    Path(path).write_text(dumps(environment_to_dict(env, name)))


def _stringify(v: Any) -> Any:
    if isinstance(v, float):
        return num(v)
    if isinstance(v, dict):
        return {str(k): _stringify(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_stringify(x) for x in v]
    return v


def plan_to_dict(plan: Plan, plan_cost: float | None = None, params: dict | None = None) -> dict:
    d: dict[str, Any] = {
        "k": plan.k,
        "breakpoints": [[[num(p.x), num(p.y)] for p in c] for c in plan.breakpoints],
    }
    if plan_cost is not None:
        d["cost"] = num(plan_cost)
    if params is not None:
        d["params"] = _stringify(params)
    return d


def plan_from_dict(d: Any, source: str = "<plan>") -> Plan:
    if not isinstance(d, dict):
        raise FileFormatError(f"{source}: expected an object at top level")
    for key in ("k", "breakpoints"):
        if key not in d:
            raise FileFormatError(f"{source}: missing field '{key}'")
    k = d["k"]
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise FileFormatError(f"{source}: k must be a positive integer")
    bps = d["breakpoints"]
    if not isinstance(bps, list) or len(bps) < 1:
        raise FileFormatError(f"{source}: breakpoints must be a non-empty list")
    configs = []
    for i, c in enumerate(bps):
        if not isinstance(c, list) or len(c) != k:
            raise FileFormatError(f"{source}: breakpoints[{i}] must hold {k} placements")
        configs.append([_parse_point(p, f"{source}: breakpoints[{i}][{j}]") for j, p in enumerate(c)])
    return Plan.from_configs(configs)


def read_plan(path: str | Path) -> Plan:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FileFormatError(f"{path}: {e.strerror}") from None
    return plan_from_dict(_loads(text, str(path)), str(path))


def write_plan(path: str | Path, plan: Plan, plan_cost: float | None = None, params: dict | None = None) -> None:
    Path(path).write_text(dumps(plan_to_dict(plan, plan_cost, params)))
