"""squarebots command line: plan, verify, simplify, diagnose, render."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .diagnostics import far_topology_sweep, find_max_corridors, parking_places, PreconditionError
from .freespace import erode, landmarks
from .geometry import Tolerance
from .io import FileFormatError, dumps, plan_to_dict, read_environment, read_plan
from .plan_model import cost, verify
from .planner import BudgetExceeded, InputError, plan
from .render import render_svg
from .sampling import derive_params
from .simplify import NotRobustError, shortcut

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_UNREACHABLE, EXIT_BUDGET = 0, 1, 2, 3, 4


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return x, y


def _err(msg: str) -> None:
    print(f"squarebots: {msg}", file=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _tol(args) -> Tolerance:
    return Tolerance(args.tolerance)


def cmd_plan(args) -> int:
    env, _ = read_environment(args.env)
    if len(args.start) != len(args.target):
        raise InputError(f"{len(args.start)} starts but {len(args.target)} targets")
    k = len(args.start)
    if k == 0:
        raise InputError("give at least one --start and --target")
    params = derive_params(
        k,
        args.epsilon,
        rho=args.rho,
        delta=args.delta,
        pitch=args.pitch,
        pitch_floor=args.pitch_floor,
        neighbor_radius=args.neighbor_radius,
        tol=_tol(args),
        max_expansions=args.budget_expansions,
        max_seconds=args.budget_seconds,
    )
    res = plan(env, args.start, args.target, params)
    summary = {
        "status": res.status,
        "landmarks": res.landmark_count,
        "samples": res.stats.samples,
        "stats": res.stats.as_dict(),
        "caps": list(params.overrides_used),
        "regime": "faithful" if not params.overrides_used else "capped: unreachable is relative to this sampled graph",
    }
    if not res.found:
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        _err("target is unreachable in the sampled configuration graph")
        return EXIT_UNREACHABLE
    summary["cost"] = res.cost
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    _emit(dumps(plan_to_dict(res.plan, res.cost, params.as_dict())), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    env, _ = read_environment(args.env)
    p = read_plan(args.plan)
    rep = verify(p, env, args.radius, _tol(args), delta=args.delta, rho=args.rho)
    _emit(dumps(rep.as_dict()), args.out)
    if not rep.feasible:
        for v in rep.violations:
            _err(f"leg {v.leg}: {v.kind} {list(v.who)} violates clearance at t={v.time:.6f}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_simplify(args) -> int:
    env, _ = read_environment(args.env)
    p = read_plan(args.plan)
    tol = _tol(args)
    try:
        q = shortcut(p, erode(env, 1.0), erode(env, 1.0 + args.rho), args.rho, tol)
    except NotRobustError as e:
        print(dumps({"robust_radius": e.radius, "violations": [v.as_dict() for v in e.violations]}), file=sys.stderr, end="")
        _err(str(e))
        return EXIT_INPUT
    print(json.dumps({"breakpoints_in": len(p.breakpoints), "breakpoints_out": len(q.breakpoints),
                      "cost_in": cost(p), "cost_out": cost(q)}, sort_keys=True), file=sys.stderr)
    _emit(dumps(plan_to_dict(q, cost(q), {"rho": args.rho})), args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    env, name = read_environment(args.env)
    tol = _tol(args)
    f1, f2 = erode(env, 1.0), erode(env, 2.0)
    lm = landmarks(f1, f2, tol=tol)
    report: dict = {"name": name, "landmarks": len(lm), "notes": []}
    if f2.is_empty:
        report["notes"].append("radius-2 free space is empty; it contributes no landmarks")
    corridors = []
    for c in find_max_corridors(f1, lm, tol):
        rec = c.as_dict()
        try:
            minus, plus = parking_places(c, args.k)
            rec["parking"] = {"minus": [[p.x, p.y] for p in minus], "plus": [[p.x, p.y] for p in plus]}
        except PreconditionError as e:
            rec["parking"] = None
            rec["parking_note"] = str(e)
        corridors.append(rec)
    report["corridors"] = corridors
    if args.sweep:
        D = args.far_distance if args.far_distance is not None else args.k * args.k / args.epsilon
        report["far_topology"] = far_topology_sweep(f1, lm, D, args.sweep, args.seed, tol)
    _emit(dumps(report), args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    env, _ = read_environment(args.env)
    p = read_plan(args.plan) if args.plan else None
    Path(args.out).write_text(render_svg(env, p, animate=args.animate))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="squarebots", description="Min-sum motion planning for unit-square robots.")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=1e-9, help="geometric slack eta")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="parallelism cap (results do not depend on it)")
    common.add_argument("--out", "-o", help="output file (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="compute a plan")
    p.add_argument("env")
    p.add_argument("--start", type=_point, action="append", default=[], metavar="X,Y")
    p.add_argument("--target", type=_point, action="append", default=[], metavar="X,Y")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--rho", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--pitch", type=float)
    p.add_argument("--pitch-floor", type=float, default=0.05)
    p.add_argument("--neighbor-radius", type=float)
    p.add_argument("--budget-expansions", type=int)
    p.add_argument("--budget-seconds", type=float)
    p.set_defaults(func=cmd_plan)

    v = sub.add_parser("verify", parents=[common], help="check a plan")
    v.add_argument("env")
    v.add_argument("plan")
    v.add_argument("--radius", type=float, default=1.0)
    v.add_argument("--delta", type=float, help="also report tameness at this distance")
    v.add_argument("--rho", type=float, help="also report the breakpoint budget")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simplify", parents=[common], help="reduce breakpoints of a robust plan")
    s.add_argument("env")
    s.add_argument("plan")
    s.add_argument("--rho", type=float, default=1.0)
    s.set_defaults(func=cmd_simplify)

    d = sub.add_parser("diagnose", parents=[common], help="corridors, parking places, far-point sweeps")
    d.add_argument("env")
    d.add_argument("--k", type=int, default=2)
    d.add_argument("--epsilon", type=float, default=0.5)
    d.add_argument("--sweep", type=int, default=0, metavar="N", help="far-topology check on N random far points")
    d.add_argument("--far-distance", type=float)
    d.set_defaults(func=cmd_diagnose)

    r = sub.add_parser("render", parents=[common], help="draw an SVG")
    r.add_argument("env")
    r.add_argument("plan", nargs="?")
    r.add_argument("--animate", action="store_true")
    r.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        _err("--threads must be >= 1")
        return EXIT_INPUT
    if args.command == "render" and not args.out:
        _err("render needs --out")
        return EXIT_INPUT
    try:
        return args.func(args)
    except (FileFormatError, InputError) as e:
        _err(str(e))
        return EXIT_INPUT
    except BudgetExceeded as e:
        print(json.dumps(e.stats.as_dict(), sort_keys=True), file=sys.stderr)
        _err(str(e))
        return EXIT_BUDGET
    except ValueError as e:
        _err(str(e))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
