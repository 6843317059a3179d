"""Static (optionally animated) SVG of an environment and a plan."""
from __future__ import annotations

from xml.sax.saxutils import quoteattr

from .geometry import PolygonalEnvironment
from .plan_model import Plan

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


def _f(x: float) -> str:
    return f"{x:.6g}"


def render_svg(env: PolygonalEnvironment, plan: Plan | None = None, *, animate: bool = False, scale: float = 20.0) -> str:
    """SVG 1.1 text: workspace outline, robot squares at breakpoints, one trace path per moving robot."""
    x0, y0, x1, y1 = env.bounds
    m = 1.0
    w, h = x1 - x0 + 2 * m, y1 - y0 + 2 * m
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(w * scale)}" height="{_f(h * scale)}" '
        f'viewBox="{_f(x0 - m)} {_f(-(y1 + m))} {_f(w)} {_f(h)}">',
        '<g transform="scale(1,-1)">',
    ]
    d = " ".join("M " + " L ".join(f"{_f(x)} {_f(y)}" for x, y in ring) + " Z" for ring in env.rings())
    out.append(f'<path class="environment" d="{d}" fill="#eeeeee" stroke="#000000" stroke-width="0.1" fill-rule="evenodd"/>')
    if plan is not None:
        arr = plan.array
        for i in range(plan.k):
            color = PALETTE[i % len(PALETTE)]
            pts = arr[:, i, :]
            for j, (x, y) in enumerate(pts):
                op = "0.6" if j in (0, len(pts) - 1) else "0.15"
                out.append(
                    f'<rect class="robot r{i}" x="{_f(x - 1)}" y="{_f(y - 1)}" width="2" height="2" '
                    f'fill={quoteattr(color)} fill-opacity="{op}" stroke={quoteattr(color)} stroke-width="0.05"/>'
                )
            if (pts != pts[0]).any():
                d = "M " + " L ".join(f"{_f(x)} {_f(y)}" for x, y in pts)
                out.append(f'<path class="trace r{i}" d="{d}" fill="none" stroke={quoteattr(color)} stroke-width="0.15"/>')
            if animate and len(pts) > 1:
                xs = ";".join(_f(x - 1) for x, _ in pts)
                ys = ";".join(_f(y - 1) for _, y in pts)
                dur = _f(len(pts) - 1)
                out.append(
                    f'<rect class="mover r{i}" width="2" height="2" fill={quoteattr(color)}>'
                    f'<animate attributeName="x" values="{xs}" dur="{dur}s" repeatCount="indefinite"/>'
                    f'<animate attributeName="y" values="{ys}" dur="{dur}s" repeatCount="indefinite"/></rect>'
                )
    out += ["</g>", "</svg>", ""]
    return "\n".join(out)
