"""SVG views of the curve, obstacles and the agent's walk."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional
from xml.sax.saxutils import escape

from .nonuniform import QUADRANTS, StitchedTrace, _Geometry
from .sfc_core import HilbertCurve
from .simulator import EpisodeTrace, ObstacleField

STYLE = (
    ".cell{fill:#ffffff;stroke:#d0d0d0;stroke-width:1}"
    ".obstacle{fill:#7f7f7f;stroke:none}"
    ".detected{fill:#8b4513;stroke:none}"
    ".curve{fill:none;stroke:#6fa8dc;stroke-width:1.5;stroke-dasharray:4 3}"
    ".path{fill:none;stroke:#cc0000;stroke-width:2.5}"
    ".label{font-family:monospace;fill:#333333;text-anchor:middle;dominant-baseline:central}"
    ".transfer{fill:none;stroke:#2e7d32;stroke-width:3}"
)


@dataclass(frozen=True)
class RenderSpec:
    cell_px: int = 24
    curve: bool = True
    path: bool = True
    obstacles: bool = True
    labels: bool = False
    margin: int = 8

    def __post_init__(self):
        if self.cell_px <= 0:
            raise ValueError("cell_px must be positive")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")


def _num(v: float) -> str:
    return f"{v:.1f}".rstrip("0").rstrip(".")


def _points(pts) -> str:
    return " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)


def _doc(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, f"<style>{STYLE}</style>", *body, "</svg>"]) + "\n"


def render_trace(trace: EpisodeTrace, spec: RenderSpec = RenderSpec(), field: Optional[ObstacleField] = None) -> str:
    """Grid, obstacles, curve polyline and walk polyline of a single episode.

    Detected obstacles come from the trace itself; ``field`` adds the ground
    truth (including obstacles the agent never saw).
    """
    curve = HilbertCurve(trace.k, trace.orientation)
    n = curve.side
    cs, m = spec.cell_px, spec.margin
    size = n * cs + 2 * m

    def corner(c):
        return m + c[0] * cs, m + (n - 1 - c[1]) * cs

    def center(c):
        x, y = corner(c)
        return x + cs / 2, y + cs / 2

    body = ['<g id="cells">']
    for y in range(n - 1, -1, -1):
        for x in range(n):
            px, py = corner((x, y))
            body.append(f'<rect class="cell" x="{px}" y="{py}" width="{cs}" height="{cs}"/>')
    body.append("</g>")
    if spec.obstacles:
        body.append('<g id="obstacles">')
        detected = {curve.index_to_cell(w) for w in trace.detections()}
        truth = sorted(field.blocked - detected) if field is not None else []
        for c in truth:
            px, py = corner(c)
            body.append(f'<rect class="obstacle" x="{px}" y="{py}" width="{cs}" height="{cs}"/>')
        for c in sorted(detected):
            px, py = corner(c)
            body.append(f'<rect class="detected" x="{px}" y="{py}" width="{cs}" height="{cs}"/>')
        body.append("</g>")
    if spec.curve:
        pts = [center(c) for c in curve.cells()]
        body.append(f'<polyline id="curve" class="curve" points="{_points(pts)}"/>')
    if spec.path:
        pts = [center(curve.index_to_cell(w)) for w in trace.walk()]
        body.append(f'<polyline id="path" class="path" points="{_points(pts)}"/>')
    if spec.labels:
        body.append('<g id="labels">')
        fs = max(6, cs // 3)
        for d, c in enumerate(curve.cells()):
            x, y = center(c)
            body.append(f'<text class="label" x="{_num(x)}" y="{_num(y)}" font-size="{fs}">{d}</text>')
        body.append("</g>")
    return _doc(size, size, body)


def render_stitched(
    trace: StitchedTrace,
    spec: RenderSpec = RenderSpec(),
    fields: Optional[Mapping[str, ObstacleField]] = None,
) -> str:
    """Four-quadrant view; ``cell_px`` is the size of the finest cell."""
    plan = trace.plan
    geo = _Geometry(plan)
    curves = {q: plan.curve(q) for q in QUADRANTS}
    u, m = spec.cell_px, spec.margin
    total = 2 * geo.h
    size = total * u + 2 * m

    def rect(q, c, cls):
        x0, y0, x1, y1 = geo.box(q, c)
        return (
            f'<rect class="{cls}" x="{m + x0 * u}" y="{m + (total - y1) * u}" '
            f'width="{(x1 - x0) * u}" height="{(y1 - y0) * u}"/>'
        )

    def center(q, c):
        cx, cy = geo.center2(q, c)
        return m + cx * u / 2, m + (2 * total - cy) * u / 2

    body = ['<g id="cells">']
    for q in QUADRANTS:
        n = curves[q].side
        for y in range(n - 1, -1, -1):
            for x in range(n):
                body.append(rect(q, (x, y), "cell"))
    body.append("</g>")
    if spec.obstacles:
        body.append('<g id="obstacles">')
        detected = {(e.quadrant, e.cell) for e in trace.events if e.kind == "sense_blocked"}
        if fields is not None:
            for q in QUADRANTS:
                for c in sorted(fields[q].blocked):
                    if (q, c) not in detected:
                        body.append(rect(q, c, "obstacle"))
        for q, c in sorted(detected, key=lambda n: (QUADRANTS.index(n[0]), n[1])):
            body.append(rect(q, c, "detected"))
        body.append("</g>")
    if spec.curve:
        for q in QUADRANTS:
            pts = [center(q, c) for c in curves[q].cells()]
            body.append(f'<polyline class="curve" data-quadrant="{q}" points="{_points(pts)}"/>')
    if spec.path:
        pts = [center(q, curves[q].index_to_cell(w)) for q, w in trace.walk()]
        body.append(f'<polyline id="path" class="path" points="{_points(pts)}"/>')
        for t in trace.transfers:
            pts = [center(*n) for n in (*t.route, t.entry)]
            body.append(f'<polyline class="transfer" points="{_points(pts)}"/>')
    if spec.labels:
        body.append('<g id="labels">')
        for q in QUADRANTS:
            fs = max(6, geo.scale(q) * u // 3)
            for d, c in enumerate(curves[q].cells()):
                x, y = center(q, c)
                body.append(f'<text class="label" x="{_num(x)}" y="{_num(y)}" font-size="{fs}">{escape(str(d))}</text>')
        body.append("</g>")
    return _doc(size, size, body)
