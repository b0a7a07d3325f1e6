"""Scenario and trace file formats.

Scenario files are JSON objects with ``"format": "sfcover-scenario"`` and an
integer ``"version"``. Trace files are line-oriented CSV with ``#`` header and
footer lines; see ``write_trace``.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import jsonschema

from .nonuniform import QUADRANTS, QuadrantPlan, QuadrantResult, StitchedEvent, StitchedTrace, TransferStep, plan_quadrants, quadrant_fields
from .sfc_core import Cell, SensingSpec, select_iteration
from .simulator import (
    CellList,
    EpisodeTrace,
    ObstacleField,
    Rect,
    ScenarioSeed,
    TraceEvent,
    ValidationError,
    generate_scenario,
    rasterize,
)

SCENARIO_FORMAT = "sfcover-scenario"
SCENARIO_VERSION = 1
TRACE_MAGIC = "# sfcover-trace v1"
STITCHED_MAGIC = "# sfcover-stitched-trace v1"

_RECT = {
    "type": "object",
    "properties": {
        "type": {"const": "rect"},
        "x0": {"type": "number"},
        "y0": {"type": "number"},
        "x1": {"type": "number"},
        "y1": {"type": "number"},
    },
    "required": ["type", "x0", "y0", "x1", "y1"],
    "additionalProperties": False,
}
_CELLS = {
    "type": "object",
    "properties": {
        "type": {"const": "cells"},
        "cells": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        },
    },
    "required": ["type", "cells"],
    "additionalProperties": False,
}
_ITER = {"type": "integer", "minimum": 0, "maximum": 15}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": SCENARIO_FORMAT},
        "version": {"const": SCENARIO_VERSION},
        "id": {"type": "string"},
        "description": {"type": "string"},
        "region_side": {"type": "number", "exclusiveMinimum": 0},
        "sensor_radius": {"type": "number", "exclusiveMinimum": 0},
        "k": _ITER,
        "start": {"type": "integer", "minimum": 0},
        "units": {"enum": ["cells", "region"]},
        "obstacles": {"type": "array", "items": {"oneOf": [_RECT, _CELLS]}},
        "seed": {
            "type": "object",
            "properties": {
                "blocked_count": {"type": "integer", "minimum": 0},
                "rng_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "keep_start_free": {"type": "boolean"},
            },
            "required": ["blocked_count", "rng_seed"],
            "additionalProperties": False,
        },
        "quadrants": {
            "type": "object",
            "properties": {
                "layout": {
                    "type": "object",
                    "properties": {q: _ITER for q in QUADRANTS},
                    "required": list(QUADRANTS),
                    "additionalProperties": False,
                },
                "restart": {
                    "type": "object",
                    "properties": {q: {"type": "boolean"} for q in QUADRANTS},
                    "additionalProperties": False,
                },
            },
            "required": ["layout"],
            "additionalProperties": False,
        },
        "metadata": {"type": "object"},
    },
    "required": ["format", "version"],
    "additionalProperties": False,
}


class ScenarioError(ValueError):
    """The scenario file is unreadable or violates the schema."""


@dataclass
class Scenario:
    id: str
    k: Optional[int]
    start: int = 0
    field: Optional[ObstacleField] = None
    plan: Optional[QuadrantPlan] = None
    quadrant_fields: dict = dc_field(default_factory=dict)
    raw: dict = dc_field(default_factory=dict)

    @property
    def is_nonuniform(self) -> bool:
        return self.plan is not None


def _shapes(raw: dict, k: Optional[int]) -> list:
    units = raw.get("units", "cells")
    region_side = raw.get("region_side")
    if units == "region" and region_side is None:
        raise ScenarioError("units 'region' need region_side")
    scale = 1.0
    if units == "region" and k is not None:
        scale = (1 << k) / region_side
    shapes = []
    for ob in raw.get("obstacles", []):
        if ob["type"] == "rect":
            shapes.append(Rect(ob["x0"] * scale, ob["y0"] * scale, ob["x1"] * scale, ob["y1"] * scale))
        else:
            shapes.append(CellList(tuple(Cell(x, y) for x, y in ob["cells"])))
    return shapes


def parse_scenario(raw: dict, default_id: str = "scenario") -> Scenario:
    try:
        jsonschema.validate(raw, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {e.message}") from None
    sid = raw.get("id", default_id)
    start = raw.get("start", 0)
    try:
        if "quadrants" in raw:
            if "k" in raw or "seed" in raw or "sensor_radius" in raw:
                raise ScenarioError("quadrant scenarios take iterations from the layout only")
            if raw.get("units", "region") != "region":
                raise ScenarioError("quadrant scenarios use region units")
            q = raw["quadrants"]
            plan = plan_quadrants(q["layout"], q.get("restart"))
            if any(ob["type"] != "rect" for ob in raw.get("obstacles", [])):
                raise ScenarioError("quadrant scenarios accept rectangles only")
            rects = [Rect(o["x0"], o["y0"], o["x1"], o["y1"]) for o in raw.get("obstacles", [])]
            fields = quadrant_fields(plan, rects, raw.get("region_side", 1.0))
            return Scenario(sid, None, 0, None, plan, fields, raw)
        if ("k" in raw) == ("sensor_radius" in raw):
            raise ScenarioError("give exactly one of k or sensor_radius")
        if "k" in raw:
            k = raw["k"]
        else:
            if "region_side" not in raw:
                raise ScenarioError("sensor_radius needs region_side")
            k = select_iteration(SensingSpec(raw["region_side"], raw["sensor_radius"]))
            if k > 15:
                raise ScenarioError(f"selected iteration {k} exceeds the cap")
        if start >= 1 << (2 * k):
            raise ScenarioError(f"start {start} out of range for iteration {k}")
        field = rasterize(_shapes(raw, k), k)
        if "seed" in raw:
            s = raw["seed"]
            seeded = generate_scenario(ScenarioSeed(k, s["blocked_count"], s["rng_seed"], s.get("keep_start_free", True), start))
            field = ObstacleField(k, field.blocked | seeded.blocked, field.provenance + seeded.provenance)
        return Scenario(sid, k, start, field, None, {}, raw)
    except ValidationError as e:
        raise ScenarioError(str(e)) from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError) as e:
        raise ScenarioError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: invalid JSON: {e}") from None
    return parse_scenario(raw, default_id=path.stem)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write(path, text: str):
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def generated_scenario(k: int, blocked: int, seed: int) -> dict:
    field = generate_scenario(ScenarioSeed(k, blocked, seed))
    cells = sorted([list(c) for c in field.blocked])
    return {
        "format": SCENARIO_FORMAT,
        "version": SCENARIO_VERSION,
        "id": f"sparse-k{k}-b{blocked}-s{seed}",
        "k": k,
        "start": 0,
        "units": "cells",
        "seed": {"blocked_count": blocked, "rng_seed": seed, "keep_start_free": True},
        "obstacles": [{"type": "cells", "cells": cells}],
        "metadata": {"blocked_fraction": round(blocked / (1 << (2 * k)), 6), "obstacle_kind": "sparse"},
    }


# --- traces -----------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_trace(trace: EpisodeTrace, scenario_id: str = "") -> str:
    """Serialize a trace.

    Layout::

        # sfcover-trace v1
        # k=3
        # orientation=identity
        # start=0
        # scenario=<id>
        step,kind,waypoint,x,y
        1,move,1,0,1
        ...
        # metrics total_moves=.. unique_visited=.. revisit_count=.. ...
    """
    buf = io.StringIO()
    buf.write(TRACE_MAGIC + "\n")
    buf.write(f"# k={trace.k}\n# orientation={trace.orientation}\n# start={trace.start}\n")
    buf.write(f"# scenario={scenario_id}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "kind", "waypoint", "x", "y"])
    for e in trace.events:
        w.writerow([e.step, e.kind, e.waypoint, e.cell.x, e.cell.y])
    m = dict(trace.metrics)
    m["free_count"] = trace.free_count
    m["reachable_count"] = trace.reachable_count
    m["lemma"] = trace.lemma_ok
    buf.write("# metrics " + " ".join(f"{k}={_fmt(v)}" for k, v in m.items()) + "\n")
    return buf.getvalue()


def _parse_value(v: str):
    if v == "none":
        return None
    if v in ("pass", "fail"):
        return v == "pass"
    try:
        return int(v)
    except ValueError:
        return float(v)


def _split_header(text: str, magic: str):
    lines = text.splitlines()
    if not lines or lines[0].strip() != magic:
        raise ValueError(f"not a trace file (expected {magic!r})")
    header, body, footer = {}, [], {}
    for line in lines[1:]:
        if line.startswith("# metrics "):
            footer.update(kv.split("=", 1) for kv in line[len("# metrics ") :].split())
        elif line.startswith("# "):
            key, _, value = line[2:].partition("=")
            header.setdefault(key, []).append(value)
        elif line.strip():
            body.append(line)
    return header, body, footer


def read_trace(text: str) -> tuple[EpisodeTrace, str]:
    header, body, footer = _split_header(text, TRACE_MAGIC)
    trace = EpisodeTrace(
        k=int(header["k"][0]),
        start=int(header["start"][0]),
        orientation=header.get("orientation", ["identity"])[0],
    )
    rows = list(csv.reader(body))
    if rows[0] != ["step", "kind", "waypoint", "x", "y"]:
        raise ValueError("bad trace column header")
    for step, kind, wp, x, y in rows[1:]:
        if kind not in ("move", "sense_blocked", "terminate"):
            raise ValueError(f"unknown event kind {kind!r}")
        trace.events.append(TraceEvent(int(step), kind, int(wp), Cell(int(x), int(y))))
    trace.free_count = _parse_value(footer.get("free_count", "none"))
    trace.reachable_count = _parse_value(footer.get("reachable_count", "none"))
    trace.lemma_ok = _parse_value(footer.get("lemma", "none"))
    return trace, header.get("scenario", [""])[0]


def _node(node) -> str:
    q, c = node
    return f"{q}:{c[0]}:{c[1]}"


def _unnode(s: str):
    q, x, y = s.split(":")
    return q, Cell(int(x), int(y))


def write_stitched_trace(trace: StitchedTrace, scenario_id: str = "") -> str:
    buf = io.StringIO()
    buf.write(STITCHED_MAGIC + "\n")
    layout = ",".join(f"{q}:{trace.plan.layout[q]}" for q in QUADRANTS)
    restart = ",".join(q for q in QUADRANTS if trace.plan.restart.get(q))
    buf.write(f"# layout={layout}\n# restart={restart}\n# start={trace.start[0]}:{trace.start[1]}\n")
    buf.write(f"# scenario={scenario_id}\n")
    for t in trace.transfers:
        route = ";".join(_node(n) for n in t.route)
        rejected = ";".join(_node(n) for n in t.rejected)
        buf.write(f"# transfer={_node(t.terminal)}|{_node(t.edge_waypoint)}|{_node(t.entry)}|{route}|{rejected}\n")
    for q, r in trace.quadrants.items():
        status = "error" if r.error is not None else _fmt(r.lemma_ok)
        buf.write(f"# quadrant={q}|{r.k}|{_fmt(r.entry)}|{r.reachable}|{r.free}|{status}|{r.error or ''}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "kind", "quadrant", "waypoint", "x", "y"])
    for e in trace.events:
        w.writerow([e.step, e.kind, e.quadrant, e.waypoint, e.cell.x, e.cell.y])
    m = dict(trace.metrics)
    m["unreachable_quadrants"] = ",".join(m["unreachable_quadrants"]) or "none"
    m["lemma"] = trace.lemma_ok
    buf.write("# metrics " + " ".join(f"{k}={_fmt(v)}" for k, v in m.items()) + "\n")
    return buf.getvalue()


def read_stitched_trace(text: str) -> tuple[StitchedTrace, str]:
    header, body, _ = _split_header(text, STITCHED_MAGIC)
    layout = dict((q, int(k)) for q, k in (p.split(":") for p in header["layout"][0].split(",")))
    restart = {q: True for q in header.get("restart", [""])[0].split(",") if q}
    plan = plan_quadrants(layout, restart)
    q0, w0 = header["start"][0].split(":")
    trace = StitchedTrace(plan, (q0, int(w0)))
    for line in header.get("transfer", []):
        a, b, c, route, rejected = line.split("|")
        trace.transfers.append(
            TransferStep(
                _unnode(a),
                _unnode(b),
                _unnode(c),
                tuple(_unnode(n) for n in route.split(";") if n),
                tuple(_unnode(n) for n in rejected.split(";") if n),
            )
        )
    for line in header.get("quadrant", []):
        q, k, entry, reachable, free, status, error = line.split("|", 6)
        r = QuadrantResult(q, int(k), entry=_parse_value(entry), reachable=int(reachable), free=int(free))
        if status == "error":
            r.error = error
        else:
            r.lemma_ok = _parse_value(status)
        trace.quadrants[q] = r
    rows = list(csv.reader(body))
    for step, kind, q, wp, x, y in rows[1:]:
        trace.events.append(StitchedEvent(int(step), kind, q, int(wp), Cell(int(x), int(y))))
    return trace, header.get("scenario", [""])[0]
