"""Ground-truth obstacle fields, sensing, the reachability oracle and episodes."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .coverage_graph import CoverageGraph, build_graph
from .planner import ConfigurationError, ContractViolation, run_episode
from .sfc_core import Cell, HilbertCurve, check_iteration, num_waypoints, side


class ValidationError(ValueError):
    """Scenario input is malformed or out of bounds."""


# --- shapes -----------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    """Axis-aligned closed rectangle ``[x0, x1] x [y0, y1]`` in cell units.

    Degenerate rectangles (segments, points) are allowed.
    """

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValidationError(f"rectangle has negative extent: {self}")


@dataclass(frozen=True)
class CellList:
    cells: tuple[Cell, ...]


Shape = Union[Rect, CellList]


def _rect_cells(r: Rect, n: int) -> set[Cell]:
    # A cell is hit when the closed shape meets the cell's open interior, so a
    # rectangle that only touches a grid line leaves the neighbor free.
    def span(lo, hi):
        return range(max(math.floor(lo), 0), min(math.ceil(hi) - 1, n - 1) + 1)

    xs = span(r.x0, r.x1)
    ys = span(r.y0, r.y1)
    return {Cell(x, y) for x in xs for y in ys}


@dataclass
class ObstacleField:
    k: int
    blocked: frozenset[Cell]
    provenance: tuple[Shape, ...] = ()

    def __post_init__(self):
        check_iteration(self.k)
        n = side(self.k)
        self.blocked = frozenset(Cell(*c) for c in self.blocked)
        for x, y in self.blocked:
            if not (0 <= x < n and 0 <= y < n):
                raise ValidationError(f"blocked cell {(x, y)} outside {n}x{n} grid")

    @property
    def side(self) -> int:
        return side(self.k)

    def is_blocked(self, cell) -> bool:
        return Cell(*cell) in self.blocked

    def free_cells(self) -> set[Cell]:
        n = self.side
        return {Cell(x, y) for x in range(n) for y in range(n)} - self.blocked


def rasterize(shapes: Iterable[Shape], k: int) -> ObstacleField:
    """Block every cell whose interior meets a rectangle; cell lists pass through."""
    check_iteration(k)
    n = side(k)
    shapes = tuple(shapes)
    blocked: set[Cell] = set()
    for shape in shapes:
        if isinstance(shape, Rect):
            if shape.x0 < 0 or shape.y0 < 0 or shape.x1 > n or shape.y1 > n:
                raise ValidationError(f"rectangle {shape} leaves the {n}x{n} region")
            blocked |= _rect_cells(shape, n)
        elif isinstance(shape, CellList):
            for x, y in shape.cells:
                if not (0 <= x < n and 0 <= y < n):
                    raise ValidationError(f"cell {(x, y)} outside {n}x{n} grid")
                blocked.add(Cell(x, y))
        else:
            raise ValidationError(f"unsupported shape {shape!r}")
    return ObstacleField(k, frozenset(blocked), shapes)


# --- sensing ----------------------------------------------------------------


def sense(field: ObstacleField, frm, target) -> bool:
    """Is ``target`` blocked? Only 4-neighbors of ``frm`` may be queried."""
    fx, fy = frm
    tx, ty = target
    if abs(fx - tx) + abs(fy - ty) != 1:
        raise ContractViolation(f"cannot sense {tuple(target)} from non-adjacent {tuple(frm)}")
    return field.is_blocked(target)


class FieldEnvironment:
    """Adapts an :class:`ObstacleField` to the planner's waypoint-index world."""

    def __init__(self, field: ObstacleField, curve: HilbertCurve):
        if curve.k != field.k:
            raise ValidationError(f"curve iteration {curve.k} does not match field {field.k}")
        self.field = field
        self.curve = curve

    def sense(self, from_waypoint: int, target: int) -> bool:
        c = self.curve
        return sense(self.field, c.index_to_cell(from_waypoint), c.index_to_cell(target))

    def is_blocked(self, waypoint: int) -> bool:
        return self.field.is_blocked(self.curve.index_to_cell(waypoint))


# --- oracle -----------------------------------------------------------------


def reachable_free_set(field: ObstacleField, start) -> set[Cell]:
    """Free cells 4-connected to ``start``, by plain BFS on the raw grid."""
    n = field.side
    start = Cell(*start)
    if field.is_blocked(start):
        raise ConfigurationError(f"start cell {tuple(start)} is blocked")
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < n and 0 <= ny < n:
                c = Cell(nx, ny)
                if c not in seen and c not in field.blocked:
                    seen.add(c)
                    queue.append(c)
    return seen


# --- scenarios --------------------------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood), 64-bit state.

    state += 0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound


@dataclass(frozen=True)
class ScenarioSeed:
    k: int
    blocked_count: int
    rng_seed: int
    keep_start_free: bool = True
    start: int = 0


def generate_scenario(seed: ScenarioSeed) -> ObstacleField:
    """Block exactly ``blocked_count`` cells, sampled without replacement.

    Sampling is a partial Fisher-Yates shuffle over curve indices in order,
    driven by :class:`SplitMix64`; the start index is excluded from the pool
    when ``keep_start_free`` is set.
    """
    check_iteration(seed.k)
    N = num_waypoints(seed.k)
    if not 0 <= seed.blocked_count < N:
        raise ValidationError(f"blocked_count must be in [0, {N}), got {seed.blocked_count}")
    if not 0 <= seed.start < N:
        raise ValidationError(f"start {seed.start} out of range")
    pool = [d for d in range(N) if not (seed.keep_start_free and d == seed.start)]
    if seed.blocked_count > len(pool):
        raise ValidationError("not enough cells to block")
    rng = SplitMix64(seed.rng_seed)
    for i in range(seed.blocked_count):
        j = i + rng.below(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    curve = HilbertCurve(seed.k)
    chosen = sorted(pool[: seed.blocked_count])
    cells = tuple(curve.index_to_cell(d) for d in chosen)
    return ObstacleField(seed.k, frozenset(cells), (CellList(cells),))


# --- episodes ---------------------------------------------------------------


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: str  # move | sense_blocked | terminate
    waypoint: int
    cell: Cell


@dataclass
class EpisodeTrace:
    k: int
    start: int
    events: list[TraceEvent] = field(default_factory=list)
    free_count: Optional[int] = None
    reachable_count: Optional[int] = None
    lemma_ok: Optional[bool] = None
    orientation: str = "identity"

    def moves(self) -> list[TraceEvent]:
        return [e for e in self.events if e.kind == "move"]

    def walk(self) -> list[int]:
        """Waypoints occupied in order, starting with the start waypoint."""
        return [self.start] + [e.waypoint for e in self.events if e.kind == "move"]

    def visit_order(self) -> list[int]:
        """First-visit order of waypoints."""
        seen: dict[int, None] = {}
        for w in self.walk():
            seen.setdefault(w, None)
        return list(seen)

    def detections(self) -> list[int]:
        return [e.waypoint for e in self.events if e.kind == "sense_blocked"]

    @property
    def metrics(self) -> dict:
        walk = self.walk()
        unique = len(set(walk))
        total_moves = len(walk) - 1
        free, reach = self.free_count, self.reachable_count
        return {
            "total_moves": total_moves,
            "unique_visited": unique,
            "revisit_count": total_moves - (unique - 1),
            "detected_obstacles": len(set(self.detections())),
            "coverage_ratio": unique / free if free else None,
            "reachable_coverage": unique / reach if reach else None,
        }


def trace_from_log(log, curve: HilbertCurve) -> EpisodeTrace:
    trace = EpisodeTrace(k=curve.k, start=log.start, orientation=curve.orientation)
    for i, (kind, w, _frm) in enumerate(log.events, start=1):
        trace.events.append(TraceEvent(i, kind, w, curve.index_to_cell(w)))
    return trace


def execute(
    field: ObstacleField,
    start: int = 0,
    curve: Optional[HilbertCurve] = None,
    graph: Optional[CoverageGraph] = None,
) -> EpisodeTrace:
    """Run one episode on ``field`` and check it against the reachability oracle.

    ``lemma_ok`` is true iff the visited cells equal the free cells reachable
    from the start. ``coverage_ratio`` divides by all free cells and so stays
    below 1.0 when free pockets are walled off; ``reachable_coverage`` divides
    by the reachable ones.
    """
    curve = curve or HilbertCurve(field.k)
    G = graph or build_graph(curve.k, curve.orientation)
    env = FieldEnvironment(field, curve)
    if not 0 <= start < len(curve):
        raise ValidationError(f"start {start} out of range")
    start_cell = curve.index_to_cell(start)
    if field.is_blocked(start_cell):
        raise ConfigurationError(f"start waypoint {start} is blocked")
    log = run_episode(G, env, start)
    trace = trace_from_log(log, curve)
    reachable = reachable_free_set(field, start_cell)
    visited = {curve.index_to_cell(w) for w in log.final_state.V}
    trace.free_count = (1 << (2 * field.k)) - len(field.blocked)
    trace.reachable_count = len(reachable)
    trace.lemma_ok = visited == reachable
    return trace


def check_trace(trace: EpisodeTrace, field: Optional[ObstacleField] = None) -> list[str]:
    """Well-formedness problems of a trace (empty list when sound)."""
    problems = []
    curve = HilbertCurve(trace.k, trace.orientation)
    terminates = [e for e in trace.events if e.kind == "terminate"]
    if len(terminates) != 1 or trace.events[-1].kind != "terminate":
        problems.append("trace must end with exactly one terminate event")
    pos = curve.index_to_cell(trace.start)
    for e in trace.events:
        if curve.index_to_cell(e.waypoint) != e.cell:
            problems.append(f"step {e.step}: cell does not match waypoint")
        if e.kind in ("move", "sense_blocked"):
            if abs(e.cell.x - pos.x) + abs(e.cell.y - pos.y) != 1:
                problems.append(f"step {e.step}: {e.kind} not adjacent to agent at {tuple(pos)}")
            if field is not None and e.kind == "move" and field.is_blocked(e.cell):
                problems.append(f"step {e.step}: moved into blocked cell {tuple(e.cell)}")
            if field is not None and e.kind == "sense_blocked" and not field.is_blocked(e.cell):
                problems.append(f"step {e.step}: reported free cell as blocked")
        if e.kind == "move":
            pos = e.cell
    return problems


def blocked_fraction(field: ObstacleField) -> float:
    return len(field.blocked) / num_waypoints(field.k)


def field_from_indices(k: int, indices: Sequence[int], orientation: str = "identity") -> ObstacleField:
    curve = HilbertCurve(k, orientation)
    cells = tuple(curve.index_to_cell(d) for d in indices)
    return ObstacleField(k, frozenset(cells), (CellList(cells),))


__all__ = [
    "CellList",
    "EpisodeTrace",
    "FieldEnvironment",
    "ObstacleField",
    "Rect",
    "ScenarioSeed",
    "SplitMix64",
    "TraceEvent",
    "ValidationError",
    "blocked_fraction",
    "check_trace",
    "execute",
    "field_from_indices",
    "generate_scenario",
    "rasterize",
    "reachable_free_set",
    "sense",
]
