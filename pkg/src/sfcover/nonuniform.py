"""Non-uniform coverage over a 2x2 quadrant split with per-quadrant iterations.

Each quadrant carries its own Hilbert curve, oriented the way the first-level
sub-curves of a Hilbert curve are, so with equal iterations the stitched walk
is exactly the next-iteration curve. Quadrants are covered in the order
bottom-left, top-left, top-right, bottom-right. Between quadrants the agent
walks (through visited cells) to a waypoint on the shared edge closest to
where it stopped, then steps into the nearest facing waypoint of the next
quadrant, sensing it first.

Geometry is done in exact integers: the quadrant side is ``2**K`` units for
``K`` the finest iteration in the layout, and centers are kept doubled.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .coverage_graph import build_graph, shortest_route
from .planner import AgentState, ConfigurationError, run_episode
from .simulator import FieldEnvironment, ObstacleField, Rect, ValidationError, _rect_cells, reachable_free_set
from .sfc_core import Cell, HilbertCurve, check_iteration, num_waypoints

QUADRANTS = ("BL", "TL", "TR", "BR")
ORIGINS = {"BL": (0, 0), "TL": (0, 1), "TR": (1, 1), "BR": (1, 0)}
ORIENTATION = {"BL": "transpose", "TL": "identity", "TR": "identity", "BR": "antitranspose"}
SHARED_EDGES = {
    frozenset(("BL", "TL")),
    frozenset(("TL", "TR")),
    frozenset(("TR", "BR")),
    frozenset(("BL", "BR")),
}


class TransferImpossible(RuntimeError):
    """No free waypoint pair connects the visited area to the next quadrant."""


@dataclass(frozen=True)
class QuadrantPlan:
    layout: Mapping[str, int]
    order: tuple[str, ...] = QUADRANTS
    restart: Mapping[str, bool] = field(default_factory=dict)

    def curve(self, q: str) -> HilbertCurve:
        return HilbertCurve(self.layout[q], ORIENTATION[q])

    def waypoints(self, q: str) -> int:
        return num_waypoints(self.layout[q])

    def nominal_endpoints(self, q: str) -> tuple[Cell, Cell]:
        """Local cells of the first and last waypoint of quadrant ``q``."""
        c = self.curve(q)
        return c.index_to_cell(0), c.index_to_cell(len(c) - 1)


def plan_quadrants(layout, restart: Optional[Mapping[str, bool]] = None) -> QuadrantPlan:
    """Validate a 2x2 layout of iterations.

    ``layout`` is a mapping keyed by ``BL, TL, TR, BR`` or a sequence of four
    iterations in that order.
    """
    if isinstance(layout, Mapping):
        if set(layout) != set(QUADRANTS):
            raise ValidationError(f"layout must name exactly the quadrants {QUADRANTS}")
        lay = {q: layout[q] for q in QUADRANTS}
    else:
        values = list(layout)
        if len(values) != 4:
            raise ValidationError("layout must be 2x2: four iterations in BL, TL, TR, BR order")
        lay = dict(zip(QUADRANTS, values))
    for q, k in lay.items():
        try:
            check_iteration(k)
        except (ValueError, OverflowError) as e:
            raise ValidationError(f"quadrant {q}: {e}") from None
    restart = dict(restart or {})
    if not set(restart) <= set(QUADRANTS):
        raise ValidationError("restart flags must be keyed by quadrant names")
    return QuadrantPlan(lay, QUADRANTS, {q: bool(restart.get(q, False)) for q in QUADRANTS})


# --- geometry ---------------------------------------------------------------


class _Geometry:
    def __init__(self, plan: QuadrantPlan):
        self.plan = plan
        self.K = max(plan.layout.values())
        self.h = 1 << self.K  # quadrant side in fine units

    def scale(self, q: str) -> int:
        return 1 << (self.K - self.plan.layout[q])

    def box(self, q: str, cell) -> tuple[int, int, int, int]:
        s = self.scale(q)
        ox, oy = ORIGINS[q]
        x0 = ox * self.h + cell[0] * s
        y0 = oy * self.h + cell[1] * s
        return x0, y0, x0 + s, y0 + s

    def center2(self, q: str, cell) -> tuple[int, int]:
        x0, y0, x1, y1 = self.box(q, cell)
        return x0 + x1, y0 + y1

    def dist2(self, a, b) -> int:
        (qa, ca), (qb, cb) = a, b
        ax, ay = self.center2(qa, ca)
        bx, by = self.center2(qb, cb)
        return (ax - bx) ** 2 + (ay - by) ** 2

    def touching(self, a, b) -> bool:
        """Do the two cells share a boundary segment of positive length?"""
        ax0, ay0, ax1, ay1 = self.box(*a)
        bx0, by0, bx1, by1 = self.box(*b)
        if ax1 == bx0 or bx1 == ax0:
            return min(ay1, by1) > max(ay0, by0)
        if ay1 == by0 or by1 == ay0:
            return min(ax1, bx1) > max(ax0, bx0)
        return False

    def edge_cells(self, q: str, other: str) -> list[Cell]:
        """Cells of ``q`` lying along the edge ``q`` shares with ``other``."""
        n = 1 << self.plan.layout[q]
        (qx, qy), (px, py) = ORIGINS[q], ORIGINS[other]
        if qx == px:
            y = n - 1 if py > qy else 0
            return [Cell(x, y) for x in range(n)]
        x = n - 1 if px > qx else 0
        return [Cell(x, y) for y in range(n)]

    def facing(self, node, q: str) -> list[Cell]:
        """Cells of quadrant ``q`` whose edge overlaps the cell ``node``."""
        p = node[0]
        return [c for c in self.edge_cells(q, p) if self.touching(node, (q, c))]

    def neighbors(self, node) -> list[tuple[str, Cell]]:
        q, (x, y) = node
        n = 1 << self.plan.layout[q]
        out = []
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < n and 0 <= ny < n:
                out.append((q, Cell(nx, ny)))
        for other in QUADRANTS:
            if other != q and frozenset((q, other)) in SHARED_EDGES:
                if (x, y) in self.edge_cells(q, other):
                    out.extend((other, c) for c in self.facing(node, other))
        return out


def quadrant_fields(plan: QuadrantPlan, shapes: Iterable, region_side: float = 1.0) -> dict[str, ObstacleField]:
    """Rasterize region-unit rectangles into each quadrant's local grid."""
    shapes = tuple(shapes)
    half = region_side / 2
    fields = {}
    for q in QUADRANTS:
        k = plan.layout[q]
        n = 1 << k
        cs = half / n
        ox, oy = ORIGINS[q]
        blocked: set[Cell] = set()
        for r in shapes:
            if not isinstance(r, Rect):
                raise ValidationError(f"region shapes must be rectangles, got {r!r}")
            if r.x0 < 0 or r.y0 < 0 or r.x1 > region_side or r.y1 > region_side:
                raise ValidationError(f"rectangle {r} leaves the region")
            local = Rect((r.x0 - ox * half) / cs, (r.y0 - oy * half) / cs, (r.x1 - ox * half) / cs, (r.y1 - oy * half) / cs)
            blocked |= _rect_cells(local, n)
        fields[q] = ObstacleField(k, frozenset(blocked), shapes)
    return fields


# --- stitched traces --------------------------------------------------------


@dataclass(frozen=True)
class StitchedEvent:
    step: int
    kind: str  # move | sense_blocked | terminate | transfer_failed
    quadrant: str
    waypoint: int
    cell: Cell


@dataclass(frozen=True)
class TransferStep:
    terminal: tuple[str, Cell]  # A
    edge_waypoint: tuple[str, Cell]  # B
    entry: tuple[str, Cell]  # C
    route: tuple[tuple[str, Cell], ...]  # cells walked from A to B inclusive
    rejected: tuple[tuple[str, Cell], ...] = ()

    @property
    def hops(self) -> int:
        return len(self.route)


@dataclass
class QuadrantResult:
    quadrant: str
    k: int
    entry: Optional[int] = None
    visited: frozenset[int] = frozenset()
    reachable: int = 0
    free: int = 0
    lemma_ok: Optional[bool] = None
    error: Optional[str] = None


@dataclass
class StitchedTrace:
    plan: QuadrantPlan
    start: tuple[str, int]
    events: list[StitchedEvent] = field(default_factory=list)
    transfers: list[TransferStep] = field(default_factory=list)
    quadrants: dict[str, QuadrantResult] = field(default_factory=dict)

    def walk(self) -> list[tuple[str, int]]:
        return [self.start] + [(e.quadrant, e.waypoint) for e in self.events if e.kind == "move"]

    @property
    def lemma_ok(self) -> bool:
        return all(r.lemma_ok for r in self.quadrants.values() if r.error is None)

    @property
    def metrics(self) -> dict:
        walk = self.walk()
        unique = len(set(walk))
        reachable = sum(r.reachable for r in self.quadrants.values() if r.error is None)
        free = sum(r.free for r in self.quadrants.values())
        return {
            "total_moves": len(walk) - 1,
            "unique_visited": unique,
            "revisit_count": len(walk) - unique,
            "detected_obstacles": len({(e.quadrant, e.waypoint) for e in self.events if e.kind == "sense_blocked"}),
            "coverage_ratio": unique / free if free else None,
            "reachable_coverage": unique / reachable if reachable else None,
            "transfer_hops": sum(t.hops for t in self.transfers),
            "unreachable_quadrants": [q for q, r in self.quadrants.items() if r.error is not None],
        }


class _Stitcher:
    def __init__(self, plan: QuadrantPlan, fields: Mapping[str, ObstacleField]):
        for q in QUADRANTS:
            if fields[q].k != plan.layout[q]:
                raise ValidationError(f"field for {q} has iteration {fields[q].k}, plan says {plan.layout[q]}")
        self.plan = plan
        self.fields = fields
        self.geo = _Geometry(plan)
        self.curves = {q: plan.curve(q) for q in QUADRANTS}
        self.visited: set[tuple[str, Cell]] = set()
        self.known_blocked: dict[str, set[int]] = {q: set() for q in QUADRANTS}
        self.position: Optional[tuple[str, Cell]] = None
        self.trace: Optional[StitchedTrace] = None

    def _emit(self, kind: str, node):
        q, cell = node
        step = len(self.trace.events) + 1
        w = self.curves[q].cell_to_index(cell)
        self.trace.events.append(StitchedEvent(step, kind, q, w, Cell(*cell)))

    def _order_key(self, node):
        q, cell = node
        return QUADRANTS.index(q), self.curves[q].cell_to_index(cell)

    def route_through_visited(self, src, dst) -> list:
        """Fewest-hop route from ``src`` to ``dst`` over visited cells (BFS)."""
        if src == dst:
            return [src]
        prev = {src: None}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in sorted(self.geo.neighbors(u), key=self._order_key):
                if v in prev or v not in self.visited:
                    continue
                prev[v] = u
                if v == dst:
                    path = [v]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return path[::-1]
                queue.append(v)
        raise TransferImpossible(f"{dst} not reachable through visited cells")

    def transfer(self, target: str) -> TransferStep:
        A = self.position
        geo = self.geo
        covered = {q for q, _ in self.visited}
        edge_nodes = []
        for p in covered:
            if frozenset((p, target)) in SHARED_EDGES:
                edge_nodes += [(p, c) for c in geo.edge_cells(p, target) if (p, c) in self.visited]
        edge_nodes.sort(key=lambda b: (geo.dist2(A, b), self._order_key(b)))
        rejected = []
        walked = [A]
        for B in edge_nodes:
            candidates = [(target, c) for c in geo.facing(B, target)]
            candidates.sort(key=lambda c: (geo.dist2(B, c), self._order_key(c)))
            for C in candidates:
                w = self.curves[target].cell_to_index(C[1])
                if w in self.known_blocked[target]:
                    continue
                route = self.route_through_visited(self.position, B)
                for node in route[1:]:
                    self._emit("move", node)
                walked += route[1:]
                self.position = B
                if self.fields[target].is_blocked(C[1]):
                    self._emit("sense_blocked", C)
                    self.known_blocked[target].add(w)
                    rejected.append(C)
                    continue
                self._emit("move", C)
                self.position = C
                return TransferStep(A, B, C, tuple(walked), tuple(rejected))
        raise TransferImpossible(f"no free waypoint connects the visited area to quadrant {target}")

    def cover(self, q: str, entry: int, prior: Optional[set[int]] = None) -> QuadrantResult:
        curve = self.curves[q]
        G = build_graph(curve.k, curve.orientation)
        env = FieldEnvironment(self.fields[q], curve)
        result = QuadrantResult(q, curve.k, entry=entry, free=len(curve) - len(self.fields[q].blocked))
        state = AgentState.start(G, entry)
        state.O |= self.known_blocked[q]
        seen: set[int] = set()
        if self.plan.restart.get(q) and entry != 0:
            log = run_episode(G, env, entry, stop_when=lambda s: 0 in s.V, state=state)
            self._replay(q, log)
            seen |= log.final_state.V
            if 0 in log.final_state.V:
                state = AgentState.start(G, 0)
                state.O |= log.final_state.O
                route = shortest_route(G, seen, log.final_state.current, 0)
                for w in route[1:]:
                    self._emit("move", (q, curve.index_to_cell(w)))
                self.position = (q, curve.index_to_cell(0))
            else:
                state = None
        if state is not None:
            log = run_episode(G, env, state.current, state=state)
            self._replay(q, log)
            seen |= log.final_state.V
            self.known_blocked[q] |= log.final_state.O
        reachable = reachable_free_set(self.fields[q], curve.index_to_cell(entry))
        result.visited = frozenset(seen)
        result.reachable = len(reachable)
        result.lemma_ok = {curve.index_to_cell(w) for w in seen} == reachable
        return result

    def _replay(self, q: str, log):
        curve = self.curves[q]
        for kind, w, _ in log.events:
            node = (q, curve.index_to_cell(w))
            self._emit(kind, node)
            if kind == "move":
                self.visited.add(node)
                self.position = node
        for w in log.final_state.V:
            self.visited.add((q, curve.index_to_cell(w)))


def run_nonuniform(plan: QuadrantPlan, fields: Mapping[str, ObstacleField]) -> StitchedTrace:
    """Cover the quadrants in plan order, stitching them with edge transfers.

    A quadrant that cannot be entered is recorded with its error and skipped;
    the next quadrant is then approached from everything visited so far.
    """
    st = _Stitcher(plan, fields)
    first = plan.order[0]
    curve = st.curves[first]
    start_cell = curve.index_to_cell(0)
    if fields[first].is_blocked(start_cell):
        raise ConfigurationError(f"start waypoint 0 of quadrant {first} is blocked")
    st.trace = StitchedTrace(plan, (first, 0))
    st.position = (first, start_cell)
    st.visited.add(st.position)
    st.trace.quadrants[first] = st.cover(first, 0)
    for q in plan.order[1:]:
        try:
            step = st.transfer(q)
        except TransferImpossible as e:
            free = plan.waypoints(q) - len(fields[q].blocked)
            st.trace.quadrants[q] = QuadrantResult(q, plan.layout[q], free=free, error=str(e))
            st.trace.events.append(StitchedEvent(len(st.trace.events) + 1, "transfer_failed", q, -1, Cell(-1, -1)))
            continue
        st.trace.transfers.append(step)
        st.visited.add(step.entry)
        entry = st.curves[q].cell_to_index(step.entry[1])
        st.trace.quadrants[q] = st.cover(q, entry)
    return st.trace
