"""Online next-waypoint strategy for covering a curve with unknown obstacles.

At every decision the agent targets the smallest-index waypoint that borders
the visited region and is not known to be blocked, walks there through
visited (hence known-free) waypoints, and senses the target from the
second-to-last waypoint of that route. A blocked target is remembered and the
decision is repeated from where the agent stands.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Union

from .coverage_graph import CoverageGraph, shortest_route


class ConfigurationError(ValueError):
    """The episode cannot start as configured (e.g. the start is blocked)."""


class ContractViolation(RuntimeError):
    """A caller broke a sensing or state precondition."""


@dataclass(frozen=True)
class MoveAlong:
    route: tuple[int, ...]

    @property
    def target(self) -> int:
        return self.route[-1]


@dataclass(frozen=True)
class Terminated:
    reason: str = "all-reachable-visited"


PlannerDecision = Union[MoveAlong, Terminated]


@dataclass
class AgentState:
    current: int
    V: set[int] = field(default_factory=set)
    O: set[int] = field(default_factory=set)
    pending_route: Optional[tuple[int, ...]] = None
    # Lazy min-heap over the frontier; stale entries (now in V or O) are
    # discarded on read.
    _candidates: list[int] = field(default_factory=list, repr=False)

    @classmethod
    def start(cls, G: CoverageGraph, start: int) -> "AgentState":
        if not 0 <= start < len(G):
            raise ConfigurationError(f"start {start} is not a waypoint of {G!r}")
        state = cls(current=start, V={start})
        state._candidates = sorted(G.neighbors(start))
        return state

    def check(self):
        if self.current not in self.V:
            raise ContractViolation("current waypoint is not in the visited set")
        if self.V & self.O:
            raise ContractViolation("visited and obstacle sets overlap")

    def _min_candidate(self) -> Optional[int]:
        heap = self._candidates
        while heap and (heap[0] in self.V or heap[0] in self.O):
            heapq.heappop(heap)
        return heap[0] if heap else None

    def _admit(self, G: CoverageGraph, p: int):
        self.V.add(p)
        for q in G.neighbors(p):
            if q not in self.V and q not in self.O:
                heapq.heappush(self._candidates, q)


# A selection policy maps (G, state) to the next target or None. The default
# is the minimum-index frontier waypoint, which keeps the agent on the curve
# wherever the curve is free.
SelectionPolicy = Callable[[CoverageGraph, AgentState], Optional[int]]


def min_index_policy(G: CoverageGraph, state: AgentState) -> Optional[int]:
    return state._min_candidate()


def decide(G: CoverageGraph, state: AgentState, policy: SelectionPolicy = min_index_policy) -> PlannerDecision:
    """Pick the next target and the route to it, or report termination."""
    p = policy(G, state)
    if p is None:
        return Terminated()
    route = tuple(shortest_route(G, state.V, state.current, p))
    state.pending_route = route
    return MoveAlong(route)


def on_sense_result(G: CoverageGraph, state: AgentState, p: int, blocked: bool) -> AgentState:
    """Apply the outcome of sensing target ``p`` from the agent's position.

    The agent must stand on the penultimate waypoint of its pending route.
    """
    route = state.pending_route
    if route is None or route[-1] != p:
        raise ContractViolation(f"no pending route towards {p}")
    if len(route) < 2 or route[-2] != state.current:
        raise ContractViolation(f"agent at {state.current} is not at the penultimate waypoint towards {p}")
    if not G.are_adjacent(state.current, p):
        raise ContractViolation(f"waypoint {p} is not adjacent to {state.current}")
    state.pending_route = None
    if blocked or p in state.O:
        state.O.add(p)
    else:
        state._admit(G, p)
        state.current = p
    return state


class Environment(Protocol):
    """What the agent can ask of the world, in curve indices."""

    def sense(self, from_waypoint: int, target: int) -> bool: ...

    def is_blocked(self, waypoint: int) -> bool: ...


@dataclass
class EpisodeLog:
    """Raw event stream of one episode: ``(kind, waypoint, from_waypoint)``."""

    start: int
    events: list[tuple[str, int, int]] = field(default_factory=list)
    final_state: Optional[AgentState] = None


def run_episode(
    G: CoverageGraph,
    env: Environment,
    start: int,
    policy: SelectionPolicy = min_index_policy,
    stop_when: Optional[Callable[[AgentState], bool]] = None,
    state: Optional[AgentState] = None,
) -> EpisodeLog:
    """Drive the strategy until no reachable waypoint is left.

    ``env.sense(from_waypoint, target)`` is only ever asked about a neighbor
    of the agent. ``stop_when`` ends the episode early once it holds after an
    advance; ``state`` resumes from prior knowledge instead of a fresh start.
    """
    if state is None:
        if env.is_blocked(start):
            raise ConfigurationError(f"start waypoint {start} is blocked")
        state = AgentState.start(G, start)
    log = EpisodeLog(start=state.current)
    while True:
        decision = decide(G, state, policy)
        if isinstance(decision, Terminated):
            log.events.append(("terminate", state.current, state.current))
            break
        route = decision.route
        for w in route[1:-1]:
            log.events.append(("move", w, state.current))
            state.current = w
        p = route[-1]
        blocked = p in state.O or env.sense(state.current, p)
        if blocked:
            log.events.append(("sense_blocked", p, state.current))
        else:
            log.events.append(("move", p, state.current))
        on_sense_result(G, state, p, blocked)
        if not blocked and stop_when is not None and stop_when(state):
            break
    log.final_state = state
    return log

