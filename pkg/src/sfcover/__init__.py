"""Hilbert-curve coverage planning with online obstacle evasion."""

from .coverage_graph import CoverageGraph, RoutingError, build_graph, frontier, shortest_route
from .nonuniform import plan_quadrants, quadrant_fields, run_nonuniform
from .planner import AgentState, ConfigurationError, ContractViolation, MoveAlong, Terminated, decide, on_sense_result, run_episode
from .sfc_core import Cell, HilbertCurve, SensingSpec, cell_to_index, index_to_cell, select_iteration
from .simulator import (
    CellList,
    EpisodeTrace,
    ObstacleField,
    Rect,
    ScenarioSeed,
    ValidationError,
    execute,
    generate_scenario,
    rasterize,
    reachable_free_set,
)

__version__ = "0.1.0"
