import random

import pytest

from oracles import boxes_touch, grammar_curve
from stitch_checks import ORIGIN, box, check_transfer_rules
from sfcover.nonuniform import (
    QUADRANTS,
    TransferImpossible,
    plan_quadrants,
    quadrant_fields,
    run_nonuniform,
)
from sfcover.planner import ConfigurationError
from sfcover.simulator import Rect, ValidationError


def test_plan_quadrants_order_and_sizes():
    plan = plan_quadrants([3, 4, 3, 5])
    assert plan.order == ("BL", "TL", "TR", "BR")
    assert [plan.waypoints(q) for q in plan.order] == [64, 256, 64, 1024]
    assert plan_quadrants({"BL": 3, "TL": 3, "TR": 3, "BR": 3}).order == QUADRANTS


@pytest.mark.parametrize("layout", [[3], [3, 3, 3], {"BL": 3}, [3, 3, 3, 16], [3, 3, -1, 3]])
def test_plan_quadrants_rejects(layout):
    with pytest.raises(ValidationError):
        plan_quadrants(layout)


def test_consecutive_quadrants_share_edges():
    order = plan_quadrants([1, 1, 1, 1]).order
    for a, b in zip(order, order[1:]):
        (ax, ay), (bx, by) = ORIGIN[a], ORIGIN[b]
        assert abs(ax - bx) + abs(ay - by) == 0.5


def test_equal_iterations_reproduce_next_curve():
    plan = plan_quadrants([2, 2, 2, 2])
    t = run_nonuniform(plan, quadrant_fields(plan, []))
    cells = [box(plan, (q, plan.curve(q).index_to_cell(w)))[:2] for q, w in t.walk()]
    expected = [(x / 8, y / 8) for x, y in grammar_curve(3)]
    assert cells == expected
    assert t.metrics["unique_visited"] == 64
    # zero-length transfers: B = A and C is the facing cell
    for step in t.transfers:
        assert step.edge_waypoint == step.terminal
        assert step.hops == 1
        assert boxes_touch(box(plan, step.terminal), box(plan, step.entry))


@pytest.mark.parametrize("layout", [[3, 4, 3, 5], [2, 2, 3, 3], [4, 3, 3, 2], [1, 3, 2, 4]])
def test_mixed_iterations_cover_everything(layout):
    plan = plan_quadrants(layout)
    t = run_nonuniform(plan, quadrant_fields(plan, []))
    assert t.metrics["unique_visited"] == sum(4**k for k in layout)
    assert t.lemma_ok
    assert t.metrics["coverage_ratio"] == 1.0


def test_move_count_identity_when_entries_are_curve_starts():
    plan = plan_quadrants([4, 3, 3, 2])
    t = run_nonuniform(plan, quadrant_fields(plan, []))
    assert all(r.entry == 0 for r in t.quadrants.values())
    hops = sum(s.hops for s in t.transfers)
    assert t.metrics["total_moves"] == sum(4**k - 1 for k in (4, 3, 3, 2)) + hops


def test_move_count_with_offcurve_entry():
    # Coarse-to-fine entry: the nearest facing cells tie and the smaller index
    # is 1, so the quadrant costs one extra move (1 -> 0 then back past 1).
    plan = plan_quadrants([3, 4, 3, 5])
    t = run_nonuniform(plan, quadrant_fields(plan, []))
    assert t.quadrants["BR"].entry == 1
    hops = sum(s.hops for s in t.transfers)
    assert t.metrics["total_moves"] == sum(4**k - 1 for k in (3, 4, 3, 5)) + hops + 1


@pytest.mark.parametrize("seed", range(12))
def test_random_obstacles_transfer_rules(seed):
    rng = random.Random(seed)
    layout = [rng.randint(1, 4) for _ in range(4)]
    plan = plan_quadrants(layout)
    rects = []
    for _ in range(rng.randint(2, 6)):
        x0, y0 = rng.uniform(0, 0.9), rng.uniform(0, 0.9)
        rects.append(Rect(x0, y0, x0 + rng.uniform(0.02, 0.12), y0 + rng.uniform(0.02, 0.12)))
    fields = quadrant_fields(plan, rects)
    if fields["BL"].is_blocked(plan.curve("BL").index_to_cell(0)):
        with pytest.raises(ConfigurationError):
            run_nonuniform(plan, fields)
        return
    t = run_nonuniform(plan, fields)
    assert t.lemma_ok
    check_transfer_rules(plan, fields, t)


def test_transfer_walks_to_edge_when_terminal_is_interior():
    # Blocking the top-left corner of BL makes its walk end away from the edge
    # it shares with TL.
    plan = plan_quadrants([2, 2, 2, 2])
    fields = quadrant_fields(plan, [Rect(0.0, 0.25, 0.25, 0.5)])
    t = run_nonuniform(plan, fields)
    first = t.transfers[0]
    assert first.terminal != first.edge_waypoint
    assert first.hops > 1
    check_transfer_rules(plan, fields, t)
    assert t.lemma_ok


def test_walled_last_quadrant():
    plan = plan_quadrants([2, 2, 2, 2])
    walls = [Rect(0.5, 0.375, 1.0, 0.5), Rect(0.5, 0.0, 0.625, 0.5)]
    fields = quadrant_fields(plan, walls)
    t = run_nonuniform(plan, fields)
    assert t.quadrants["BR"].error is not None
    assert t.metrics["unreachable_quadrants"] == ["BR"]
    for q in ("BL", "TL", "TR"):
        assert t.quadrants[q].lemma_ok
        assert len(t.quadrants[q].visited) == 16
    assert any(e.kind == "transfer_failed" for e in t.events)


def test_walled_middle_quadrant_is_skipped():
    plan = plan_quadrants([2, 2, 2, 2])
    # TR walled along its edges with TL (x = 0.5) and BR (y = 0.5)
    walls = [Rect(0.5, 0.5, 0.625, 1.0), Rect(0.5, 0.5, 1.0, 0.625)]
    fields = quadrant_fields(plan, walls)
    t = run_nonuniform(plan, fields)
    assert t.quadrants["TR"].error is not None
    br = t.transfers[-1]
    assert br.entry[0] == "BR" and br.edge_waypoint[0] == "BL"
    assert len(t.quadrants["BR"].visited) == 16
    assert t.lemma_ok


def test_blocked_facing_cell_falls_back():
    plan = plan_quadrants([2, 2, 2, 2])
    # TL's first cell (0,0) -> region box [0, .125] x [.5, .625]
    fields = quadrant_fields(plan, [Rect(0.0, 0.5, 0.125, 0.625)])
    t = run_nonuniform(plan, fields)
    step = t.transfers[0]
    assert step.rejected == (("TL", (0, 0)),)
    assert step.entry == ("TL", (1, 0))
    assert t.lemma_ok


def test_restart_flag_returns_to_curve_start():
    plan = plan_quadrants([3, 4, 3, 5], restart={"BR": True})
    t = run_nonuniform(plan, quadrant_fields(plan, []))
    br = [e.waypoint for e in t.events if e.quadrant == "BR" and e.kind == "move"]
    assert br[0] == 1
    i = br.index(0)
    assert br[i:] == list(range(len(br[i:])))
    assert t.quadrants["BR"].lemma_ok
    assert t.metrics["unique_visited"] == 64 + 256 + 64 + 1024


def test_blocked_global_start():
    plan = plan_quadrants([2, 2, 2, 2])
    fields = quadrant_fields(plan, [Rect(0.0, 0.0, 0.1, 0.1)])
    with pytest.raises(ConfigurationError):
        run_nonuniform(plan, fields)


def test_transfer_impossible_is_an_error_type():
    assert issubclass(TransferImpossible, RuntimeError)


def test_quadrants_fixture(quadrants_path):
    from sfcover.formats import load_scenario

    sc = load_scenario(quadrants_path)
    t = run_nonuniform(sc.plan, sc.quadrant_fields)
    assert t.lemma_ok
    check_transfer_rules(sc.plan, sc.quadrant_fields, t)
    tl_end = sc.plan.nominal_endpoints("TL")[1]
    assert t.transfers[1].terminal != ("TL", tl_end)
