"""
Different resolutions per quadrant
==================================

Each quadrant of the unit square gets its own curve iteration. The agent
covers them in the order BL, TL, TR, BR and crosses between them along
cells it has already visited.
"""

from sfcover.nonuniform import plan_quadrants, quadrant_fields, run_nonuniform
from sfcover.simulator import Rect

plan = plan_quadrants([3, 4, 3, 5])
fields = quadrant_fields(plan, [Rect(0.1, 0.6, 0.3, 0.7), Rect(0.7, 0.2, 0.8, 0.45)])
trace = run_nonuniform(plan, fields)

for q in plan.order:
    r = trace.quadrants[q]
    print(f"{q}: k={r.k} entry={r.entry} visited {len(r.visited)}/{r.reachable} reachable")

for step in trace.transfers:
    print(f"transfer {step.terminal} -> {step.edge_waypoint} -> {step.entry}, {step.hops} hops")

print(trace.metrics)
