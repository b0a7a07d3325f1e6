"""
Evading an obstacle on the iteration-3 curve
============================================

The shipped ``walkthrough_k3`` scenario puts a 2x2 block where the curve
passes waypoints 22-25. The agent follows the curve until it senses the
block, then always heads for the lowest-numbered frontier waypoint it has
not ruled out.
"""

import os
from importlib import resources
from pathlib import Path

from sfcover.formats import load_scenario, write_trace
from sfcover.render import RenderSpec, render_trace
from sfcover.simulator import execute

path = resources.files("sfcover") / "data" / "walkthrough_k3.json"
sc = load_scenario(Path(str(path)))
trace = execute(sc.field, sc.start)

# Replay the first 40 events with the agent's position.
pos = trace.start
for e in trace.events[:40]:
    if e.kind == "sense_blocked":
        print(f"at {pos:2d}: {e.waypoint} is blocked")
    elif e.kind == "move":
        pos = e.waypoint

print("first visits:", trace.visit_order()[:30])
print(trace.metrics)

out = Path(os.environ.get("SFCOVER_OUT", "demo_out"))
out.mkdir(exist_ok=True)
(out / "walkthrough.trace.csv").write_text(write_trace(trace, sc.id))
(out / "walkthrough.svg").write_text(render_trace(trace, RenderSpec(labels=True), sc.field))
print("wrote", out / "walkthrough.svg")
