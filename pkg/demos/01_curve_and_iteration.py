"""
Choosing a curve and reading it
===============================

A sensor of radius ``s`` placed at a cell center sees the whole cell once the
half diagonal of the cell is at most ``s``. That fixes the iteration.
"""

import numpy as np

from sfcover import HilbertCurve, SensingSpec, select_iteration

# a 10 m field and a few sensor radii
for s in (2.0, 0.9, 0.3):
    k = select_iteration(SensingSpec(region_side=10.0, sensor_radius=s))
    print(f"radius {s:>4} m -> iteration {k}, {4**k} waypoints")

# The iteration-2 curve as a grid of indices (row 0 printed last, so the
# picture has y pointing up). The walk starts bottom-left, ends bottom-right.
curve = HilbertCurve(2)
grid = np.zeros((curve.side, curve.side), dtype=int)
for d, (x, y) in enumerate(curve.cells()):
    grid[y, x] = d
print(np.flipud(grid))

# consecutive waypoints are always one cell apart
cells = np.array(curve.cells())
print("max step:", np.abs(np.diff(cells, axis=0)).sum(axis=1).max())
