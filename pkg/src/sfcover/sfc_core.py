"""Hilbert curve index mathematics.

The curve is pinned to one of the eight symmetric Hilbert orientations: index 0
sits in the bottom-left cell and index ``4**k - 1`` in the bottom-right cell,
with ``x`` growing to the right and ``y`` growing upwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

MAX_ITERATION = 15

# Symmetries of the square used to re-orient a curve inside a sub-region.
ORIENTATIONS = ("identity", "transpose", "antitranspose")


class Cell(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class SensingSpec:
    region_side: float
    sensor_radius: float

    def __post_init__(self):
        if not self.region_side > 0:
            raise ValueError(f"region_side must be positive, got {self.region_side}")
        if not self.sensor_radius > 0:
            raise ValueError(f"sensor_radius must be positive, got {self.sensor_radius}")


def check_iteration(k: int) -> int:
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise ValueError(f"iteration must be a non-negative integer, got {k!r}")
    if k > MAX_ITERATION:
        raise OverflowError(f"iteration {k} exceeds cap {MAX_ITERATION}")
    return k


def side(k: int) -> int:
    return 1 << k


def num_waypoints(k: int) -> int:
    return 1 << (2 * k)


def index_to_cell(k: int, d: int) -> Cell:
    """Map curve position ``d`` to its grid cell at iteration ``k``."""
    check_iteration(k)
    if not 0 <= d < num_waypoints(k):
        raise IndexError(f"index {d} out of range for iteration {k}")
    x = y = 0
    s = 1
    n = side(k)
    while s < n:
        rx = 1 & (d >> 1)
        ry = 1 & (d ^ rx)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        d >>= 2
        s <<= 1
    return Cell(x, y)


def cell_to_index(k: int, cell) -> int:
    """Inverse of :func:`index_to_cell`."""
    check_iteration(k)
    x, y = cell
    n = side(k)
    if not (0 <= x < n and 0 <= y < n):
        raise IndexError(f"cell {tuple(cell)} outside {n}x{n} grid")
    d = 0
    s = n >> 1
    while s > 0:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x = n - 1 - x
                y = n - 1 - y
            x, y = y, x
        s >>= 1
    return d


def _reorient(n: int, cell, orientation: str) -> Cell:
    x, y = cell
    if orientation == "identity":
        return Cell(x, y)
    if orientation == "transpose":
        return Cell(y, x)
    if orientation == "antitranspose":
        return Cell(n - 1 - y, n - 1 - x)
    raise ValueError(f"unknown orientation {orientation!r}")


# Curves up to this iteration keep a lookup table in both directions.
_TABLE_MAX_K = 8


@lru_cache(maxsize=32)
def _tables(k: int, orientation: str) -> tuple[tuple[Cell, ...], dict]:
    n = side(k)
    cells = tuple(_reorient(n, index_to_cell(k, d), orientation) for d in range(num_waypoints(k)))
    return cells, {c: d for d, c in enumerate(cells)}


@dataclass(frozen=True)
class HilbertCurve:
    """A Hilbert curve of iteration ``k`` inside its own ``2**k`` square grid.

    ``orientation`` applies a symmetry of the square after the canonical
    mapping. All supported symmetries are involutions, so the same transform
    serves both directions.
    """

    k: int
    orientation: str = "identity"

    def __post_init__(self):
        check_iteration(self.k)
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"unknown orientation {self.orientation!r}")

    @property
    def side(self) -> int:
        return side(self.k)

    def __len__(self) -> int:
        return num_waypoints(self.k)

    def index_to_cell(self, d: int) -> Cell:
        if self.k <= _TABLE_MAX_K and 0 <= d:
            try:
                return _tables(self.k, self.orientation)[0][d]
            except IndexError:
                pass
        return _reorient(self.side, index_to_cell(self.k, d), self.orientation)

    def cell_to_index(self, cell) -> int:
        if self.k <= _TABLE_MAX_K:
            d = _tables(self.k, self.orientation)[1].get(tuple(cell))
            if d is not None:
                return d
        n = self.side
        x, y = cell
        if not (0 <= x < n and 0 <= y < n):
            raise IndexError(f"cell {tuple(cell)} outside {n}x{n} grid")
        return cell_to_index(self.k, _reorient(n, cell, self.orientation))

    def cells(self) -> list[Cell]:
        if self.k <= _TABLE_MAX_K:
            return list(_tables(self.k, self.orientation)[0])
        return [self.index_to_cell(d) for d in range(len(self))]


def half_diagonal(region_side: float, k: int) -> float:
    """Distance from a cell center to its corners at iteration ``k``."""
    return region_side * math.sqrt(2) / 2 ** (k + 1)


def select_iteration(spec: SensingSpec) -> int:
    """Smallest iteration whose cells are fully covered by the sensor.

    A sensor of radius ``s`` at a cell center covers the cell iff
    ``s >= L * sqrt(2) / 2**(k+1)``, which gives
    ``k = max(0, ceil(log2(L / (s * sqrt(2)))))``. The closed form is
    evaluated and then nudged by one step either way so float rounding at
    exact ties cannot shift the answer.
    """
    L, s = spec.region_side, spec.sensor_radius
    ratio = L / (s * math.sqrt(2))
    k = max(0, math.ceil(math.log2(ratio)))
    tol = 1e-12 * s
    while k > 0 and half_diagonal(L, k - 1) <= s + tol:
        k -= 1
    while half_diagonal(L, k) > s + tol:
        k += 1
    return k
