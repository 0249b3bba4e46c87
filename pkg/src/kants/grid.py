"""Toroidal lattice of feature vectors.

Every cell holds a current vector and the frozen vector it was initialised
with. Coordinates wrap modulo the grid dimensions on both axes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
MAGIC = "kants-grid"


class GridFormatError(ValueError):
    """Raised when a grid file cannot be parsed."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


@dataclass(eq=False)
class Grid:
    """X*Y torus of vectors, indexed ``cells[x, y]``."""

    cells: np.ndarray
    initial_cells: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.float64)
        initial = np.array(self.initial_cells, dtype=np.float64)
        if self.cells.ndim != 3 or initial.shape != self.cells.shape:
            raise ValueError("cells and initial_cells must share a (X, Y, nvars) shape")
        initial.setflags(write=False)
        self.initial_cells = initial

    @property
    def width(self) -> int:
        return self.cells.shape[0]

    @property
    def height(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape[0], self.cells.shape[1]

    @property
    def nvars(self) -> int:
        return self.cells.shape[2]

    def copy(self) -> Grid:
        return Grid(self.cells.copy(), self.initial_cells)

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.cells.shape == other.cells.shape
            and np.array_equal(self.cells, other.cells)
            and np.array_equal(self.initial_cells, other.initial_cells)
        )


def default_size(n_samples: int) -> int:
    """Side length giving roughly four cells per ant, never below 10."""
    return max(10, math.ceil(2 * math.sqrt(n_samples)))


def init_random(width: int, height: int, nvars: int, seed=None) -> Grid:
    """Grid whose components are drawn independently from U[0, 1].

    ``seed`` may be anything ``numpy.random.default_rng`` accepts, including
    an existing Generator.
    """
    if width < 3 or height < 3:
        raise ValueError(f"grid must be at least 3x3, got {width}x{height}")
    if nvars < 1:
        raise ValueError(f"nvars must be >= 1, got {nvars}")
    rng = np.random.default_rng(seed)
    cells = rng.random((width, height, nvars))
    return Grid(cells, cells.copy())


def _check_radius(radius, shape, name):
    if 2 * radius + 1 > min(shape):
        raise ValueError(f"{name}={radius} too large for a {shape[0]}x{shape[1]} grid")


@functools.lru_cache(maxsize=None)
def neighborhood_offsets(radius: int, include_center: bool = False) -> np.ndarray:
    """(dx, dy) pairs of the Moore neighbourhood, rows ordered by dy then dx.

    The returned array is shared and read-only.
    """
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    offsets = np.stack([dx.ravel(), dy.ravel()], axis=1)
    if not include_center:
        offsets = offsets[np.any(offsets != 0, axis=1)]
    offsets.setflags(write=False)
    return offsets


def neighborhood_cells(center, radius: int, shape) -> list[tuple[int, int]]:
    """Cells within Chebyshev distance ``radius`` of ``center``, center excluded."""
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    _check_radius(radius, shape, "radius")
    offsets = neighborhood_offsets(radius)
    xs = (center[0] + offsets[:, 0]) % shape[0]
    ys = (center[1] + offsets[:, 1]) % shape[1]
    return list(zip(xs.tolist(), ys.tolist()))


def _block(cells, x, y, r):
    X, Y = cells.shape[0], cells.shape[1]
    if r <= x < X - r and r <= y < Y - r:
        return cells[x - r : x + r + 1, y - r : y + r + 1]
    span = np.arange(-r, r + 1)
    return cells[np.ix_((x + span) % X, (y + span) % Y)]


def centroid(center, cr: int, grid: Grid) -> np.ndarray:
    """Mean of the current vectors in the (2cr+1)^2 block around ``center``."""
    if cr < 0:
        raise ValueError(f"cr must be >= 0, got {cr}")
    _check_radius(cr, grid.shape, "cr")
    block = _block(grid.cells, int(center[0]), int(center[1]), cr)
    return block.reshape(-1, grid.nvars).mean(axis=0)


def centroid_field(grid: Grid, cr: int) -> np.ndarray:
    """Centroid of every cell at once, shape (X, Y, nvars).

    Box sum with wraparound, done separably along each axis.
    """
    if cr < 0:
        raise ValueError(f"cr must be >= 0, got {cr}")
    _check_radius(cr, grid.shape, "cr")
    acc = grid.cells.copy()
    for d in range(1, cr + 1):
        acc += np.roll(grid.cells, d, axis=0) + np.roll(grid.cells, -d, axis=0)
    out = acc.copy()
    for d in range(1, cr + 1):
        out += np.roll(acc, d, axis=1) + np.roll(acc, -d, axis=1)
    return out / (2 * cr + 1) ** 2


def euclidean(a, b) -> float:
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.sqrt(np.dot(diff, diff)))


def mean_abs_distance(a, b) -> float:
    """Per-variable mean of |a - b|; lies in [0, 1] for vectors in the unit cube."""
    return float(np.mean(np.abs(np.asarray(a) - np.asarray(b))))


def reinforcement(ant_vector, ctr, alpha: float) -> float:
    return alpha * (1.0 - mean_abs_distance(ant_vector, ctr))


def update_cell(cell, ant_vector, alpha: float, cr: int, grid: Grid) -> float:
    """Pull the vector at ``cell`` toward ``ant_vector`` in place.

    The step size is ``alpha * (1 - D)`` where D is the mean absolute
    difference between the ant's vector and the centroid around ``cell``.
    Returns the step size used.
    """
    ctr = centroid(cell, cr, grid)
    a = np.asarray(ant_vector, dtype=np.float64)
    r = alpha * (1.0 - float(np.abs(a - ctr).mean()))
    v = grid.cells[cell[0], cell[1]]
    v += r * (a - v)
    return r


def evaporate(grid: Grid, rho: float) -> None:
    """Relax every cell toward its initial vector by a factor ``rho``."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if rho == 1.0:
        grid.cells[...] = grid.initial_cells
        return
    # V + rho (V0 - V): a cell already at V0 stays bit-identical
    grid.cells += rho * (grid.initial_cells - grid.cells)


def export_grid(grid: Grid, path) -> None:
    """Write ``grid`` as CSV.

    Layout: a header line ``kants-grid,X,Y,nvars,version`` followed by one
    row per cell ``x,y,v_0..v_{n-1},v0_0..v0_{n-1}`` (current values, then
    initial values) in x-major order. Floats are written with ``repr`` so
    a re-import is bit-identical.
    """
    lines = [f"{MAGIC},{grid.width},{grid.height},{grid.nvars},{FORMAT_VERSION}"]
    for x in range(grid.width):
        for y in range(grid.height):
            cur = ",".join(repr(float(v)) for v in grid.cells[x, y])
            ini = ",".join(repr(float(v)) for v in grid.initial_cells[x, y])
            lines.append(f"{x},{y},{cur},{ini}")
    Path(path).write_text("\n".join(lines) + "\n")


def import_grid(path) -> Grid:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GridFormatError(path, 0, exc.strerror or str(exc)) from exc
    lines = text.splitlines()
    if not lines:
        raise GridFormatError(path, 1, "empty file")
    head = lines[0].split(",")
    if len(head) != 5 or head[0] != MAGIC:
        raise GridFormatError(path, 1, f"expected '{MAGIC},X,Y,nvars,version' header")
    try:
        width, height, nvars, version = (int(v) for v in head[1:])
    except ValueError:
        raise GridFormatError(path, 1, "non-integer header field") from None
    if version != FORMAT_VERSION:
        raise GridFormatError(path, 1, f"unsupported version {version}")
    if width < 1 or height < 1 or nvars < 1:
        raise GridFormatError(path, 1, "non-positive dimension")

    cells = np.full((width, height, nvars), np.nan)
    initial = np.full((width, height, nvars), np.nan)
    seen = np.zeros((width, height), dtype=bool)
    rows = [(i, ln) for i, ln in enumerate(lines[1:], start=2) if ln.strip()]
    if len(rows) != width * height:
        raise GridFormatError(path, len(lines), f"expected {width * height} cell rows, found {len(rows)}")
    for lineno, line in rows:
        parts = line.split(",")
        if len(parts) != 2 + 2 * nvars:
            raise GridFormatError(path, lineno, f"expected {2 + 2 * nvars} fields, found {len(parts)}")
        try:
            x, y = int(parts[0]), int(parts[1])
            vals = [float(v) for v in parts[2:]]
        except ValueError:
            raise GridFormatError(path, lineno, "unparsable number") from None
        if not (0 <= x < width and 0 <= y < height):
            raise GridFormatError(path, lineno, f"cell ({x},{y}) outside {width}x{height}")
        if seen[x, y]:
            raise GridFormatError(path, lineno, f"duplicate cell ({x},{y})")
        seen[x, y] = True
        cells[x, y] = vals[:nvars]
        initial[x, y] = vals[nvars:]
    return Grid(cells, initial)
