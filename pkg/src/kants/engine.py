"""Training loop: samples become ants that walk a toroidal grid of vectors.

Each iteration has three phases. Every ant picks a destination among the
cells around it using the grid as it stood at the start of the iteration,
then every ant pulls the cell it landed on toward its own vector, then the
whole grid relaxes toward its initial state.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import grid as gridmod
from .grid import Grid


SIGMA_FROM_ANT = "ant"
SIGMA_FROM_CELL = "cell"


@dataclass(frozen=True)
class KantsParams:
    beta: float = 8.0
    delta: float = 1.0
    q0: float = 0.0
    alpha: float = 1.0
    rho: float = 0.01
    nr0: int = 1
    cr: int = 3
    iterations: int = 100
    grid_x: int | None = None
    grid_y: int | None = None
    seed: int = 0
    # which vector is compared with candidate centroids: the ant's sample or
    # the vector of the cell the ant stands on
    sigma_source: str = SIGMA_FROM_ANT

    def replace(self, **changes) -> KantsParams:
        return dataclasses.replace(self, **changes)

    def grid_shape(self, n_samples: int) -> tuple[int, int]:
        side = gridmod.default_size(n_samples)
        return (self.grid_x or side, self.grid_y or side)

    def validate(self, n_samples: int | None = None) -> None:
        problems = []
        if self.beta < 0:
            problems.append(f"beta must be >= 0 (got {self.beta})")
        if self.delta < 0:
            problems.append(f"delta must be >= 0 (got {self.delta})")
        if not 0 <= self.q0 <= 1:
            problems.append(f"q0 must lie in [0, 1] (got {self.q0})")
        if not 0 < self.alpha <= 1:
            problems.append(f"alpha must lie in (0, 1] (got {self.alpha})")
        if not 0 <= self.rho <= 1:
            problems.append(f"rho must lie in [0, 1] (got {self.rho})")
        if self.nr0 < 1:
            problems.append(f"nr0 must be >= 1 (got {self.nr0})")
        if self.cr < 0:
            problems.append(f"cr must be >= 0 (got {self.cr})")
        if self.iterations < 0:
            problems.append(f"iterations must be >= 0 (got {self.iterations})")
        if self.sigma_source not in (SIGMA_FROM_ANT, SIGMA_FROM_CELL):
            problems.append(f"sigma_source must be 'ant' or 'cell' (got {self.sigma_source!r})")
        for name in ("grid_x", "grid_y"):
            v = getattr(self, name)
            if v is not None and v < 3:
                problems.append(f"{name} must be >= 3 (got {v})")
        if n_samples is not None and not problems:
            side = min(self.grid_shape(n_samples))
            if 2 * self.nr0 + 1 > side:
                problems.append(f"nr0={self.nr0} does not fit a grid of side {side}")
            if 2 * self.cr + 1 > side:
                problems.append(f"cr={self.cr} does not fit a grid of side {side}")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass
class Ant:
    vector: np.ndarray
    label: object
    position: tuple[int, int]


@dataclass
class TrainedModel:
    grid: Grid
    positions: np.ndarray  # (n_ants, 2) int, columns x, y
    vectors: np.ndarray  # (n_ants, nvars)
    labels: np.ndarray  # (n_ants,)
    params: KantsParams
    history: list = field(default_factory=list)  # [(iteration, positions)]

    @property
    def ants(self) -> list[Ant]:
        return [
            Ant(v, lab, (int(p[0]), int(p[1])))
            for v, lab, p in zip(self.vectors, self.labels, self.positions)
        ]

    def __eq__(self, other):
        if not isinstance(other, TrainedModel):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.vectors, other.vectors)
            and list(self.labels) == list(other.labels)
            and self.params == other.params
            and len(self.history) == len(other.history)
            and all(
                i == j and np.array_equal(p, q)
                for (i, p), (j, q) in zip(self.history, other.history)
            )
        )


def weight(sigma, beta: float, delta: float):
    """Pheromone weighting ``(1 + delta / (1 + sigma * delta)) ** beta``.

    Works elementwise on arrays.
    """
    return (1.0 + delta / (1.0 + np.asarray(sigma) * delta)) ** beta


def radius_schedule(nr0: int, t: int, total: int) -> int:
    """Linear decay from ``nr0`` at t=0 down to 1 on the last iteration."""
    if total <= 0:
        return max(1, nr0)
    if t >= total - 1:
        return 1
    return max(1, round(nr0 * (1 - t / total)))


def move_probabilities(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    return w / w.sum()


def candidate_cells(position, nr: int, shape) -> np.ndarray:
    """Candidate destinations as an (m, 2) array, neighbourhood order."""
    return _candidates(np.asarray([position]), nr, shape)[0]


def _candidates(positions, nr, shape):
    offsets = gridmod.neighborhood_offsets(nr)
    cand = positions[:, None, :] + offsets[None, :, :]
    cand[..., 0] %= shape[0]
    cand[..., 1] %= shape[1]
    return cand


def _choose(w, cand, draws, q0, shape):
    """Vectorised pseudo-random proportional rule.

    ``w`` and ``cand`` hold one row per ant; ``draws`` is (n, 2) uniforms,
    column 0 decides exploit vs explore and column 1 drives the roulette.
    Greedy ties go to the candidate with the lowest (y, x).
    """
    n, m = w.shape
    # greedy branch
    key = cand[..., 1] * shape[0] + cand[..., 0]
    key = np.where(w == w.max(axis=1, keepdims=True), key, np.iinfo(key.dtype).max)
    best = key.argmin(axis=1)
    # roulette branch
    cum = np.cumsum(w, axis=1)
    target = draws[:, 1] * cum[:, -1]
    spun = np.minimum((cum <= target[:, None]).sum(axis=1), m - 1)
    return np.where(draws[:, 0] <= q0, best, spun)


def _sigma(ctr, ref):
    diff = ctr - ref[:, None, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _moves(positions, refs, centroids, params, nr, shape, draws):
    cand = _candidates(positions, nr, shape)
    ctr = centroids[cand[..., 0], cand[..., 1]]
    w = weight(_sigma(ctr, refs), params.beta, params.delta)
    k = _choose(w, cand, draws, params.q0, shape)
    return cand[np.arange(len(k)), k]


def decide_where_to_go(ant, grid: Grid, params: KantsParams, nr: int, rng, centroids=None):
    """Pick the next cell for ``ant``; consumes exactly two uniforms from ``rng``.

    ``centroids`` is an optional precomputed ``centroid_field(grid, cr)``;
    when omitted the centroids are computed directly for each candidate.
    """
    shape = grid.shape
    gridmod.neighborhood_cells(ant.position, nr, shape)  # validates nr
    if centroids is None:
        centroids = np.zeros(grid.cells.shape)
        for c in candidate_cells(ant.position, nr, shape):
            centroids[c[0], c[1]] = gridmod.centroid(c, params.cr, grid)
    if params.sigma_source == SIGMA_FROM_CELL:
        ref = grid.cells[ant.position[0], ant.position[1]]
    else:
        ref = np.asarray(ant.vector, dtype=np.float64)
    draws = rng.random((1, 2))
    dest = _moves(np.asarray([ant.position]), ref[None, :], centroids, params, nr, shape, draws)
    return int(dest[0, 0]), int(dest[0, 1])


def train(
    data,
    params: KantsParams,
    snapshot_every: int = 0,
    schedule: Callable[[int, int, int], int] = radius_schedule,
    callback=None,
) -> TrainedModel:
    """Run the ant colony over ``data`` (a normalized Dataset or an array).

    ``snapshot_every`` > 0 records ant positions at iteration 0, every
    ``snapshot_every`` iterations, and after the last one. ``callback``, if
    given, is called as ``callback(t, positions, grid)`` after each
    iteration (t counts completed iterations).
    """
    if hasattr(data, "X"):
        vectors = np.asarray(data.X, dtype=np.float64)
        labels = np.asarray(data.y, dtype=object)
    else:
        vectors = np.asarray(data, dtype=np.float64)
        labels = np.zeros(len(vectors), dtype=object)
    n, nvars = vectors.shape
    if n < 1:
        raise ValueError("training set is empty")
    params.validate(n)
    shape = params.grid_shape(n)

    grid_seq, ant_seq = np.random.SeedSequence(params.seed).spawn(2)
    grid = gridmod.init_random(shape[0], shape[1], nvars, np.random.default_rng(grid_seq))
    rng = np.random.default_rng(ant_seq)
    positions = np.stack(
        [rng.integers(0, shape[0], n), rng.integers(0, shape[1], n)], axis=1
    )

    history = []
    if snapshot_every > 0:
        history.append((0, positions.copy()))

    T = params.iterations
    for t in range(T):
        nr = schedule(params.nr0, t, T)
        order = rng.permutation(n)
        draws = rng.random((n, 2))
        ctr_field = gridmod.centroid_field(grid, params.cr)
        # move phase: every decision sees the same grid state
        if params.sigma_source == SIGMA_FROM_CELL:
            refs = grid.cells[positions[order, 0], positions[order, 1]]
        else:
            refs = vectors[order]
        positions[order] = _moves(positions[order], refs, ctr_field, params, nr, shape, draws)
        # update phase: each ant updates the cell it now occupies
        for k in order:
            gridmod.update_cell(positions[k], vectors[k], params.alpha, params.cr, grid)
        gridmod.evaporate(grid, params.rho)

        done = t + 1
        if snapshot_every > 0 and (done % snapshot_every == 0 or done == T):
            history.append((done, positions.copy()))
        if callback is not None:
            callback(done, positions, grid)

    return TrainedModel(grid, positions.copy(), vectors, labels, params, history)


def write_history(history, labels, outdir, prefix="history") -> list[Path]:
    """One CSV per snapshot with rows ``iteration,ant_id,label,x,y``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(max((it for it, _ in history), default=0))))
    paths = []
    for it, pos in history:
        path = outdir / f"{prefix}-{it:0{width}d}.csv"
        lines = ["iteration,ant_id,label,x,y"]
        for k, (x, y) in enumerate(pos):
            lines.append(f"{it},{k},{labels[k]},{int(x)},{int(y)}")
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def read_history(paths) -> list[tuple[int, list, np.ndarray]]:
    """Load history CSVs; returns ``(iteration, labels, positions)`` sorted by iteration."""
    frames: dict[int, dict[int, tuple]] = {}
    for path in paths:
        lines = Path(path).read_text().splitlines()
        if not lines or lines[0].strip() != "iteration,ant_id,label,x,y":
            raise ValueError(f"{path}:1: not a history file")
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields")
            try:
                it, k, x, y = int(parts[0]), int(parts[1]), int(parts[3]), int(parts[4])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer field") from None
            frames.setdefault(it, {})[k] = (parts[2], x, y)
    out = []
    for it in sorted(frames):
        rows = [frames[it][k] for k in sorted(frames[it])]
        out.append((it, [r[0] for r in rows], np.array([[r[1], r[2]] for r in rows], dtype=int)))
    return out


def derive_seed(master: int, *keys: int) -> int:
    """Independent 32-bit seed for a sub-run, stable across processes."""
    return int(np.random.SeedSequence([master, *keys]).generate_state(1)[0])

