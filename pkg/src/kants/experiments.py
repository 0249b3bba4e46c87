"""Repeated runs, beta-delta sweeps, accuracy reports and model files."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import classifier as cl
from . import dataset as ds
from . import engine, metrics, snapshot
from .engine import KantsParams, TrainedModel, derive_seed
from .grid import export_grid, import_grid


SWEEP_BETAS = (0.5, 2.0, 8.0, 32.0, 128.0)
SWEEP_DELTAS = (0.05, 0.2, 1.0, 4.0, 16.0)
# fixed settings of the cluster-emergence study
SWEEP_FIXED = dict(alpha=1.0, nr0=1, cr=3, iterations=100)


def dense_side(n_samples: int) -> int:
    """Grid side giving about one cell per ant, never below 10."""
    return max(10, math.ceil(math.sqrt(n_samples)))


def run_tasks(fn, tasks, workers=None):
    """Map ``fn`` over ``tasks`` in worker processes, preserving order.

    With one worker (or one CPU) everything runs in-process.
    """
    tasks = list(tasks)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
        return list(ex.map(fn, tasks))


# --- model files ---------------------------------------------------------

MODEL_FILE = "model.txt"


def save_model(model: TrainedModel, outdir, ranges=None, label_column=-1, ignore_columns=(), feature_names=()):
    """Write grid.csv, ants.csv, cell_labels.csv and model.txt into ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    export_grid(model.grid, outdir / "grid.csv")

    lines = ["ant_id,label,x,y," + ",".join(f"v{i}" for i in range(model.grid.nvars))]
    for k, (lab, (x, y), v) in enumerate(zip(model.labels, model.positions, model.vectors)):
        lines.append(f"{k},{lab},{int(x)},{int(y)}," + ",".join(repr(float(a)) for a in v))
    (outdir / "ants.csv").write_text("\n".join(lines) + "\n")

    lg = cl.label_cells(model)
    lines = ["x,y,label"] + [f"{x},{y},{lab}" for (x, y), lab in sorted(lg.cell_labels.items())]
    (outdir / "cell_labels.csv").write_text("\n".join(lines) + "\n")

    meta = {f.name: getattr(model.params, f.name) for f in fields(model.params)}
    meta.update(
        nvars=model.grid.nvars,
        grid_shape=f"{model.grid.width},{model.grid.height}",
        label_column=label_column,
        ignore_columns=",".join(str(c) for c in ignore_columns),
        feature_names=",".join(feature_names),
        classes=",".join(str(c) for c in ds.sort_labels(model.labels)),
    )
    if ranges is not None:
        meta["ranges_min"] = ",".join(repr(float(v)) for v in ranges[:, 0])
        meta["ranges_max"] = ",".join(repr(float(v)) for v in ranges[:, 1])
    ds.write_metadata(outdir / MODEL_FILE, **meta)


def _params_from_meta(meta) -> KantsParams:
    kw = {}
    for f in fields(KantsParams):
        raw = meta.get(f.name)
        if raw is None or raw == "None":
            continue
        if f.name in ("nr0", "cr", "iterations", "grid_x", "grid_y", "seed"):
            kw[f.name] = int(raw)
        elif f.name == "sigma_source":
            kw[f.name] = raw
        else:
            kw[f.name] = float(raw)
    return KantsParams(**kw)


@dataclass
class LoadedModel:
    model: TrainedModel
    ranges: np.ndarray | None
    label_column: int
    ignore_columns: tuple
    meta: dict


def load_model(modeldir) -> LoadedModel:
    modeldir = Path(modeldir)
    meta_path = modeldir / MODEL_FILE
    if not meta_path.exists():
        raise FileNotFoundError(f"{meta_path}: no such file")
    meta = ds.read_metadata(meta_path)
    grid = import_grid(modeldir / "grid.csv")
    labels, pos, vecs = [], [], []
    with open(modeldir / "ants.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            labels.append(row[1])
            pos.append((int(row[2]), int(row[3])))
            vecs.append([float(v) for v in row[4:]])
    model = TrainedModel(
        grid,
        np.array(pos, dtype=int).reshape(-1, 2),
        np.array(vecs, dtype=np.float64).reshape(-1, grid.nvars),
        np.array(labels, dtype=object),
        _params_from_meta(meta),
    )
    ranges = None
    if meta.get("ranges_min"):
        lo = [float(v) for v in meta["ranges_min"].split(",")]
        hi = [float(v) for v in meta["ranges_max"].split(",")]
        ranges = np.stack([lo, hi], axis=1)
    ignore = tuple(int(c) for c in meta.get("ignore_columns", "").split(",") if c)
    return LoadedModel(model, ranges, int(meta.get("label_column", -1)), ignore, meta)


# --- repeated runs -------------------------------------------------------


@dataclass(frozen=True)
class RunResult:
    seed: int
    accuracy: float
    ratio: float | None
    seconds: float


def _one_run(task):
    train, test, params, K, mode = task
    t0 = time.perf_counter()
    model = engine.train(train, params)
    acc = cl.evaluate(model, test, K, mode)
    seconds = time.perf_counter() - t0
    rep = metrics.compactness(model.positions, model.labels, model.grid.shape)
    return RunResult(params.seed, acc, rep.ratio, seconds)


def run_protocol(train, test, params: KantsParams, K=1, n_runs=10, seed=0, mode=cl.LABEL_BY_CELLS, workers=None):
    """Train ``n_runs`` times with seeds derived from ``seed`` and score each run."""
    tasks = [(train, test, params.replace(seed=derive_seed(seed, i)), K, mode) for i in range(n_runs)]
    return run_tasks(_one_run, tasks, workers)


# --- beta/delta sweep ----------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    beta: float
    delta: float
    seed: int
    final_ratio: float
    accuracy: float
    initial_ratio: float


def _sweep_point(task):
    data, params, snapdir, K = task
    model = engine.train(data, params, snapshot_every=params.iterations or 1)
    start = model.history[0][1] if model.history else model.positions
    r0 = metrics.compactness(start, model.labels, model.grid.shape).ratio
    r1 = metrics.compactness(model.positions, model.labels, model.grid.shape).ratio
    acc = cl.evaluate(model, data, K)
    if snapdir is not None:
        name = f"b{params.beta:g}_d{params.delta:g}_s{params.seed}.ppm"
        snapshot.write_ppm(Path(snapdir) / name, model.positions, model.labels, model.grid.shape, data.labels)
    return SweepRow(params.beta, params.delta, params.seed, r1, acc, r0)


def sweep(data, betas=SWEEP_BETAS, deltas=SWEEP_DELTAS, base: KantsParams | None = None, seeds=(0,),
          snapdir=None, K=1, workers=None) -> list[SweepRow]:
    """Train once per (beta, delta, seed) and record the final compactness ratio.

    ``accuracy`` is the resubstitution accuracy of the labeled grid on
    ``data`` itself. When ``base`` leaves the grid size unset, the dense
    one-cell-per-ant side is used.
    """
    if base is None:
        base = KantsParams(**SWEEP_FIXED)
    if base.grid_x is None and base.grid_y is None:
        side = dense_side(len(data))
        base = base.replace(grid_x=side, grid_y=side)
    if snapdir is not None:
        Path(snapdir).mkdir(parents=True, exist_ok=True)
    tasks = [
        (data, base.replace(beta=float(b), delta=float(d), seed=int(s)), snapdir, K)
        for b in betas
        for d in deltas
        for s in seeds
    ]
    return run_tasks(_sweep_point, tasks, workers)


def best_point(rows) -> tuple[float, float]:
    """(beta, delta) with the lowest mean final ratio; ties go to smaller beta, then delta."""
    by = {}
    for r in rows:
        by.setdefault((r.beta, r.delta), []).append(r.final_ratio)
    return min(by, key=lambda k: (float(np.mean(by[k])), k))


def write_sweep_csv(rows, path) -> None:
    lines = ["beta,delta,seed,final_ratio,accuracy"]
    for r in rows:
        lines.append(f"{r.beta!r},{r.delta!r},{r.seed},{r.final_ratio!r},{r.accuracy!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_sweep_csv(path) -> list[SweepRow]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(SweepRow(float(row["beta"]), float(row["delta"]), int(row["seed"]),
                                float(row["final_ratio"]), float(row["accuracy"]), math.nan))
    return out


# --- splits and accuracy reports -----------------------------------------


def split_tag(fraction: float) -> str:
    tra = round(fraction * 100)
    return f"{tra}tra-{100 - tra}tst"


def make_splits(raw, fraction, n_sets=3, seed=0, disjoint=False):
    """``n_sets`` stratified train/test pairs.

    By default every set partitions the whole dataset with its own seed.
    With ``disjoint`` the dataset is first cut into ``n_sets`` disjoint
    stratified thirds and each third is split.
    """
    if disjoint:
        parts = ds.stratified_folds(raw, n_sets, derive_seed(seed, 999))
    else:
        parts = [raw] * n_sets
    return [ds.stratified_split(p, fraction, derive_seed(seed, i)) for i, p in enumerate(parts)]


def write_split_files(name, raw, fraction, outdir, n_sets=3, seed=0, disjoint=False) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tag = split_tag(fraction)
    written = []
    for i, (tr, te) in enumerate(make_splits(raw, fraction, n_sets, seed, disjoint), start=1):
        stem = f"{name}-{tag}-set{i}"
        for part, d in (("tra", tr), ("tst", te)):
            p = outdir / f"{stem}-{part}.csv"
            ds.write_csv(d, p)
            written.append(p)
        ds.write_metadata(
            outdir / f"{stem}.meta",
            seed=seed,
            set=i,
            fraction=fraction,
            disjoint=disjoint,
            train_counts=tr.class_counts(),
            test_counts=te.class_counts(),
        )
    return written


@dataclass(frozen=True)
class ReportRow:
    name: str
    stats: metrics.RunStats
    knn: float
    seconds: float


def reproduce(raw, name, params: KantsParams, K=1, n_runs=10, seed=0, fractions=(0.5, 0.9), n_sets=3,
              workers=None, mode=cl.LABEL_BY_CELLS) -> list[ReportRow]:
    """Report rows: every set of every fraction, KANTS over ``n_runs`` seeds next to KNN."""
    out = []
    for fraction in fractions:
        for i, (tr, te) in enumerate(make_splits(raw, fraction, n_sets, seed), start=1):
            tr = ds.normalize(tr)
            te = ds.normalize(te, tr.feature_ranges)
            res = run_protocol(tr, te, params, K, n_runs, derive_seed(seed, i, round(fraction * 100)), mode, workers)
            stats = metrics.aggregate_runs(r.accuracy for r in res)
            secs = float(np.mean([r.seconds for r in res]))
            out.append(ReportRow(f"{split_tag(fraction)}-Set{i}", stats, cl.knn_baseline(tr, te, K), secs))
    return out


def format_report(title, rows) -> str:
    lines = [
        f"{title:<18} {'KANTS best':>10}  {'KANTS mean':>13}  {'KNN':>7}",
        "-" * 54,
    ]
    for r in rows:
        lines.append(
            f"{r.name:<18} {r.stats.best:>10.2f}  {metrics.format_mean_std(r.stats.mean, r.stats.stddev):>13}  {r.knn:>7.2f}"
        )
    return "\n".join(lines)
