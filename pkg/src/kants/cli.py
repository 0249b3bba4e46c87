"""Command line entry point: ``kants <command> [options]``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import classifier as cl
from . import dataset as ds
from . import engine, experiments, metrics, snapshot
from .engine import KantsParams


DEFAULT_K = 1

# flags that map onto KantsParams fields
PARAM_FLAGS = {
    "beta": float,
    "delta": float,
    "q0": float,
    "alpha": float,
    "rho": float,
    "nr0": int,
    "cr": int,
    "iterations": int,
}
OTHER_KEYS = {"k": int, "runs": int, "seed": int, "snapshot_every": int, "grid_size": str, "sigma_source": str}


class UsageError(Exception):
    pass


def _fraction(text):
    try:
        f = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < f < 1:
        raise argparse.ArgumentTypeError(f"fraction must lie strictly between 0 and 1, got {f}")
    return f


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid_size(text):
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--grid-size expects X,Y, got {text!r}") from None
    return x, y


def read_config(path) -> dict:
    """``key=value`` lines, ``#`` comments; keys use the long flag names."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        conv = PARAM_FLAGS.get(key) or OTHER_KEYS.get(key)
        if conv is None:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = conv(value.strip())
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") from None
    return out


def resolve(args, defaults: dict | None = None) -> dict:
    """Flags override the config file, which overrides built-in defaults."""
    base = {f.name: f.default for f in fields(KantsParams)}
    base.update(k=DEFAULT_K, runs=10, snapshot_every=0, grid_size=None)
    base.update(defaults or {})
    if getattr(args, "config", None):
        base.update(read_config(args.config))
    for key in list(PARAM_FLAGS) + list(OTHER_KEYS):
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    return base


def params_from(cfg: dict) -> KantsParams:
    kw = {k: cfg[k] for k in PARAM_FLAGS}
    kw["seed"] = cfg["seed"]
    kw["sigma_source"] = cfg.get("sigma_source", engine.SIGMA_FROM_ANT)
    if cfg.get("grid_size"):
        kw["grid_x"], kw["grid_y"] = _grid_size(cfg["grid_size"])
    params = KantsParams(**kw)
    try:
        params.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return params


def _add_params(p, with_runs=False):
    g = p.add_argument_group("model parameters")
    g.add_argument("--grid-size", dest="grid_size", metavar="X,Y")
    for name, conv in PARAM_FLAGS.items():
        g.add_argument(f"--{name.replace('_', '-')}", dest=name, type=conv)
    g.add_argument("--sigma-source", dest="sigma_source", choices=[engine.SIGMA_FROM_ANT, engine.SIGMA_FROM_CELL])
    g.add_argument("--k", type=int, help="neighbours used when classifying (default 1)")
    g.add_argument("--seed", type=int)
    if with_runs:
        g.add_argument("--runs", type=int, help="repeated runs per configuration")
    g.add_argument("--config", metavar="FILE", help="key=value file; flags override it")


def _add_data(p, positional="dataset"):
    p.add_argument(positional, help="CSV path, or one of: " + ", ".join(sorted(ds.BUNDLED)))
    p.add_argument("--label-column", type=int, default=None, help="default: last column")
    p.add_argument("--ignore-columns", type=_int_list, default=None, metavar="I,J")


def _load(source, label_column=None, ignore=None):
    """Load a CSV path or bundled dataset name; returns (dataset, name, (label column, ignored))."""
    if source in ds.BUNDLED and not Path(source).exists():
        _, lab, ign = ds.BUNDLED[source]
        path, name = ds.bundled_path(source), source
    else:
        lab, ign = -1, ()
        path, name = Path(source), Path(source).stem
    lab = lab if label_column is None else label_column
    ign = ign if ignore is None else ignore
    return ds.load_csv(path, lab, ign), name, (lab, ign)


# --- commands ------------------------------------------------------------


def cmd_make_splits(args):
    raw, name, _ = _load(args.dataset, args.label_column, args.ignore_columns)
    seed = 0 if args.seed is None else args.seed
    paths = experiments.write_split_files(name, raw, args.fraction, args.out, args.sets, seed, args.disjoint)
    for p in paths:
        print(p)
    return 0


def cmd_train(args):
    cfg = resolve(args)
    raw, name, (lab, ign) = _load(args.train, args.label_column, args.ignore_columns)
    data = ds.normalize(raw)
    params = params_from(cfg)
    try:
        params.validate(len(data))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    trajectory = []
    every = max(1, params.iterations // 10) if params.iterations else 1

    def ratio(pos, shape):
        return metrics.compactness(pos, data.y, shape).ratio if len(data) > 1 else None

    def track(t, pos, grid):
        if t % every == 0 or t == params.iterations:
            trajectory.append((t, ratio(pos, grid.shape)))

    t0 = time.perf_counter()
    model = engine.train(data, params, snapshot_every=cfg["snapshot_every"] or params.iterations or 1,
                         callback=track)
    seconds = time.perf_counter() - t0
    trajectory.insert(0, (0, ratio(model.history[0][1], model.grid.shape)))

    out = Path(args.out)
    experiments.save_model(model, out, data.feature_ranges, lab, ign, data.feature_names)
    engine.write_history(model.history, model.labels, out / "history")

    print(f"trained {len(data)} ants on a {model.grid.width}x{model.grid.height} grid "
          f"for {params.iterations} iterations in {seconds:.2f}s")
    print("compactness ratio: " + "  ".join(f"t={t}:{r:.3f}" for t, r in trajectory if r is not None))
    print(f"model written to {out}")
    return 0


def cmd_classify(args):
    loaded = experiments.load_model(args.model)
    lab = loaded.label_column if args.label_column is None else args.label_column
    ign = loaded.ignore_columns if args.ignore_columns is None else args.ignore_columns
    raw = ds.load_csv(args.test, lab, ign)
    nvars = loaded.model.grid.nvars
    if raw.nvars != nvars:
        raise ds.DatasetError(f"{args.test}: schema mismatch, {raw.nvars} features but the model has {nvars}")
    test = ds.normalize(raw, loaded.ranges) if loaded.ranges is not None else raw
    cfg = resolve(args)
    preds = cl.predict(loaded.model, test.X, cfg["k"], args.mode)
    acc = cl.accuracy([p.label for p in preds], test.y)
    if args.out:
        cl.write_predictions(args.out, preds, test.y)
    print(f"accuracy: {acc:.2f}")
    return 0


def cmd_sweep(args):
    cfg = resolve(args, {**experiments.SWEEP_FIXED, "runs": 1})
    raw, name, _ = _load(args.dataset, args.label_column, args.ignore_columns)
    data = ds.normalize(raw)
    base = params_from(cfg)
    if base.grid_x is None:
        side = experiments.dense_side(len(data))
        base = base.replace(grid_x=side, grid_y=side)
    try:
        base.validate(len(data))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    seed = cfg["seed"]
    seeds = [engine.derive_seed(seed, i) for i in range(cfg["runs"])]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows = experiments.sweep(data, args.betas, args.deltas, base, seeds, out / "snapshots", cfg["k"], args.workers)
    experiments.write_sweep_csv(rows, out / "sweep.csv")
    b, d = experiments.best_point(rows)
    ratios = [r.final_ratio for r in rows]
    print(f"{len(rows)} runs in {time.perf_counter() - t0:.1f}s on a {base.grid_x}x{base.grid_y} grid")
    print(f"ratio range: {min(ratios):.3f} .. {max(ratios):.3f}")
    print(f"best: beta={b:g} delta={d:g}")
    print(f"results written to {out / 'sweep.csv'}")
    return 0


def _grid_shape_near(paths):
    for p in paths:
        for cand in (p.parent / experiments.MODEL_FILE, p.parent.parent / experiments.MODEL_FILE):
            if cand.exists():
                shape = ds.read_metadata(cand).get("grid_shape")
                if shape:
                    return _grid_size(shape)
    return None


def cmd_snapshot(args):
    paths = []
    for h in args.history:
        h = Path(h)
        if h.is_dir():
            paths.extend(sorted(h.glob("*.csv")))
        elif h.exists():
            paths.append(h)
        else:
            raise FileNotFoundError(f"{h}: no such file or directory")
    frames = engine.read_history(paths)
    shape = _grid_size(args.grid_size) if args.grid_size else _grid_shape_near(paths)
    if shape is None and frames:
        allpos = np.concatenate([pos for _, _, pos in frames])
        shape = tuple(int(v) + 1 for v in allpos.max(axis=0))
    written = snapshot.render_history(frames, shape, args.out, scale=args.scale)
    if not written:
        print("warning: empty history, no images written", file=sys.stderr)
    for p in written:
        print(p)
    return 0


def cmd_reproduce(args):
    raw, name, _ = _load(args.dataset, args.label_column, args.ignore_columns)
    cfg = resolve(args)
    params = params_from(cfg)
    t0 = time.perf_counter()
    rows = experiments.reproduce(raw, name, params, cfg["k"], cfg["runs"], cfg["seed"], workers=args.workers)
    print(experiments.format_report(name.upper(), rows))
    print(f"mean seconds per run: {np.mean([r.seconds for r in rows]):.2f}; total {time.perf_counter() - t0:.1f}s")
    return 0


# --- parser --------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="kants", description="Self-organizing ant colony clustering and classification.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("make-splits", help="write stratified train/test CSV pairs")
    _add_data(s)
    s.add_argument("--fraction", type=_fraction, default=0.5, help="training fraction (default 0.5)")
    s.add_argument("--sets", type=int, default=3)
    s.add_argument("--seed", type=int)
    s.add_argument("--disjoint", action="store_true", help="split disjoint thirds instead of whole-set partitions")
    s.add_argument("--out", default="splits")
    s.set_defaults(func=cmd_make_splits)

    s = sub.add_parser("train", help="train a grid and write the model directory")
    _add_data(s, "train")
    _add_params(s)
    s.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    s.add_argument("--out", default="model")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("classify", help="classify a CSV with a trained model")
    s.add_argument("model", help="model directory written by 'train'")
    s.add_argument("test", help="CSV with the training file's layout")
    s.add_argument("--label-column", type=int, default=None)
    s.add_argument("--ignore-columns", type=_int_list, default=None, metavar="I,J")
    s.add_argument("--k", type=int)
    s.add_argument("--mode", choices=[cl.LABEL_BY_CELLS, cl.LABEL_BY_ANTS], default=cl.LABEL_BY_CELLS)
    s.add_argument("--config", metavar="FILE")
    s.add_argument("--out", help="predictions CSV")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("sweep", help="beta/delta cluster-emergence sweep")
    _add_data(s)
    _add_params(s, with_runs=True)
    s.add_argument("--betas", type=_float_list, default=list(experiments.SWEEP_BETAS))
    s.add_argument("--deltas", type=_float_list, default=list(experiments.SWEEP_DELTAS))
    s.add_argument("--workers", type=int)
    s.add_argument("--out", default="sweep")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("snapshot", help="render history CSVs as PPM images")
    s.add_argument("history", nargs="+", help="history CSV files or directories")
    s.add_argument("--grid-size", dest="grid_size", metavar="X,Y")
    s.add_argument("--scale", type=int, default=4)
    s.add_argument("--out", default="snapshots")
    s.set_defaults(func=cmd_snapshot)

    s = sub.add_parser("reproduce", help="accuracy report: 3 sets x 2 fractions, KANTS next to KNN")
    _add_data(s)
    _add_params(s, with_runs=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"kants: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"kants: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
