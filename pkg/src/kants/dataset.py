"""CSV loading, min-max normalisation and stratified splitting."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

log = logging.getLogger(__name__)


class DatasetError(ValueError):
    pass


class Sample(NamedTuple):
    features: np.ndarray
    label: str


def _label_key(label):
    try:
        return (0, float(label), "")
    except ValueError:
        return (1, 0.0, label)


def sort_labels(labels) -> tuple:
    """Distinct labels in a fixed order: numeric ones by value, then strings."""
    return tuple(sorted(set(labels), key=_label_key))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus labels.

    ``ids`` are the row numbers of the samples in the file they were loaded
    from, and survive splitting so partitions can be checked.
    """

    X: np.ndarray
    y: np.ndarray
    labels: tuple
    feature_names: tuple = ()
    ids: np.ndarray | None = None
    feature_ranges: np.ndarray | None = None  # (nvars, 2) when normalized

    def __post_init__(self):
        if self.ids is None:
            object.__setattr__(self, "ids", np.arange(len(self.X)))

    @property
    def nvars(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return len(self.X)

    def __iter__(self):
        for x, lab in zip(self.X, self.y):
            yield Sample(x, lab)

    def __getitem__(self, i):
        return Sample(self.X[i], self.y[i])

    def subset(self, idx) -> Dataset:
        idx = np.asarray(idx, dtype=int)
        return replace(self, X=self.X[idx], y=self.y[idx], ids=self.ids[idx])

    def class_counts(self) -> dict:
        return {lab: int(np.sum(self.y == lab)) for lab in self.labels}

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
            and list(self.y) == list(other.y)
            and self.labels == other.labels
        )


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _resolve(col, ncols, path):
    c = col + ncols if col < 0 else col
    if not 0 <= c < ncols:
        raise DatasetError(f"{path}: column {col} out of range for {ncols} columns")
    return c


def load_csv(path, label_column: int = -1, ignore_columns=()) -> Dataset:
    """Read a comma-separated file into a Dataset of raw feature values.

    A header row is recognised when any of its feature cells is not a
    number. Columns listed in ``ignore_columns`` (e.g. an ID) are dropped.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")

    ncols = len(rows[0][1])
    lab = _resolve(label_column, ncols, path)
    skip = {_resolve(c, ncols, path) for c in ignore_columns}
    if lab in skip:
        raise DatasetError(f"{path}: label column {label_column} is also ignored")
    feat_cols = [c for c in range(ncols) if c != lab and c not in skip]
    if not feat_cols:
        raise DatasetError(f"{path}: no feature columns")

    names = tuple(f"x{i}" for i in range(len(feat_cols)))
    first = rows[0][1]
    if not all(_is_number(first[c]) for c in feat_cols):
        names = tuple(first[c].strip() for c in feat_cols)
        rows = rows[1:]
        if not rows:
            raise DatasetError(f"{path}: header but no data rows")

    X = np.empty((len(rows), len(feat_cols)))
    y = []
    for r, (lineno, row) in enumerate(rows):
        if len(row) != ncols:
            raise DatasetError(f"{path}: row {lineno} has {len(row)} columns, expected {ncols}")
        for j, c in enumerate(feat_cols):
            try:
                X[r, j] = float(row[c])
            except ValueError:
                raise DatasetError(
                    f"{path}: row {lineno}, column {c + 1}: non-numeric value {row[c]!r}"
                ) from None
        y.append(row[lab].strip())
    y = np.array(y, dtype=object)
    return Dataset(X, y, sort_labels(y), names)


def feature_ranges(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return np.stack([X.min(axis=0), X.max(axis=0)], axis=1)


def normalize(dataset: Dataset, ranges=None) -> Dataset:
    """Min-max scale every feature to [0, 1].

    Without ``ranges`` the extrema come from ``dataset`` itself; pass the
    training set's ``feature_ranges`` to scale a test set consistently.
    Out-of-range values are clamped and constant features map to 0.5. The
    ranges used are stored on the returned dataset.
    """
    if ranges is None:
        ranges = feature_ranges(dataset.X)
    ranges = np.asarray(ranges, dtype=np.float64)
    if ranges.shape != (dataset.nvars, 2):
        raise DatasetError(f"expected {dataset.nvars} feature ranges, got {len(ranges)}")
    lo, hi = ranges[:, 0], ranges[:, 1]
    span = hi - lo
    const = span <= 0
    safe = np.where(const, 1.0, span)
    Z = np.clip((dataset.X - lo) / safe, 0.0, 1.0)
    Z[:, const] = 0.5
    return replace(dataset, X=Z, feature_ranges=ranges)


def _allocate(counts, fraction):
    """Per-class train counts summing to round(fraction * total).

    Largest-remainder rounding; every class with at least two samples keeps
    one on each side.
    """
    counts = np.asarray(counts)
    exact = fraction * counts
    alloc = np.floor(exact).astype(int)
    target = int(round(fraction * counts.sum()))
    rem = exact - alloc
    order = sorted(range(len(counts)), key=lambda i: (-rem[i], i))
    for i in order[: max(0, target - alloc.sum())]:
        alloc[i] += 1
    for i, n in enumerate(counts):
        if n >= 2:
            alloc[i] = min(max(alloc[i], 1), n - 1)
        else:
            alloc[i] = n
    return alloc


def stratified_split(dataset: Dataset, train_fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Partition ``dataset`` into train/test keeping per-class proportions.

    Both halves keep the original row order. Classes with fewer than two
    samples go entirely to train, with a warning.
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    counts = [int(np.sum(dataset.y == lab)) for lab in dataset.labels]
    alloc = _allocate(counts, train_fraction)
    train_idx, test_idx = [], []
    for lab, n, k in zip(dataset.labels, counts, alloc):
        idx = np.flatnonzero(dataset.y == lab)
        if n < 2:
            log.warning("class %r has %d sample(s); placing it wholly in train", lab, n)
        perm = rng.permutation(idx)
        train_idx.extend(perm[:k])
        test_idx.extend(perm[k:])
    return dataset.subset(np.sort(train_idx)), dataset.subset(np.sort(test_idx))


def stratified_folds(dataset: Dataset, n_folds: int, seed) -> list[Dataset]:
    """Split into ``n_folds`` disjoint stratified parts of near-equal size."""
    rng = np.random.default_rng(seed)
    order = []
    for lab in dataset.labels:
        order.extend(rng.permutation(np.flatnonzero(dataset.y == lab)))
    folds = [np.sort(order[i::n_folds]) for i in range(n_folds)]
    return [dataset.subset(f) for f in folds]


def write_csv(dataset: Dataset, path) -> None:
    """Write features then label, with a header row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(dataset.feature_names) + ["label"])
        for x, lab in zip(dataset.X, dataset.y):
            w.writerow([repr(float(v)) for v in x] + [lab])


def write_metadata(path, **fields) -> None:
    lines = []
    for k, v in fields.items():
        if isinstance(v, dict):
            v = ";".join(f"{a}:{b}" for a, b in v.items())
        lines.append(f"{k}={v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_metadata(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, _, v = line.partition("=")
        out[k.strip()] = v.strip()
    return out


# bundled copies: (file, label column, ignored columns)
BUNDLED = {
    "iris": ("iris.csv", -1, ()),
    "glass": ("glass.csv", -1, (0,)),
    "pima": ("pima.csv", -1, ()),
}


def bundled_path(name: str) -> Path:
    from importlib.resources import files

    return Path(str(files("kants") / "data" / BUNDLED[name][0]))


def load_named(name: str) -> Dataset:
    """Load one of the bundled datasets (iris, glass, pima) with raw features."""
    if name not in BUNDLED:
        raise KeyError(f"unknown dataset {name!r}; choose from {sorted(BUNDLED)}")
    _, label_column, ignore = BUNDLED[name]
    return load_csv(bundled_path(name), label_column, ignore)


def train_test(raw: Dataset, train_fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Stratified split, then normalise both halves with the training ranges."""
    tr, te = stratified_split(raw, train_fraction, seed)
    tr = normalize(tr)
    return tr, normalize(te, tr.feature_ranges)
