"""Regenerate the bundled iris.csv, glass.csv and pima.csv under src/kants/data.

Iris comes from the copy bundled with scikit-learn. Glass and Pima come from
the KEEL files shipped in the ``keel-ds`` wheel. Glass is only distributed
there as one-vs-rest relabelings, so the six-class label is rebuilt by joining
glass0/1/4/5/6 row by row (they share one row order); rows negative in all of
them are type 3. KEEL stores these Glass values with small per-value
perturbations relative to the UCI originals, so they are not bit-identical to
the UCI file.

    pip download --no-deps keel-ds -d /tmp/dl
    python scripts/build_datasets.py /tmp/dl/keel_ds-*.whl
"""

import csv
import sys
import zipfile
from collections import Counter
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "kants" / "data"

IRIS_NAMES = ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
GLASS_COLS = ["id", "RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe", "type"]
PIMA_COLS = ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age", "class"]
# KEEL file -> UCI glass type whose rows are "positive"
GLASS_PARTS = {"glass0": 1, "glass1": 2, "glass4": 5, "glass5": 6, "glass6": 7}


def _keel_rows(text):
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("@"):
            continue
        rows.append([s.strip() for s in line.split(",")])
    return rows


def build_iris():
    from sklearn.datasets import load_iris

    bunch = load_iris()
    with open(OUT / "iris.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sepal_length", "sepal_width", "petal_length", "petal_width", "species"])
        for x, y in zip(bunch.data, bunch.target):
            w.writerow([f"{v:.1f}" for v in x] + [IRIS_NAMES[y]])


def build_glass(whl):
    parts = {}
    for name in GLASS_PARTS:
        text = whl.read(f"keel_ds/data/imbalanced/raw/{name}.dat").decode()
        parts[name] = _keel_rows(text)

    ref = parts["glass0"]
    labels = []
    for i, row in enumerate(ref):
        hits = [t for n, t in GLASS_PARTS.items() if parts[n][i][-1] == "positive"]
        if len(hits) > 1:
            raise SystemExit(f"glass row {i}: ambiguous class {hits}")
        labels.append(hits[0] if hits else 3)

    counts = Counter(labels)
    assert counts == {1: 70, 2: 76, 3: 17, 5: 13, 6: 9, 7: 29}, counts
    with open(OUT / "glass.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GLASS_COLS)
        for i, (row, t) in enumerate(zip(ref, labels), start=1):
            w.writerow([i] + row[:-1] + [t])


def build_pima(whl):
    rows = _keel_rows(whl.read("keel_ds/data/balanced/raw/pima.dat").decode())
    assert len(rows) == 768
    with open(OUT / "pima.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PIMA_COLS)
        for r in rows:
            w.writerow(r[:-1] + [1 if r[-1] == "tested_positive" else 0])


def main():
    OUT.mkdir(exist_ok=True)
    whl = zipfile.ZipFile(sys.argv[1])
    build_iris()
    build_glass(whl)
    build_pima(whl)


if __name__ == "__main__":
    main()
