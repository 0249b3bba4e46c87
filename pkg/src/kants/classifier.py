"""Classify samples from a trained grid, plus a plain KNN baseline."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import sort_labels
from .grid import Grid

# how grid cells get a class: by the ants standing on them at the end of
# training, or by reading the K nearest ant sample vectors directly
LABEL_BY_CELLS = "cells"
LABEL_BY_ANTS = "ants"


@dataclass
class LabeledGrid:
    grid: Grid
    cell_labels: dict  # (x, y) -> label, occupied cells only
    classes: tuple = ()

    def __post_init__(self):
        if not self.cell_labels:
            raise ValueError("a labeled grid needs at least one labeled cell")
        if not self.classes:
            self.classes = sort_labels(self.cell_labels.values())
        coords = sorted(self.cell_labels)
        self._coords = np.array(coords, dtype=int)
        self._vectors = self.grid.cells[self._coords[:, 0], self._coords[:, 1]]
        self._labels = np.array([self.cell_labels[c] for c in coords], dtype=object)

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    def __len__(self):
        return len(self.cell_labels)


@dataclass(frozen=True)
class Prediction:
    label: object
    neighbor_distances: tuple
    votes: dict


def label_cells(model) -> LabeledGrid:
    """Give each occupied cell the majority class of the ants on it.

    A tied cell takes the class of the tied-class ant whose vector is
    closest to the cell's vector.
    """
    if len(model.labels) < 1:
        raise ValueError("model has no ants")
    occupants: dict = {}
    for k, (x, y) in enumerate(model.positions):
        occupants.setdefault((int(x), int(y)), []).append(k)
    out = {}
    for cell, ks in occupants.items():
        counts = Counter(model.labels[k] for k in ks)
        top = max(counts.values())
        tied = {lab for lab, c in counts.items() if c == top}
        if len(tied) == 1:
            out[cell] = tied.pop()
            continue
        v = model.grid.cells[cell]
        best = min(
            (k for k in ks if model.labels[k] in tied),
            key=lambda k: (float(np.linalg.norm(model.vectors[k] - v)), k),
        )
        out[cell] = model.labels[best]
    return LabeledGrid(model.grid, out, sort_labels(model.labels))


def _vote(dists, labels, classes) -> Prediction:
    votes = Counter(labels.tolist())
    inv = {}
    for d, lab in zip(dists, labels):
        inv[lab] = inv.get(lab, 0.0) + (1.0 / d if d > 0 else np.inf)
    rank = {lab: i for i, lab in enumerate(classes)}
    label = min(votes, key=lambda lab: (-votes[lab], -inv[lab], rank.get(lab, len(rank))))
    ordered = {lab: votes[lab] for lab in sorted(votes, key=lambda lab: rank.get(lab, len(rank)))}
    return Prediction(label, tuple(float(d) for d in dists), ordered)


def nearest(vectors, sample, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the k rows nearest ``sample`` (nearest first) and all distances.

    Equal distances are ordered by row index.
    """
    diff = vectors - np.asarray(sample, dtype=np.float64)
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return np.lexsort((np.arange(len(d)), d))[:k], d


def classify(sample, lg: LabeledGrid, K: int = 1) -> Prediction:
    """Plurality class among the K labeled cells nearest ``sample`` in feature space.

    Vote ties go to the class with the larger summed inverse distance, then
    to the class listed first in ``lg.classes``.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if K > len(lg):
        raise ValueError(f"K={K} exceeds the {len(lg)} labeled cells")
    idx, d = nearest(lg.vectors, sample, K)
    return _vote(d[idx], lg.labels[idx], lg.classes)


def _knn_predict(train_X, train_y, classes, sample, K):
    idx, d = nearest(train_X, sample, K)
    return _vote(d[idx], train_y[idx], classes)


def classify_by_ants(sample, model, K: int = 1) -> Prediction:
    """Alternative labeling: vote among the K nearest ant sample vectors."""
    if K > len(model.labels):
        raise ValueError(f"K={K} exceeds the {len(model.labels)} ants")
    return _knn_predict(model.vectors, np.asarray(model.labels, dtype=object),
                        sort_labels(model.labels), sample, K)


def accuracy(predicted, truth) -> float:
    truth = list(truth)
    if not truth:
        raise ValueError("cannot score an empty test set")
    hits = sum(p == t for p, t in zip(predicted, truth))
    return 100.0 * hits / len(truth)


def predict(model_or_lg, X, K: int = 1, mode: str = LABEL_BY_CELLS) -> list[Prediction]:
    if mode == LABEL_BY_ANTS:
        return [classify_by_ants(x, model_or_lg, K) for x in X]
    lg = model_or_lg if isinstance(model_or_lg, LabeledGrid) else label_cells(model_or_lg)
    return [classify(x, lg, K) for x in X]


def evaluate(model_or_lg, test, K: int = 1, mode: str = LABEL_BY_CELLS) -> float:
    """Percentage of ``test`` samples predicted correctly."""
    if len(test) == 0:
        raise ValueError("cannot score an empty test set")
    preds = predict(model_or_lg, test.X, K, mode)
    return accuracy([p.label for p in preds], test.y)


def knn_baseline(train, test, K: int = 1) -> float:
    """Accuracy of classic KNN over the raw training vectors."""
    if K > len(train):
        raise ValueError(f"K={K} exceeds the {len(train)} training samples")
    if len(test) == 0:
        raise ValueError("cannot score an empty test set")
    # canonical order makes the result independent of training-row order
    y = np.asarray(train.y, dtype=object)
    order = sorted(range(len(y)), key=lambda i: (tuple(train.X[i]), str(y[i])))
    X, y = train.X[order], y[order]
    classes = sort_labels(train.y)
    preds = [_knn_predict(X, y, classes, x, K).label for x in test.X]
    return accuracy(preds, test.y)


def write_predictions(path, predictions, truth) -> None:
    lines = ["sample_index,true_label,predicted_label,correct"]
    for i, (p, t) in enumerate(zip(predictions, truth)):
        lines.append(f"{i},{t},{p.label},{int(p.label == t)}")
    Path(path).write_text("\n".join(lines) + "\n")
