"""Cluster-emergence and run-aggregation statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CompactnessReport:
    per_class: dict  # label -> mean pairwise toroidal distance (nan if < 2 ants)
    intra: float
    inter: float | None
    ratio: float | None  # None when fewer than two classes are present


@dataclass(frozen=True)
class RunStats:
    best: float
    mean: float
    stddev: float
    n_runs: int

    def __str__(self):
        return f"{self.best:6.2f}  {format_mean_std(self.mean, self.stddev)}"


def toroidal_distances(positions, shape) -> np.ndarray:
    """Full pairwise distance matrix on the torus, Euclidean over wrapped axes."""
    pos = np.asarray(positions, dtype=np.float64)
    dims = np.asarray(shape, dtype=np.float64)
    d = np.abs(pos[:, None, :] - pos[None, :, :])
    d = np.minimum(d, dims - d)
    return np.sqrt((d**2).sum(axis=-1))


def compactness(positions, labels, shape) -> CompactnessReport:
    """Mean intra-class over mean inter-class toroidal distance among ants.

    Lower is tighter; random placement gives a ratio close to 1.
    """
    labels = np.asarray(labels, dtype=object)
    if len(labels) < 2:
        raise ValueError("compactness needs at least two ants")
    dist = toroidal_distances(positions, shape)
    same = labels[:, None] == labels[None, :]
    iu = np.triu_indices(len(labels), k=1)
    pair_d = dist[iu]
    pair_same = same[iu]

    per_class = {}
    for lab in sorted(set(labels.tolist()), key=str):
        idx = np.flatnonzero(labels == lab)
        if len(idx) < 2:
            per_class[lab] = math.nan
            continue
        sub = dist[np.ix_(idx, idx)]
        per_class[lab] = float(sub[np.triu_indices(len(idx), k=1)].mean())

    intra = float(pair_d[pair_same].mean()) if pair_same.any() else math.nan
    if pair_same.all():
        return CompactnessReport(per_class, intra, None, None)
    inter = float(pair_d[~pair_same].mean())
    ratio = intra / inter if inter > 0 else math.inf
    return CompactnessReport(per_class, intra, inter, ratio)


def aggregate_runs(accuracies) -> RunStats:
    """Best, mean and population standard deviation of repeated runs."""
    acc = np.asarray(list(accuracies), dtype=np.float64)
    if acc.size == 0:
        raise ValueError("no runs to aggregate")
    acc = np.sort(acc)  # fixed summation order, so permutations agree bit-for-bit
    mean = float(acc.mean())
    return RunStats(float(acc.max()), mean, float(acc.std()), int(acc.size))


def format_mean_std(mean, std) -> str:
    return f"{mean:.2f} ±{std:.2f}"
