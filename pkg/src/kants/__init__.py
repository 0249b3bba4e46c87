"""Ant colony clustering on a self-organizing toroidal vector grid."""

from .classifier import LabeledGrid, Prediction, classify, evaluate, knn_baseline, label_cells
from .dataset import Dataset, load_csv, load_named, normalize, stratified_split, train_test
from .engine import KantsParams, TrainedModel, decide_where_to_go, radius_schedule, train, weight
from .grid import Grid, centroid, evaporate, export_grid, import_grid, init_random, update_cell
from .metrics import RunStats, aggregate_runs, compactness

__all__ = [
    "Dataset", "Grid", "KantsParams", "LabeledGrid", "Prediction", "RunStats", "TrainedModel",
    "aggregate_runs", "centroid", "classify", "compactness", "decide_where_to_go", "evaluate",
    "evaporate", "export_grid", "import_grid", "init_random", "knn_baseline", "label_cells",
    "load_csv", "load_named", "normalize", "radius_schedule", "stratified_split", "train",
    "train_test", "update_cell", "weight",
]
