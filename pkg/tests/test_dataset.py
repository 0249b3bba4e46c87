import warnings
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kants import dataset as ds
from conftest import make_dataset


@pytest.mark.parametrize(
    "name, n, nvars, nlabels",
    [("iris", 150, 4, 3), ("glass", 214, 9, 6), ("pima", 768, 8, 2)],
)
def test_bundled_shapes(name, n, nvars, nlabels):
    d = ds.load_named(name)
    assert (len(d), d.nvars, len(d.labels)) == (n, nvars, nlabels)


def test_iris_fifty_per_class(iris_raw):
    assert set(iris_raw.class_counts().values()) == {50}


def test_glass_id_column_dropped():
    d = ds.load_named("glass")
    assert d.feature_names[0] == "RI"
    assert d.class_counts() == {"1": 70, "2": 76, "3": 17, "5": 13, "6": 9, "7": 29}


def test_load_headerless_and_label_first(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,1.0,2.0\nb,3.0,4.0\n")
    d = ds.load_csv(p, label_column=0)
    assert d.feature_names == ("x0", "x1")
    np.testing.assert_array_equal(d.X, [[1, 2], [3, 4]])
    assert list(d.y) == ["a", "b"]


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError, match="missing.csv"):
        ds.load_csv(tmp_path / "missing.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ds.DatasetError, match="empty"):
        ds.load_csv(empty)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("f,g,label\n1,2,a\n1,a\n")
    with pytest.raises(ds.DatasetError, match="row 3"):
        ds.load_csv(ragged)
    bad = tmp_path / "bad.csv"
    bad.write_text("f,g,label\n1,2,a\n1,zz,b\n")
    with pytest.raises(ds.DatasetError, match="row 3, column 2"):
        ds.load_csv(bad)


def test_normalize_examples():
    d = make_dataset([[2.0], [4.0], [6.0]], ["a", "b", "a"])
    n = ds.normalize(d)
    np.testing.assert_array_equal(n.X[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(n.feature_ranges, [[2.0, 6.0]])
    t = ds.normalize(make_dataset([[7.0], [1.0]], ["a", "a"]), n.feature_ranges)
    np.testing.assert_array_equal(t.X[:, 0], [1.0, 0.0])
    u = make_dataset([[0.0], [1.0], [0.25]], ["a", "a", "b"])
    np.testing.assert_array_equal(ds.normalize(u, [[0.0, 1.0]]).X, u.X)


def test_constant_feature_maps_to_half():
    d = make_dataset([[3.0, 1.0], [3.0, 2.0]], ["a", "b"])
    np.testing.assert_array_equal(ds.normalize(d).X[:, 0], [0.5, 0.5])


def test_normalize_rejects_wrong_ranges(iris_raw):
    with pytest.raises(ds.DatasetError):
        ds.normalize(iris_raw, [[0, 1]])


@pytest.mark.parametrize("frac, ntr, nte, per_test", [(0.5, 75, 75, 25), (0.9, 135, 15, 5)])
def test_iris_split_counts(iris_raw, frac, ntr, nte, per_test):
    tr, te = ds.stratified_split(iris_raw, frac, seed=3)
    assert (len(tr), len(te)) == (ntr, nte)
    assert set(te.class_counts().values()) == {per_test}


def test_split_deterministic_and_partition(iris_raw):
    a = ds.stratified_split(iris_raw, 0.5, seed=9)
    b = ds.stratified_split(iris_raw, 0.5, seed=9)
    assert a[0] == b[0] and a[1] == b[1]
    ids = np.concatenate([a[0].ids, a[1].ids])
    assert sorted(ids) == list(range(len(iris_raw)))


def test_split_rejects_bad_fraction(iris_raw):
    for f in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            ds.stratified_split(iris_raw, f, 0)


def test_singleton_class_goes_to_train():
    d = make_dataset(np.arange(5)[:, None], ["a", "a", "a", "a", "b"])
    with warnings.catch_warnings():
        tr, te = ds.stratified_split(d, 0.5, 0)
    assert "b" in list(tr.y) and "b" not in list(te.y)


@st.composite
def labelled(draw):
    counts = draw(st.lists(st.integers(2, 30), min_size=1, max_size=5))
    y = [f"c{i}" for i, c in enumerate(counts) for _ in range(c)]
    X = np.arange(len(y), dtype=float)[:, None]
    return make_dataset(X, y)


@settings(max_examples=500, deadline=None)
@given(labelled(), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_split_properties(d, frac, seed):
    tr, te = ds.stratified_split(d, frac, seed)
    assert Counter(tr.ids.tolist()) + Counter(te.ids.tolist()) == Counter(d.ids.tolist())
    for lab in d.labels:
        assert lab in tr.y and lab in te.y
    # proportions hold whenever no class had to be topped up to one sample per side
    counts = np.array(list(d.class_counts().values()))
    if np.all(frac * counts >= 1) and np.all((1 - frac) * counts >= 1):
        for lab in d.labels:
            share = np.sum(tr.y == lab) / len(tr) - np.sum(d.y == lab) / len(d)
            assert abs(share) <= 1 / len(tr) + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 1000))
def test_train_ranges_bound_train_values(nvars, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, nvars)) * 10
    d = make_dataset(X, ["a", "b"] * 20)
    tr, te = ds.train_test(d, 0.5, seed)
    assert tr.X.min() >= 0 and tr.X.max() <= 1
    assert te.X.min() >= 0 and te.X.max() <= 1


def test_write_csv_round_trip(tmp_path, iris_raw):
    tr, _ = ds.stratified_split(iris_raw, 0.5, 1)
    p = tmp_path / "x.csv"
    ds.write_csv(tr, p)
    again = ds.load_csv(p)
    assert again == tr
    assert again.feature_names == tr.feature_names


def test_metadata_round_trip(tmp_path):
    p = tmp_path / "m.meta"
    ds.write_metadata(p, seed=3, fraction=0.5, counts={"a": 2, "b": 3})
    assert ds.read_metadata(p) == {"seed": "3", "fraction": "0.5", "counts": "a:2;b:3"}


def test_sort_labels_numeric_before_text():
    assert ds.sort_labels(["10", "2", "b", "a", "2"]) == ("2", "10", "a", "b")
