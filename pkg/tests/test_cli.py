import pytest

from kants import dataset as ds
from kants.cli import main, read_config, UsageError


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_make_splits_names(tmp_path, capsys):
    code, out, _ = run(capsys, "make-splits", "iris", "--fraction", "0.5", "--out", tmp_path)
    assert code == 0
    names = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert len(names) == 6 and all("50tra-50tst" in n for n in names)
    code, _, _ = run(capsys, "make-splits", "iris", "--fraction", "0.9", "--out", tmp_path / "n")
    assert all("90tra-10tst" in p.name for p in (tmp_path / "n").glob("*.csv"))


def test_usage_errors_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "make-splits", "iris", "--fraction", "1.5")
    assert code == 2 and "fraction" in err
    assert run(capsys, "train", "iris", "--q0", "2", "--out", tmp_path)[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_missing_file_exit_1(tmp_path, capsys):
    code, _, err = run(capsys, "train", tmp_path / "nope.csv", "--out", tmp_path / "m")
    assert code == 1 and "nope.csv" in err


def train_iris(tmp_path, capsys, *extra):
    out = tmp_path / "model"
    code, text, _ = run(capsys, "train", "iris", "--iterations", "20", "--seed", "3",
                        "--snapshot-every", "10", "--out", out, *extra)
    assert code == 0
    return out, text


def test_train_and_classify(tmp_path, capsys):
    model, text = train_iris(tmp_path, capsys)
    assert "compactness ratio" in text and "t=0:" in text and "t=20:" in text
    assert sorted(p.name for p in (model / "history").iterdir()) == [
        "history-0000.csv", "history-0010.csv", "history-0020.csv"]
    code, text, _ = run(capsys, "classify", model, ds.bundled_path("iris"), "--out", tmp_path / "p.csv")
    assert code == 0
    line = text.strip().splitlines()[-1]
    assert line.startswith("accuracy: ") and float(line.split()[1]) > 50
    assert len((tmp_path / "p.csv").read_text().splitlines()) == 151


def test_train_is_reproducible(tmp_path, capsys):
    a, _ = train_iris(tmp_path / "a", capsys)
    b, _ = train_iris(tmp_path / "b", capsys)
    for name in ("grid.csv", "ants.csv", "cell_labels.csv", "model.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_classify_schema_mismatch(tmp_path, capsys):
    model, _ = train_iris(tmp_path, capsys)
    code, _, err = run(capsys, "classify", model, ds.bundled_path("pima"))
    assert code == 1 and "mismatch" in err


def test_snapshot_ppm_byte_identical(tmp_path, capsys):
    model, _ = train_iris(tmp_path, capsys)
    assert run(capsys, "snapshot", model / "history", "--out", tmp_path / "s1")[0] == 0
    assert run(capsys, "snapshot", model / "history", "--out", tmp_path / "s2")[0] == 0
    first = sorted((tmp_path / "s1").glob("*.ppm"))
    assert len(first) == 3
    for p in first:
        assert p.read_bytes() == (tmp_path / "s2" / p.name).read_bytes()
    # shape comes from the sibling model.txt
    assert first[0].read_text().splitlines()[1] == "100 100"


def test_snapshot_empty_history(tmp_path, capsys):
    (tmp_path / "h").mkdir()
    code, _, err = run(capsys, "snapshot", tmp_path / "h", "--out", tmp_path / "s")
    assert code == 0 and "empty" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test\niterations = 4\nbeta=2\nseed=9\n")
    assert read_config(cfg) == {"iterations": 4, "beta": 2.0, "seed": 9}
    out = tmp_path / "m"
    assert run(capsys, "train", "iris", "--config", cfg, "--beta", "5", "--out", out)[0] == 0
    meta = ds.read_metadata(out / "model.txt")
    assert (meta["iterations"], meta["beta"], meta["seed"], meta["q0"]) == ("4", "5.0", "9", "0.0")
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense=1\n")
    with pytest.raises(UsageError):
        read_config(bad)
    assert run(capsys, "train", "iris", "--config", bad, "--out", out)[0] == 2


def test_sweep_small(tmp_path, capsys):
    args = ["sweep", "iris", "--betas", "2,8", "--deltas", "1", "--iterations", "3",
            "--workers", "1", "--seed", "2"]
    code, text, _ = run(capsys, *args, "--out", tmp_path / "a")
    assert code == 0 and "best: beta=" in text
    assert len((tmp_path / "a" / "sweep.csv").read_text().splitlines()) == 3
    assert len(list((tmp_path / "a" / "snapshots").glob("*.ppm"))) == 2
    run(capsys, *args, "--out", tmp_path / "b")
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_reproduce_small(capsys):
    code, text, _ = run(capsys, "reproduce", "iris", "--runs", "1", "--iterations", "2", "--workers", "1")
    assert code == 0
    lines = text.splitlines()
    assert "KANTS" in lines[0] and "KNN" in lines[0]
    assert sum("tra-" in ln for ln in lines) == 6


def test_glass_split_files_train(tmp_path, capsys):
    run(capsys, "make-splits", "glass", "--out", tmp_path)
    tra = tmp_path / "glass-50tra-50tst-set1-tra.csv"
    assert ds.load_csv(tra).nvars == 9
    code, _, _ = run(capsys, "train", tra, "--iterations", "2", "--out", tmp_path / "m")
    assert code == 0
    code, text, _ = run(capsys, "classify", tmp_path / "m", tmp_path / "glass-50tra-50tst-set1-tst.csv")
    assert code == 0 and text.startswith("accuracy:")
