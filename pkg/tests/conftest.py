import numpy as np
import pytest

from kants import dataset as ds


@pytest.fixture(scope="session")
def iris_raw():
    return ds.load_named("iris")


@pytest.fixture(scope="session")
def iris_norm(iris_raw):
    return ds.normalize(iris_raw)


def make_dataset(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=object)
    return ds.Dataset(X, y, ds.sort_labels(y))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
