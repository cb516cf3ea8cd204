import numpy as np
import pytest

from embedviz.data import Dataset


def two_clusters(n=100, d=2, distance=5.0, seed=0, n_pos=None):
    """Two unit-variance Gaussian blobs ``distance`` apart along the first axis."""
    rng = np.random.default_rng(seed)
    n_pos = n // 2 if n_pos is None else n_pos
    y = np.r_[-np.ones(n - n_pos), np.ones(n_pos)].astype(int)
    X = rng.normal(size=(n, d))
    X[y == 1, 0] += distance
    return X, y


@pytest.fixture
def clusters():
    return two_clusters()


@pytest.fixture
def small_ds():
    X, y = two_clusters(n=40, d=3, distance=4.0, seed=3, n_pos=10)
    return Dataset(X, y)


ACCEPTANCE_LINES = []


def record(name, ok, detail=""):
    """Log one acceptance criterion outcome; printed again in the summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
