"""Labeled datasets: CSV ingestion, min-max scaling, stratified splitting and a
synthetic stand-in generator.

Labels are always -1 (safe, majority) or +1 (failed, minority).
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadFraction,
    BadLabel,
    DataError,
    MissingFile,
    NonNumericFeature,
    PreconditionError,
    SingleClass,
)

__all__ = [
    "Dataset",
    "SplitPair",
    "load_csv",
    "save_csv",
    "normalize",
    "stratified_split",
    "generate_synthetic",
    "round_half_up",
]


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n x d feature matrix with +-1 labels.

    ``row_ids`` tracks where each row came from: the row index in the
    original input, or -1 for synthetic rows (SMOTE). Arrays are read-only.
    """

    samples: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    row_ids: np.ndarray | None = field(default=None)

    def __post_init__(self):
        X = np.asarray(self.samples, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise PreconditionError("samples must be a 2-D matrix")
        y = np.asarray(self.labels).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise PreconditionError(
                f"samples has {X.shape[0]} rows but labels has {y.shape[0]} entries"
            )
        bad = np.flatnonzero((y != -1) & (y != 1))
        if bad.size:
            raise BadLabel(int(bad[0]), y[bad[0]].item())
        if not np.all(np.isfinite(X)):
            r, c = np.argwhere(~np.isfinite(X))[0]
            raise NonNumericFeature(int(r), int(c), X[r, c].item())
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != X.shape[1]:
                raise PreconditionError("feature_names length must equal the number of columns")
            object.__setattr__(self, "feature_names", names)
        ids = np.arange(X.shape[0]) if self.row_ids is None else self.row_ids
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        if ids.shape[0] != X.shape[0]:
            raise PreconditionError("row_ids length must equal the number of rows")
        object.__setattr__(self, "samples", _frozen(X, np.float64))
        object.__setattr__(self, "labels", _frozen(y, np.int64))
        object.__setattr__(self, "row_ids", _frozen(ids, np.int64))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    @property
    def n_positive(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.labels == -1))

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.samples[index], self.labels[index], self.feature_names, self.row_ids[index])

    def with_samples(self, samples) -> "Dataset":
        """Same rows and labels, new feature matrix (e.g. an embedding)."""
        samples = np.asarray(samples, dtype=np.float64)
        names = self.feature_names if samples.shape[1:] == self.samples.shape[1:] else None
        return Dataset(samples, self.labels, names, self.row_ids)


@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    test_fraction: float
    train_index: np.ndarray
    test_index: np.ndarray


def _parse_label(text, row):
    try:
        v = float(text)
    except ValueError:
        raise BadLabel(row, text) from None
    if v == 1.0:
        return 1
    if v == -1.0:
        return -1
    raise BadLabel(row, text)


def load_csv(path, label_column: str | int = "label") -> Dataset:
    """Read a comma-separated file with one header row.

    ``label_column`` is a header name or a 0-based column index. Rows are
    kept in file order; error row numbers count data rows from 1.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if isinstance(label_column, int) and not isinstance(label_column, bool):
            if not -len(header) <= label_column < len(header):
                raise DataError(f"label column index {label_column} out of range")
            li = label_column % len(header)
        else:
            if label_column not in header:
                raise DataError(f"label column {label_column!r} not in header")
            li = header.index(label_column)
        feat_cols = [j for j in range(len(header)) if j != li]
        rows, labels = [], []
        for r, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"row {r}: expected {len(header)} fields, got {len(rec)}")
            labels.append(_parse_label(rec[li].strip(), r))
            vals = []
            for j in feat_cols:
                try:
                    v = float(rec[j])
                except ValueError:
                    raise NonNumericFeature(r, header[j], rec[j]) from None
                if not math.isfinite(v):
                    raise NonNumericFeature(r, header[j], rec[j])
                vals.append(v)
            rows.append(vals)
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(feat_cols))
    return Dataset(X, np.array(labels, dtype=np.int64), [header[j] for j in feat_cols])


def save_csv(ds: Dataset, path, label_column: str = "label") -> None:
    """Write ``ds`` in the same dialect ``load_csv`` reads (label column last).

    Floats are written with ``repr`` so a round trip is exact.
    """
    names = ds.feature_names or tuple(f"x{j}" for j in range(ds.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, label_column])
        for row, lab in zip(ds.samples.tolist(), ds.labels.tolist()):
            w.writerow([repr(v) for v in row] + [str(lab)])


def normalize(ds: Dataset) -> Dataset:
    """Per-column min-max scaling to [0, 1]; constant columns become 0."""
    if ds.n < 1:
        raise PreconditionError("normalize needs at least one row")
    X = ds.samples
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    const = span == 0
    out = (X - lo) / np.where(const, 1.0, span)
    out[:, const] = 0.0
    return ds.with_samples(out)


def stratified_split(ds: Dataset, test_fraction: float = 0.25, seed: int = 0) -> SplitPair:
    """Shuffle each class separately and send ``round_half_up(n_c * test_fraction)``
    of its rows to the test set.

    When a class has at least two rows the per-class test count is clamped
    to ``[1, n_c - 1]`` so both halves see both classes. Indices are returned
    sorted, so rows keep their original relative order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise PreconditionError("test_fraction must lie in (0, 1)")
    classes = [c for c in (-1, 1) if np.any(ds.labels == c)]
    if len(classes) < 2:
        raise SingleClass("stratified_split needs both classes present")
    rng = np.random.default_rng(seed)
    test_parts = []
    for c in (-1, 1):
        idx = np.flatnonzero(ds.labels == c)
        k = round_half_up(idx.size * test_fraction)
        if idx.size >= 2:
            k = min(max(k, 1), idx.size - 1)
        perm = rng.permutation(idx)
        test_parts.append(perm[:k])
    test_idx = np.sort(np.concatenate(test_parts))
    mask = np.ones(ds.n, dtype=bool)
    mask[test_idx] = False
    train_idx = np.flatnonzero(mask)
    return SplitPair(
        train=ds.subset(train_idx),
        test=ds.subset(test_idx),
        seed=seed,
        test_fraction=test_fraction,
        train_index=_frozen(train_idx, np.int64),
        test_index=_frozen(test_idx, np.int64),
    )


def generate_synthetic(
    n: int = 8000,
    d: int = 49,
    minority_fraction: float = 0.1329,
    separation: float = 3.0,
    seed: int = 0,
    n_components: int = 3,
    component_spread: float = 2.0,
) -> Dataset:
    """Two Gaussian mixtures sharing ``n_components`` unit-variance components.

    Majority (-1) component means are drawn from N(0, component_spread^2 I);
    each minority (+1) component mean is its majority twin shifted by
    ``separation`` along one random unit direction. Exactly
    ``round_half_up(n * minority_fraction)`` rows are positive, and the
    classes are interleaved at random row positions.
    """
    if not 0.0 < minority_fraction < 0.5:
        raise BadFraction(f"minority_fraction must lie in (0, 0.5), got {minority_fraction}")
    if n < 4 or d < 2:
        raise PreconditionError("generate_synthetic needs n >= 4 and d >= 2")
    rng = np.random.default_rng(seed)
    n_pos = min(max(round_half_up(n * minority_fraction), 1), n - 1)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    centers = rng.normal(scale=component_spread, size=(n_components, d))
    labels = np.full(n, -1, dtype=np.int64)
    labels[rng.permutation(n)[:n_pos]] = 1
    comp = rng.integers(n_components, size=n)
    X = centers[comp] + rng.standard_normal((n, d))
    X[labels == 1] += separation * direction
    return Dataset(X, labels, [f"f{j}" for j in range(d)])
