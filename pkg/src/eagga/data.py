"""Tabular binary-classification data: CSV ingestion and stratified resampling.

A :class:`Dataset` is an immutable numeric feature matrix plus a 0/1 target.
Column order in the CSV file defines the feature indices used everywhere
downstream. Splitting is deterministic given the seed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(Exception):
    """Base class for ingestion and resampling failures."""


class MissingFileError(DataError):
    pass


class MissingColumnError(DataError):
    pass


class NonNumericCellError(DataError):
    def __init__(self, row: int, col: str, text: str):
        super().__init__(f"non-numeric cell at row {row}, column {col!r}: {text!r}")
        self.row = row
        self.col = col


class MissingValueError(DataError):
    def __init__(self, row: int, col: str):
        super().__init__(f"missing value at row {row}, column {col!r}")
        self.row = row
        self.col = col


class NonBinaryTargetError(DataError):
    pass


class SingleClassError(DataError):
    pass


class DegenerateSplitError(DataError):
    pass


class TooFewPerClassError(DataError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Immutable n x p feature matrix with a binary target vector."""

    features: np.ndarray
    target: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        y = np.asarray(self.target, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("features must be a non-empty 2-d matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("target length must match the number of rows")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("target must contain only 0 and 1")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length must match the number of columns")
        if len(set(names)) != len(names):
            raise ValueError("feature_names must be unique")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        """New Dataset restricted to the given rows (order preserved)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.target[idx], self.feature_names)


@dataclass(frozen=True)
class ResamplingSplit:
    """Disjoint train/test row indices of one resampling iteration."""

    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):
        tr = np.asarray(self.train_indices, dtype=np.int64)
        te = np.asarray(self.test_indices, dtype=np.int64)
        tr.flags.writeable = False
        te.flags.writeable = False
        object.__setattr__(self, "train_indices", tr)
        object.__setattr__(self, "test_indices", te)


def load_csv(path, target_column: str) -> Dataset:
    """Parse a headered CSV file into a Dataset.

    All non-target columns must hold finite real numbers. The target must be
    0/1, or carry exactly two distinct labels which are mapped to 0/1 by
    lexicographic order. Cell errors carry the 0-based data row index.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(f"empty file: {path}") from None
        header = [h.strip() for h in header]
        if target_column not in header:
            raise MissingColumnError(f"target column {target_column!r} not in header")
        tcol = header.index(target_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != tcol)
        if len(set(feature_names)) != len(feature_names):
            raise MissingColumnError("duplicate feature column names")
        rows = []
        raw_targets = []
        for r, record in enumerate(reader):
            if len(record) != len(header):
                raise MissingValueError(r, "<row>")
            vals = []
            for c, cell in enumerate(record):
                name = header[c]
                cell = cell.strip()
                if cell == "":
                    raise MissingValueError(r, name)
                if c == tcol:
                    raw_targets.append(cell)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericCellError(r, name, cell) from None
                if not math.isfinite(v):
                    raise NonNumericCellError(r, name, cell)
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise NonBinaryTargetError("file has no data rows")
    target = _map_target(raw_targets)
    return Dataset(np.array(rows, dtype=np.float64), target, feature_names)


def _map_target(raw: list[str]) -> np.ndarray:
    """Map raw target strings to {0,1}; two labels sort lexicographically."""
    try:
        numeric = [float(v) for v in raw]
    except ValueError:
        numeric = None
    if numeric is not None and set(numeric) <= {0.0, 1.0}:
        return np.array(numeric, dtype=np.int64)
    labels = sorted(set(raw))
    if len(labels) != 2:
        raise NonBinaryTargetError(f"target has {len(labels)} distinct labels, need exactly 2")
    lut = {labels[0]: 0, labels[1]: 1}
    return np.array([lut[v] for v in raw], dtype=np.int64)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_holdout(ds: Dataset, train_ratio: float, seed: int) -> ResamplingSplit:
    """Single stratified holdout split.

    Per class, round(train_ratio * class count) observations go to train and
    the remainder to test. Indices are returned sorted ascending.
    """
    if not 0.0 < train_ratio < 1.0:
        raise DegenerateSplitError(f"train_ratio {train_ratio} not in (0, 1)")
    y = ds.target
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClassError("both classes must be present for stratified splitting")
    if train_ratio * ds.n < 1 or (1.0 - train_ratio) * ds.n < 1:
        raise DegenerateSplitError("one side of the split would be empty")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in classes:
        idx = np.flatnonzero(y == c)
        perm = rng.permutation(idx)
        k = _round_half_up(train_ratio * idx.size)
        train.append(perm[:k])
        test.append(perm[k:])
    train = np.sort(np.concatenate(train))
    test = np.sort(np.concatenate(test))
    if train.size == 0 or test.size == 0:
        raise DegenerateSplitError("one side of the split is empty")
    return ResamplingSplit(train, test)


def stratified_kfold(ds: Dataset, k: int, seed: int) -> list[ResamplingSplit]:
    """k stratified folds whose test parts partition all row indices."""
    if k < 2:
        raise TooFewPerClassError(f"k must be >= 2, got {k}")
    y = ds.target
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClassError("both classes must be present for stratified splitting")
    for c in classes:
        if np.count_nonzero(y == c) < k:
            raise TooFewPerClassError(f"class {c} has fewer than {k} members")
    rng = np.random.default_rng(seed)
    fold_parts = [[] for _ in range(k)]
    for c in classes:
        perm = rng.permutation(np.flatnonzero(y == c))
        for f, chunk in enumerate(np.array_split(perm, k)):
            fold_parts[f].append(chunk)
    all_idx = np.arange(ds.n)
    splits = []
    for parts in fold_parts:
        test = np.sort(np.concatenate(parts))
        train = np.setdiff1d(all_idx, test, assume_unique=True)
        splits.append(ResamplingSplit(train, test))
    return splits
