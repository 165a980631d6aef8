"""Strict readers for the optimizer's CSV exports.

Column names and order must match the exports exactly; deviations raise
instead of mis-plotting.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FRONT_COLUMNS = ("eval_index", "auc", "nf", "ni", "nnm", "group_structure", "hp_json")
TRACE_COLUMNS = ("eval_index", "hypervolume")

SEED_PATTERN = re.compile(r"^(?P<stem>.+)_seed(?P<seed>\d+)$")


class ExportFormatError(Exception):
    pass


@dataclass(frozen=True)
class FrontTable:
    """Rows of (auc, nf, ni, nnm) parsed from one front export."""

    name: str
    auc: np.ndarray
    nf: np.ndarray
    ni: np.ndarray
    nnm: np.ndarray

    def __len__(self):
        return self.auc.shape[0]


@dataclass(frozen=True)
class TraceTable:
    """One anytime-hypervolume trace."""

    name: str
    eval_index: np.ndarray
    hypervolume: np.ndarray

    def __len__(self):
        return self.eval_index.shape[0]


def _read_rows(path, expected_columns):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[: len(expected_columns)]) != expected_columns:
            raise ExportFormatError(
                f"{path}: expected columns {expected_columns}, found {header}")
        return list(reader)


def read_front(path) -> FrontTable:
    path = Path(path)
    rows = _read_rows(path, FRONT_COLUMNS)
    cols = {k: [] for k in ("auc", "nf", "ni", "nnm")}
    for i, row in enumerate(rows):
        if len(row) != len(FRONT_COLUMNS):
            raise ExportFormatError(f"{path}: row {i} has {len(row)} cells")
        for j, key in enumerate(("auc", "nf", "ni", "nnm"), start=1):
            try:
                cols[key].append(float(row[j]))
            except ValueError:
                raise ExportFormatError(f"{path}: row {i} column {key} not numeric") from None
    table = FrontTable(path.stem, *(np.array(cols[k]) for k in ("auc", "nf", "ni", "nnm")))
    for key in ("auc", "nf", "ni", "nnm"):
        vals = getattr(table, key)
        if vals.size and (vals.min() < 0.0 or vals.max() > 1.0):
            raise ExportFormatError(f"{path}: {key} outside [0, 1]")
    return table


def read_trace(path) -> TraceTable:
    path = Path(path)
    rows = _read_rows(path, TRACE_COLUMNS)
    idx, hv = [], []
    for i, row in enumerate(rows):
        if len(row) != len(TRACE_COLUMNS):
            raise ExportFormatError(f"{path}: row {i} has {len(row)} cells")
        try:
            idx.append(int(row[0]))
            hv.append(float(row[1]))
        except ValueError:
            raise ExportFormatError(f"{path}: row {i} not numeric") from None
    if any(v < 1 for v in idx):
        raise ExportFormatError(f"{path}: eval_index must be >= 1 for log scaling")
    return TraceTable(path.stem, np.array(idx), np.array(hv))


def group_by_seed_pattern(names):
    """Group file stems named `<name>_seed<k>` by `<name>`; stems not
    matching the pattern form their own singleton groups."""
    groups = {}
    for name in names:
        m = SEED_PATTERN.match(name)
        key = m.group("stem") if m else name
        groups.setdefault(key, []).append(name)
    return groups


def mean_and_standard_error(rows: np.ndarray):
    """Columnwise mean and standard error (sample std over sqrt(k))."""
    rows = np.asarray(rows, dtype=float)
    mean = rows.mean(axis=0)
    if rows.shape[0] < 2:
        return mean, np.zeros_like(mean)
    se = rows.std(axis=0, ddof=1) / np.sqrt(rows.shape[0])
    return mean, se
