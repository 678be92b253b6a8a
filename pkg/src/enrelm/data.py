"""Tabular dataset ingestion, splitting, and CSV result serialization.

All floats are written with ``repr`` (shortest round-trip form), so files
re-read to the exact same values and reruns are byte-stable.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = [
    "Dataset",
    "load_csv",
    "split",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_error_curve_csv",
    "read_error_curve_csv",
]

log = logging.getLogger(__name__)

MISSING_TOKENS = {"", "?", "na", "n/a", "nan", "null"}


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n0 x T, one data point per column) and targets."""

    x: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    name: str

    def __post_init__(self):
        if self.x.ndim != 2 or self.y.ndim != 1:
            raise ValueError("x must be a matrix and y a vector")
        if self.x.shape[1] != self.y.shape[0]:
            raise ValueError("x columns and y length must agree")
        if self.x.shape[0] != len(self.feature_names):
            raise ValueError("feature_names must match the number of features")

    @property
    def n_features(self) -> int:
        return self.x.shape[0]

    @property
    def n_points(self) -> int:
        return self.x.shape[1]


def _is_missing(token: str) -> bool:
    return token.strip().lower() in MISSING_TOKENS


def load_csv(path, target, categoricals=(), drop_first: bool = False, name=None) -> Dataset:
    """Load a headered CSV, one-hot encoding the named categorical columns.

    Rows with missing entries are dropped (the count is logged). Categorical
    columns expand in place to one indicator per observed level, levels in
    lexicographic order; ``drop_first`` omits each first level instead. Every
    remaining column, including the target, must parse as a number.
    """
    categoricals = set(categoricals)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(tok.strip() for tok in r)]
    if not rows:
        raise DataError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    if target not in header:
        raise DataError(f"{path}: target column {target!r} not found in {header}")
    unknown = categoricals - set(header)
    if unknown:
        raise DataError(f"{path}: categorical columns {sorted(unknown)} not found")
    if target in categoricals:
        raise DataError(f"{path}: target column cannot be categorical")
    body = rows[1:]
    kept = []
    dropped = 0
    for r in body:
        if len(r) != len(header):
            raise DataError(f"{path}: row with {len(r)} fields, expected {len(header)}")
        if any(_is_missing(tok) for tok in r):
            dropped += 1
        else:
            kept.append([tok.strip() for tok in r])
    if dropped:
        log.info("%s: dropped %d rows with missing values", path, dropped)
    if not kept:
        raise DataError(f"{path}: no complete rows")
    t_idx = header.index(target)

    def _parse(tok, col):
        try:
            return float(tok)
        except ValueError:
            raise DataError(
                f"{path}: non-numeric value {tok!r} in column {col!r}"
            ) from None

    y = np.array([_parse(r[t_idx], target) for r in kept])
    columns: list[np.ndarray] = []
    names: list[str] = []
    for j, col in enumerate(header):
        if j == t_idx:
            continue
        tokens = [r[j] for r in kept]
        if col in categoricals:
            levels = sorted(set(tokens))
            if drop_first:
                levels = levels[1:]
            for level in levels:
                columns.append(
                    np.array([1.0 if tok == level else 0.0 for tok in tokens])
                )
                names.append(f"{col}={level}")
        else:
            columns.append(np.array([_parse(tok, col) for tok in tokens]))
            names.append(col)
    if not columns:
        raise DataError(f"{path}: no feature columns")
    x = np.vstack(columns)
    return Dataset(x=x, y=y, feature_names=names, name=name or str(path))


def split(dataset: Dataset, train_fraction: float = 0.75, seed=0):
    """Random disjoint, exhaustive train/test split; sizes round the fraction."""
    t = dataset.n_points
    if t < 4:
        raise DataError(f"need at least 4 data points to split, got {t}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n_train = int(round(train_fraction * t))
    n_train = min(max(n_train, 1), t - 1)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(t)
    idx_train = np.sort(perm[:n_train])
    idx_test = np.sort(perm[n_train:])

    def _take(idx, suffix):
        return Dataset(
            x=dataset.x[:, idx],
            y=dataset.y[idx],
            feature_names=list(dataset.feature_names),
            name=f"{dataset.name}_{suffix}",
        )

    return _take(idx_train, "train"), _take(idx_test, "test")


def _fmt(v) -> str:
    return repr(float(v))


def write_dataset_csv(path, dataset: Dataset):
    """Write a dataset as feature columns followed by the target column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(dataset.feature_names) + ["y"])
        for i in range(dataset.n_points):
            writer.writerow(
                [_fmt(v) for v in dataset.x[:, i]] + [_fmt(dataset.y[i])]
            )


def read_dataset_csv(path, name=None) -> Dataset:
    """Read a dataset written by :func:`write_dataset_csv`."""
    return load_csv(path, target="y", name=name)


def write_error_curve_csv(path, train_err, test_err, elm_band=None, timings=None):
    """Write matched train/test error curves, one row per neuron count.

    Header is ``n,train_err,test_err`` plus ``elm_mean,elm_min,elm_max`` when
    an ELM band (mean, min, max test curves) is supplied. A timing mapping is
    appended as ``# phase,milliseconds`` comment lines.
    """
    train_err = np.asarray(train_err, dtype=np.float64)
    test_err = np.asarray(test_err, dtype=np.float64)
    if train_err.shape != test_err.shape:
        raise ValueError("train and test curves must have the same length")
    header = ["n", "train_err", "test_err"]
    band = None
    if elm_band is not None:
        band = [np.asarray(c, dtype=np.float64) for c in elm_band]
        if len(band) != 3 or any(c.shape != train_err.shape for c in band):
            raise ValueError("elm_band must be three curves matching the others")
        header += ["elm_mean", "elm_min", "elm_max"]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for i in range(train_err.shape[0]):
                row = [str(i + 1), _fmt(train_err[i]), _fmt(test_err[i])]
                if band is not None:
                    row += [_fmt(c[i]) for c in band]
                fh.write(",".join(row) + "\n")
            if timings:
                for phase, ms in timings.items():
                    fh.write(f"# {phase},{_fmt(ms)}\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def read_error_curve_csv(path):
    """Read back an error-curve file; returns (columns, comments) dicts."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: file is empty")
    comments = {}
    data_lines = []
    for line in lines[1:]:
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(",")
            comments[key.strip()] = float(val)
        elif line.strip():
            data_lines.append(line)
    header = lines[0].split(",")
    cols = {h: np.empty(len(data_lines)) for h in header}
    for i, line in enumerate(data_lines):
        for h, tok in zip(header, line.split(",")):
            cols[h][i] = float(tok)
    cols["n"] = cols["n"].astype(np.int64) if "n" in cols else cols.get("n")
    return cols, comments
