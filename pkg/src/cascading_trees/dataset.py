"""Labeled numeric datasets: CSV loading/export, seeded folds, train/test splits.

CSV dialect: comma separated, UTF-8, optional header row. Feature cells are
real numbers, ``T``/``True`` (1.0), ``F``/``False`` (0.0), or a missing marker
(empty cell or ``?``), which becomes NaN.

Fold assignment is pinned so that it is identical on every platform: a
SplitMix64 generator seeded with the user's 64-bit seed drives a Fisher-Yates
shuffle of the row indices, and shuffled position ``i`` is assigned to fold
``i % fold_count``.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, EmptyDatasetError

DATA_DIR_ENV = "CASCADING_TREES_DATA_DIR"

_TRUE_TOKENS = {"T", "True", "TRUE", "true"}
_FALSE_TOKENS = {"F", "False", "FALSE", "false"}
_MISSING_TOKENS = {"", "?"}

_MASK64 = (1 << 64) - 1


class Label(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    # only produced by tolerant cascade prediction
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable n x k feature matrix with binary labels.

    ``X`` holds float64 values (NaN marks a missing value) and ``y`` holds
    booleans, True for Positive.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=bool)
        if X.ndim != 2:
            raise DataError(f"feature matrix must be 2-dimensional, got shape {X.shape}")
        n, k = X.shape
        if n < 1:
            raise EmptyDatasetError("dataset has no rows")
        if k < 1:
            raise DataError("dataset has no feature columns")
        if y.shape != (n,):
            raise DataError(f"expected {n} labels, got shape {y.shape}")
        names = tuple(self.feature_names)
        if len(names) != k:
            raise DataError(f"expected {k} feature names, got {len(names)}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @classmethod
    def from_rows(cls, rows, labels, feature_names=None) -> "Dataset":
        """Build from nested sequences; labels may be bools or ``Label`` values."""
        X = np.array(rows, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1) if len(labels) == 1 else X.reshape(-1, 1)
        y = np.array([_as_positive(v) for v in labels], dtype=bool)
        if feature_names is None:
            feature_names = [f"f{i}" for i in range(X.shape[1])]
        return cls(X, y, tuple(feature_names))

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def labels(self) -> list[Label]:
        return [Label.POSITIVE if v else Label.NEGATIVE for v in self.y]

    @property
    def positive_count(self) -> int:
        return int(self.y.sum())

    @property
    def negative_count(self) -> int:
        return self.n_samples - self.positive_count

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.X).any())

    @property
    def is_boolean(self) -> bool:
        """True when every present value is 0.0 or 1.0."""
        present = self.X[~np.isnan(self.X)]
        return bool(np.isin(present, (0.0, 1.0)).all())

    def boolean_columns(self) -> tuple[bool, ...]:
        """Per feature: True when every present value is 0.0 or 1.0."""
        return tuple(
            bool(np.isin(col[~np.isnan(col)], (0.0, 1.0)).all()) for col in self.X.T
        )

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self.X[indices], self.y[indices], self.feature_names)

    def fingerprint(self) -> str:
        """SHA-256 over the feature names, values and labels."""
        h = hashlib.sha256()
        h.update("\x1f".join(self.feature_names).encode())
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()


def _as_positive(value) -> bool:
    if isinstance(value, Label):
        if value is Label.UNKNOWN:
            raise DataError("dataset labels must be Positive or Negative")
        return value is Label.POSITIVE
    if isinstance(value, str):
        if value == Label.POSITIVE.value:
            return True
        if value == Label.NEGATIVE.value:
            return False
        raise DataError(f"unrecognised label {value!r}")
    return bool(value)


def parse_cell(text: str) -> float:
    """Parse one feature cell. Raises ``ValueError`` on anything unrecognised."""
    text = text.strip()
    if text in _MISSING_TOKENS:
        return math.nan
    if text in _TRUE_TOKENS:
        return 1.0
    if text in _FALSE_TOKENS:
        return 0.0
    value = float(text)
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def resolve_data_path(path) -> Path:
    """Relative paths that don't exist are looked up under ``$CASCADING_TREES_DATA_DIR``."""
    p = Path(path)
    if not p.is_absolute() and not p.exists():
        base = os.environ.get(DATA_DIR_ENV)
        if base and (Path(base) / p).exists():
            return Path(base) / p
    return p


def load_csv(path, label_column=-1, positive_label="Positive", has_header=True) -> Dataset:
    """Load a labeled dataset from CSV.

    ``label_column`` is a header name (requires ``has_header``) or a column
    index; negative indices count from the end. Rows whose label cell equals
    ``positive_label`` become Positive, every other label becomes Negative.
    """
    path = resolve_data_path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        reader = csv.reader(fh)
        rows = [(reader.line_num, row) for row in reader if row and any(c.strip() for c in row)]

    header = None
    if has_header:
        if not rows:
            raise EmptyDatasetError(f"{path}: no header and no data rows")
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")

    width = len(header) if header is not None else len(rows[0][1])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column and a label column")

    if isinstance(label_column, str):
        if header is None:
            raise ConfigError(f"label column {label_column!r} given by name but the file has no header")
        if label_column not in header:
            raise ConfigError(f"unknown label column {label_column!r}")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise ConfigError(f"label column index {label_column} out of range for {width} columns")
        label_idx %= width

    feature_cols = [i for i in range(width) if i != label_idx]
    if header is not None:
        names = [header[i] for i in feature_cols]
    else:
        names = [f"f{j}" for j in range(len(feature_cols))]

    X = np.empty((len(rows), len(feature_cols)), dtype=np.float64)
    y = np.empty(len(rows), dtype=bool)
    for r, (line, row) in enumerate(rows):
        if len(row) != width:
            raise DataError(f"expected {width} fields, found {len(row)}", line=line)
        for j, c in enumerate(feature_cols):
            try:
                X[r, j] = parse_cell(row[c])
            except ValueError:
                raise DataError(f"cannot parse {row[c]!r} in column {c}", line=line) from None
        y[r] = row[label_idx].strip() == positive_label
    return Dataset(X, y, tuple(names))


def format_cell(value: float) -> str:
    if math.isnan(value):
        return "?"
    # repr is the shortest string that round-trips exactly
    return repr(float(value))


def write_csv(dataset: Dataset, path, label_name="Label") -> None:
    """Write ``dataset`` in the dialect ``load_csv`` reads, label column last."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*dataset.feature_names, label_name])
        for row, lab in zip(dataset.X, dataset.labels):
            w.writerow([*(format_cell(v) for v in row), lab.value])


class SplitMix64:
    """SplitMix64 (Steele, Lea & Flood 2014); pure integer arithmetic, so portable."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection sampling (no modulo bias)."""
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            v = self.next()
            if v < limit:
                return v % bound


def shuffled_indices(n: int, seed: int) -> list[int]:
    rng = SplitMix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@dataclass(frozen=True)
class FoldSplit:
    fold_count: int
    assignments: tuple[int, ...]
    seed: int = field(default=0)

    @property
    def n_samples(self) -> int:
        return len(self.assignments)

    def fold_sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.fold_count).tolist()

    def fingerprint(self) -> str:
        payload = f"{self.fold_count}:{self.seed}:" + ",".join(map(str, self.assignments))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def make_folds(dataset: Dataset | int, fold_count: int, seed: int) -> FoldSplit:
    n = dataset if isinstance(dataset, int) else dataset.n_samples
    if fold_count < 2:
        raise ConfigError(f"fold_count must be at least 2, got {fold_count}")
    if fold_count > n:
        raise ConfigError(f"fold_count {fold_count} exceeds the number of samples {n}")
    assignments = [0] * n
    for pos, idx in enumerate(shuffled_indices(n, seed)):
        assignments[idx] = pos % fold_count
    return FoldSplit(fold_count, tuple(assignments), seed)


def fold_indices(folds: FoldSplit, test_fold: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 <= test_fold < folds.fold_count:
        raise ConfigError(f"test fold {test_fold} out of range [0, {folds.fold_count})")
    a = np.asarray(folds.assignments)
    return np.flatnonzero(a != test_fold), np.flatnonzero(a == test_fold)


def split_by_fold(dataset: Dataset, folds: FoldSplit, test_fold: int) -> tuple[Dataset, Dataset]:
    if folds.n_samples != dataset.n_samples:
        raise ConfigError(
            f"fold split covers {folds.n_samples} samples, dataset has {dataset.n_samples}"
        )
    train_idx, test_idx = fold_indices(folds, test_fold)
    return dataset.subset(train_idx), dataset.subset(test_idx)


def boolean_rows(rows: Sequence[Sequence]) -> np.ndarray:
    """Convenience for T/F literals: ``boolean_rows(["TTTF", "FFFT"])``."""
    return np.array([[parse_cell(c) for c in r] for r in rows], dtype=np.float64)
