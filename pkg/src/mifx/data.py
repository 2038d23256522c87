"""Dataset container, CSV ingestion, train-set normalization and fold planning."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sample matrix with integer class labels.

    ``labels`` are contiguous integers in ``[0, n_classes)``. Subsets produced by
    :meth:`take` keep the parent's ``n_classes`` so label codes stay comparable
    across folds even when a fold happens to miss a class.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_names: tuple[str, ...] | None = None
    class_names: tuple[str, ...] | None = None
    name: str = "dataset"

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, copy=True)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
        if X.shape[1] < 1:
            raise DataError("at least one feature column is required")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(f"labels length {y.shape[0]} does not match {X.shape[0]} samples")
        if y.size and not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataError("labels must be integer class codes")
        y = y.astype(np.int64)
        if not np.all(np.isfinite(X)):
            raise DataError("features contain NaN or infinite values")
        if self.n_classes < 1:
            raise DataError("n_classes must be positive")
        if y.size and (y.min() < 0 or y.max() >= self.n_classes):
            raise DataError(f"labels must lie in [0, {self.n_classes})")
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise DataError("feature_names length does not match feature count")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.class_names is not None:
            object.__setattr__(self, "class_names", tuple(self.class_names))

    @classmethod
    def from_arrays(cls, features, labels, n_classes: int | None = None, **kwargs) -> "Dataset":
        """Build a complete dataset, checking that every class is present."""
        labels = np.asarray(labels)
        if n_classes is None:
            n_classes = int(labels.max()) + 1 if labels.size else 0
        ds = cls(features, labels, n_classes, **kwargs)
        ds.check_complete()
        return ds

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def check_complete(self) -> None:
        """Full-dataset invariants: n >= 2 and every class appears at least once."""
        if self.n < 2:
            raise DataError(f"need at least 2 samples, got {self.n}")
        present = np.bincount(self.labels, minlength=self.n_classes)
        missing = np.flatnonzero(present == 0)
        if missing.size:
            raise DataError(f"classes {missing.tolist()} have no samples")

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx], self.n_classes,
                       self.feature_names, self.class_names, self.name)

    def with_features(self, features, feature_names=None) -> "Dataset":
        """Same labels and metadata, new feature matrix (e.g. after projection)."""
        return Dataset(features, self.labels, self.n_classes, feature_names,
                       self.class_names, self.name)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def _resolve_column(label_column, header: list[str] | None, ncols: int) -> int:
    if isinstance(label_column, str):
        if label_column == "last":
            return ncols - 1
        if label_column == "first":
            return 0
        if header is not None and label_column in header:
            return header.index(label_column)
        try:
            label_column = int(label_column)
        except ValueError:
            raise DataError(f"label column {label_column!r} not found") from None
    idx = int(label_column)
    if idx < 0:
        idx += ncols
    if not 0 <= idx < ncols:
        raise DataError(f"label column {label_column!r} not found ({ncols} columns)")
    return idx


def read_rows(path, header: bool = True) -> tuple[list[str] | None, list[list[str]]]:
    """Read a CSV file into an optional header row and stripped string cells."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with open(path, newline="") as f:
        rows = [[c.strip() for c in r] for r in csv.reader(f) if r and any(c.strip() for c in r)]
    names = None
    if header:
        if not rows:
            raise DataError(f"{path}: empty file")
        names = rows.pop(0)
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"{path}: row {i + 1 + int(header)} has {len(r)} columns, expected {width}")
    if names is not None and len(names) != width:
        raise DataError(f"{path}: header has {len(names)} columns, data has {width}")
    return names, rows


def parse_float(cell: str, row: int, col) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise DataError(f"row {row}, column {col}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(v):
        raise DataError(f"row {row}, column {col}: non-finite value {cell!r}")
    return v


def load_csv(path, label_column="last", header: bool = True, name: str | None = None) -> Dataset:
    """Load a CSV file whose label column holds class identifiers.

    Labels are re-encoded to ``0..C-1`` in order of first appearance; feature
    columns keep their file order. Row numbers in error messages are 1-based
    file lines.
    """
    names, rows = read_rows(path, header)
    ncols = len(rows[0])
    if ncols < 2:
        raise DataError(f"{path}: need a label column and at least one feature column")
    li = _resolve_column(label_column, names, ncols)
    feat_cols = [j for j in range(ncols) if j != li]

    codes: dict[str, int] = {}
    labels = np.empty(len(rows), dtype=np.int64)
    X = np.empty((len(rows), len(feat_cols)))
    for i, r in enumerate(rows):
        line = i + 1 + int(header)
        labels[i] = codes.setdefault(r[li], len(codes))
        for k, j in enumerate(feat_cols):
            X[i, k] = parse_float(r[j], line, names[j] if names else j)
    if len(codes) < 2:
        raise DataError(f"{path}: fewer than 2 classes in label column")
    ds = Dataset(X, labels, len(codes),
                 feature_names=[names[j] for j in feat_cols] if names else None,
                 class_names=list(codes), name=name or Path(path).stem)
    ds.check_complete()
    return ds


def write_csv(data: Dataset, path, label_name: str = "label") -> None:
    """Write features (round-trip exact float repr) followed by the label column."""
    names = data.feature_names or tuple(f"x{j}" for j in range(data.d))
    classes = data.class_names or tuple(str(c) for c in range(data.n_classes))
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([*names, label_name])
        for row, lab in zip(data.features, data.labels):
            w.writerow([repr(float(v)) for v in row] + [classes[lab]])


@dataclass(frozen=True, eq=False)
class NormParams:
    per_feature_abs_max: np.ndarray

    def __post_init__(self):
        a = np.array(self.per_feature_abs_max, dtype=np.float64)
        if a.ndim != 1 or not np.all(a > 0):
            raise DataError("normalizer divisors must be a 1-D array of positive values")
        a.setflags(write=False)
        object.__setattr__(self, "per_feature_abs_max", a)


def fit_normalizer(train: Dataset, mode: str = "per-feature") -> NormParams:
    """Absolute-maximum scaling fitted on training data only.

    ``mode="global"`` uses one divisor (the largest absolute value in the whole
    matrix) for every column. Zero maxima become 1.0 so constant-zero columns
    pass through unchanged.
    """
    if train.n == 0:
        raise DataError("cannot fit a normalizer on an empty dataset")
    a = np.abs(train.features).max(axis=0)
    if mode == "global":
        a = np.full_like(a, a.max())
    elif mode != "per-feature":
        raise ValueError(f"unknown normalization mode {mode!r}")
    a = np.where(a == 0, 1.0, a)
    return NormParams(a)


def apply_normalizer(params: NormParams, data: Dataset) -> Dataset:
    if params.per_feature_abs_max.shape[0] != data.d:
        raise DataError(f"normalizer has {params.per_feature_abs_max.shape[0]} features, data has {data.d}")
    return data.with_features(data.features / params.per_feature_abs_max, data.feature_names)


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int
    stratified: bool = True

    def __post_init__(self):
        a = np.array(self.assignments, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def splits(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        for f in range(self.k):
            yield self.train_indices(f), self.test_indices(f)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def stratified_kfold(data: Dataset, k: int = 10, seed: int = 0, stratify: bool = True) -> FoldPlan:
    """Seeded k-fold partition.

    Samples of each class are shuffled and the classes are laid end to end, then
    dealt round-robin to folds. Dealing one global sequence keeps overall fold
    sizes within 1 of each other, and each class occupies a contiguous run of
    that sequence so its per-fold counts also differ by at most 1.
    """
    if k < 2:
        raise DataError("fold count must be at least 2")
    if k > data.n:
        raise DataError(f"fold count {k} exceeds sample count {data.n}")
    rng = np.random.default_rng(seed)
    if stratify:
        order = np.concatenate([rng.permutation(np.flatnonzero(data.labels == c))
                                for c in range(data.n_classes)])
    else:
        order = rng.permutation(data.n)
    assignments = np.empty(data.n, dtype=np.int64)
    assignments[order] = np.arange(data.n) % k
    return FoldPlan(k, assignments, seed, stratify)


def parse_dims(text: str) -> list[int]:
    """Parse ``"1-7"``, ``"1,2,5"`` or mixtures like ``"1-3,6"`` into a sorted list."""
    out: set[int] = set()
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise ValueError(f"empty range {part!r}")
            out.update(range(lo, hi + 1))
        else:
            out.add(int(part))
    if not out or min(out) < 1:
        raise ValueError(f"invalid dims specification {text!r}")
    return sorted(out)


def select_columns(data: Dataset, columns: Sequence[int]) -> Dataset:
    cols = list(columns)
    names = [data.feature_names[j] for j in cols] if data.feature_names else None
    return data.with_features(data.features[:, cols], names)
