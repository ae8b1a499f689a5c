"""Tabular data ingestion, positive-quadrant normalization and synthetic data.

A :class:`Dataset` bundles the numeric feature matrix with the optional
per-row columns the miners and reports need (label, prediction, loss and a
hidden group column that only evaluation code reads).

CSV dialect: comma separated, mandatory header row, UTF-8, ``.`` as the
decimal point.  Categorical features must be encoded by the caller.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "Dataset",
    "SynthSpec",
    "load_csv",
    "write_csv",
    "normalize_positive",
    "rotate_negative",
    "default_rotation_constant",
    "generate_synthetic",
]

MAJOR = "major"
MINOR = "minor"


def _freeze(a: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if a is not None:
        a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus optional label/prediction/loss/group columns.

    ``offset`` records the translation applied by :func:`normalize_positive`
    so that directions and values can be related back to the raw data.
    Arrays are made read-only on construction.
    """

    features: np.ndarray
    label: Optional[np.ndarray] = None
    prediction: Optional[np.ndarray] = None
    loss: Optional[np.ndarray] = None
    group: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None
    feature_names: tuple = field(default=())

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
        n, d = X.shape
        if n < 1:
            raise DataError("dataset must contain at least one row")
        if d < 2:
            raise DataError(f"dataset must have at least 2 features, got {d}")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")
        object.__setattr__(self, "features", _freeze(X))

        for name in ("label", "prediction", "group"):
            col = getattr(self, name)
            if col is not None:
                col = np.array(col)
                if col.shape != (n,):
                    raise DataError(f"{name} column has length {col.shape}, expected {n}")
                object.__setattr__(self, name, _freeze(col))

        if self.loss is not None:
            loss = np.array(self.loss, dtype=float)
            if loss.shape != (n,):
                raise DataError(f"loss column has length {loss.shape}, expected {n}")
            if not np.all(np.isfinite(loss)) or np.any(loss < 0):
                raise DataError("loss values must be finite and non-negative")
            object.__setattr__(self, "loss", _freeze(loss))

        offset = np.zeros(d) if self.offset is None else np.array(self.offset, dtype=float)
        if offset.shape != (d,):
            raise DataError(f"offset has shape {offset.shape}, expected ({d},)")
        object.__setattr__(self, "offset", _freeze(offset))

        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(d))
        if len(names) != d:
            raise DataError(f"{len(names)} feature names given for {d} features")
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def with_features(self, features, offset=None) -> "Dataset":
        """Copy with new features; every per-row column is carried over."""
        return replace(self, features=features, offset=self.offset if offset is None else offset)

    def select_features(self, names: Sequence[str]) -> "Dataset":
        """Restrict to the named feature columns (e.g. the two attributes of interest)."""
        idx = []
        for name in names:
            if name not in self.feature_names:
                raise DataError(f"unknown feature column {name!r}")
            idx.append(self.feature_names.index(name))
        return replace(
            self,
            features=self.features[:, idx],
            offset=self.offset[idx],
            feature_names=tuple(names),
        )


@dataclass(frozen=True)
class SynthSpec:
    """Two isotropic Gaussians, the second down-sampled to a minority."""

    d: int
    n_major: int
    n_minor: int
    mean_major: Sequence[float]
    mean_minor: Sequence[float]
    sd_major: float = 1.0
    sd_minor: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise DataError("d must be at least 2")
        if self.n_major < 1 or self.n_minor < 0:
            raise DataError("n_major must be >= 1 and n_minor >= 0")
        if self.n_minor > self.n_major:
            raise DataError("n_minor must not exceed n_major")
        if self.sd_major <= 0 or self.sd_minor <= 0:
            raise DataError("standard deviations must be positive")
        if len(self.mean_major) != self.d or len(self.mean_minor) != self.d:
            raise DataError("means must have length d")
        if self.seed < 0:
            raise DataError("seed must be a non-negative integer")


# -- CSV -------------------------------------------------------------------

def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"row {row}, column {column!r}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}, column {column!r}: non-finite value {cell!r}")
    return value


def _parse_class_column(cells: list) -> np.ndarray:
    """Class ids stay strings unless every cell is an integer literal."""
    try:
        as_float = [float(c) for c in cells]
    except ValueError:
        return np.array(cells, dtype=object)
    if all(v.is_integer() for v in as_float):
        return np.array([int(v) for v in as_float])
    return np.array(as_float)


def load_csv(
    path,
    features: Optional[Sequence[str]] = None,
    label: Optional[str] = None,
    prediction: Optional[str] = None,
    loss: Optional[str] = None,
    group: Optional[str] = None,
) -> Dataset:
    """Read a CSV file into a :class:`Dataset`.

    ``features`` names the feature columns; when omitted every column that is
    not mapped to label/prediction/loss/group is a feature.  Rows are numbered
    from 1 (the first line after the header) in error messages.
    """
    if not os.path.isfile(path):
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, header row is mandatory") from None
        rows = list(reader)

    mapped = {"label": label, "prediction": prediction, "loss": loss, "group": group}
    for role, name in mapped.items():
        if name is not None and name not in header:
            raise DataError(f"{path}: {role} column {name!r} not found in header")
    if features is None:
        taken = {v for v in mapped.values() if v is not None}
        features = [h for h in header if h not in taken]
    for name in features:
        if name not in header:
            raise DataError(f"{path}: feature column {name!r} not found in header")

    rows = [r for r in rows if r]  # tolerate a trailing blank line
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(header)
    for i, r in enumerate(rows, start=1):
        if len(r) != width:
            raise DataError(f"row {i}: expected {width} fields, found {len(r)}")

    col = {name: j for j, name in enumerate(header)}
    X = np.empty((len(rows), len(features)))
    for i, r in enumerate(rows, start=1):
        for j, name in enumerate(features):
            X[i - 1, j] = _parse_float(r[col[name]].strip(), i, name)

    extra = {}
    if loss is not None:
        extra["loss"] = [_parse_float(r[col[loss]].strip(), i, loss) for i, r in enumerate(rows, 1)]
    for role in ("label", "prediction"):
        if mapped[role] is not None:
            extra[role] = _parse_class_column([r[col[mapped[role]]].strip() for r in rows])
    if group is not None:
        extra["group"] = np.array([r[col[group]].strip() for r in rows], dtype=object)

    return Dataset(features=X, feature_names=tuple(features), **extra)


def write_csv(ds: Dataset, path) -> None:
    """Write features plus whichever optional columns are present."""
    extras = [(name, getattr(ds, name)) for name in ("label", "prediction", "loss", "group")]
    extras = [(name, col) for name, col in extras if col is not None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.feature_names) + [name for name, _ in extras])
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.features[i]]
            row += [col[i] if not isinstance(col[i], float) else repr(float(col[i])) for _, col in extras]
            w.writerow(row)


# -- transforms ------------------------------------------------------------

def normalize_positive(ds: Dataset, delta: float = 1.0) -> Dataset:
    """Translate each column so its minimum is at least ``delta``.

    Columns whose minimum is already >= delta are left alone.  The applied
    shift is added to ``ds.offset``.
    """
    if not delta > 0:
        raise DataError("delta must be positive")
    mins = ds.features.min(axis=0)
    shift = np.where(mins < delta, delta - mins, 0.0)
    return ds.with_features(ds.features + shift, offset=ds.offset + shift)


def default_rotation_constant(ds: Dataset) -> float:
    return float(math.ceil(ds.features.max())) + 1.0


def rotate_negative(ds: Dataset, A: Optional[float] = None) -> Dataset:
    """Map every 2-D point (x, y) to (y, A - x).

    Sweeping the first quadrant of the result covers the directions of the
    second quadrant of the input: a direction g on the rotated data equals
    the direction (-g[1], g[0]) on the original data.
    """
    if ds.d != 2:
        raise DataError("rotate_negative is defined for 2-D data only")
    if A is None:
        A = default_rotation_constant(ds)
    x, y = ds.features[:, 0], ds.features[:, 1]
    if not A > x.max():
        raise DataError(f"A={A} must exceed the largest x-coordinate {x.max()}")
    return ds.with_features(np.column_stack([y, A - x]))


# -- synthetic data --------------------------------------------------------

def generate_synthetic(
    spec: SynthSpec,
    loss_rule: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
) -> Dataset:
    """Sample the two-Gaussian benchmark.

    Uses numpy's PCG64 generator (``np.random.default_rng(seed)``), so the
    output is reproducible across runs and platforms.  Rows are shuffled so
    the minority is not a contiguous block.  ``loss_rule(features, group)``
    may derive a loss column.
    """
    rng = np.random.default_rng(spec.seed)
    major = rng.normal(np.asarray(spec.mean_major, float), spec.sd_major, size=(spec.n_major, spec.d))
    minor = rng.normal(np.asarray(spec.mean_minor, float), spec.sd_minor, size=(spec.n_minor, spec.d))
    X = np.vstack([major, minor])
    g = np.array([MAJOR] * spec.n_major + [MINOR] * spec.n_minor, dtype=object)
    perm = rng.permutation(len(X))
    X, g = X[perm], g[perm]
    loss = None if loss_rule is None else np.asarray(loss_rule(X, g), dtype=float)
    return Dataset(features=X, group=g, loss=loss)

