"""k-means clustering baseline and per-cluster group ratios.

Used to check whether plain clustering isolates an under-represented group:
if group labels are unrelated to position, every cluster should carry about
the same minority ratio as the whole dataset.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import Dataset
from .errors import DataError

RATIO_MODES = ("total", "majority")


@dataclass(eq=False)
class Clustering:
    assignment: np.ndarray
    centroids: np.ndarray
    inertia: float
    history: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.centroids)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    D = (X * X).sum(1)[:, None] - 2 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(D, 0.0)


def _kmeans_pp(X: np.ndarray, k: int, rng) -> np.ndarray:
    n = len(X)
    idx = [int(rng.integers(n))]
    closest = ((X - X[idx[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every row already coincides with a centre; pick unused rows
            rest = np.setdiff1d(np.arange(n), idx)
            nxt = int(rng.choice(rest))
        else:
            nxt = int(rng.choice(n, p=closest / total))
        idx.append(nxt)
        closest = np.minimum(closest, ((X - X[nxt]) ** 2).sum(1))
    return X[idx].copy()


def kmeans(ds, k: int, seed: int = 0, max_iter: int = 300) -> Clustering:
    """Lloyd iterations from a seeded k-means++ start.

    An empty cluster is re-seeded at the row farthest from its current
    centroid.  ``history`` records the inertia after every assignment step.
    """
    X = np.asarray(getattr(ds, "features", ds), dtype=float)
    n = len(X)
    if not 1 <= k <= n:
        raise DataError(f"k must lie in [1, n={n}], got {k}")
    rng = np.random.default_rng(seed)
    C = _kmeans_pp(X, k, rng)
    assign = None
    history = []
    for _ in range(max_iter):
        D = _sq_dists(X, C)
        new = D.argmin(1)
        history.append(float(D[np.arange(n), new].sum()))
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        for c in range(k):
            members = assign == c
            if members.any():
                C[c] = X[members].mean(0)
            else:
                far = int(D[np.arange(n), assign].argmax())
                C[c] = X[far]
                assign[far] = c
                D[far] = 0.0
    D = _sq_dists(X, C)
    assign = D.argmin(1)
    inertia = float(((X - C[assign]) ** 2).sum())
    return Clustering(assign, C, inertia, history)


def minority_label(groups: np.ndarray):
    counts = Counter(groups.tolist())
    return min(counts, key=lambda g: (counts[g], str(g)))


def _ratio(groups: np.ndarray, minority, mode: str) -> float:
    hits = int(np.sum(groups == minority))
    if mode == "total":
        return hits / len(groups)
    rest = len(groups) - hits
    return float("inf") if rest == 0 else hits / rest


def cluster_group_ratios(ds: Dataset, clustering: Clustering, minority=None, mode: str = "total") -> list:
    """One row per cluster then a ``total`` row: dicts with cluster, size, ratio.

    ``mode="total"`` gives minority/size, ``mode="majority"`` gives
    minority/(size - minority) and is infinite for an all-minority cluster.
    The ratio key is named after the mode (``minority_over_total`` or
    ``minority_over_majority``).
    """
    if ds.group is None:
        raise DataError("a group column is required for group ratios")
    if mode not in RATIO_MODES:
        raise ValueError(f"mode must be one of {RATIO_MODES}")
    groups = ds.group
    if minority is None:
        minority = minority_label(groups)
    key = f"minority_over_{mode}"
    rows = []
    for c in range(clustering.k):
        members = groups[clustering.assignment == c]
        if len(members) == 0:
            rows.append({"cluster": c, "size": 0, key: float("nan")})
            continue
        rows.append({"cluster": c, "size": len(members), key: _ratio(members, minority, mode)})
    rows.append({"cluster": "total", "size": len(groups), key: _ratio(groups, minority, mode)})
    return rows


def write_ratio_csv(rows: list, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)


def write_assignment_csv(clustering: Clustering, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row_id", "cluster_id"])
        for i, c in enumerate(clustering.assignment):
            w.writerow([i, int(c)])


def read_assignment_csv(path, ds: Optional[Dataset] = None) -> Clustering:
    """Import cluster ids produced elsewhere; centroids and inertia are recomputed when ``ds`` is given."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"row_id", "cluster_id"} <= set(reader.fieldnames):
            raise DataError("assignment CSV needs row_id and cluster_id columns")
        pairs = []
        for line, row in enumerate(reader, start=1):
            try:
                pairs.append((int(row["row_id"]), int(row["cluster_id"])))
            except (TypeError, ValueError):
                raise DataError(f"row {line}: row_id and cluster_id must be integers") from None
    pairs.sort()
    ids = [p[0] for p in pairs]
    if ids != list(range(len(ids))):
        raise DataError("row ids must cover 0..n-1 exactly once")
    assign = np.array([p[1] for p in pairs], dtype=int)
    if assign.size and assign.min() < 0:
        raise DataError("cluster ids must be non-negative")
    k = int(assign.max()) + 1 if assign.size else 0
    if ds is None:
        return Clustering(assign, np.zeros((k, 0)), float("nan"))
    if ds.n != len(assign):
        raise DataError(f"assignment has {len(assign)} rows but the dataset has {ds.n}")
    X = ds.features
    C = np.array([X[assign == c].mean(0) if np.any(assign == c) else np.full(ds.d, np.nan) for c in range(k)])
    inertia = float(((X - C[assign]) ** 2).sum())
    return Clustering(assign, C, inertia)
