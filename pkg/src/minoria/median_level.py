"""Median regions of a 2-D dual line arrangement via a kinetic angular sweep.

A ray from the origin at angle theta in [0, pi/2] crosses every dual line
(all coordinates are positive after normalization).  The median tuple is the
one at ascending projection rank ceil(n/2).  It only changes where two dual
lines cross, so sweeping the ray counter-clockwise over every pairwise
crossing in the open first quadrant, while keeping the lines sorted by
projection, yields the ordered list of median regions.  This costs
O(n^2 log n), dominated by sorting the crossing events.

Degeneracies are resolved with a fixed total order:
  * the initial order is the order just after theta = 0, by (x, y, row id);
  * events whose angles agree within ``ANGLE_TOL`` form one group; within a
    group, lines that cross each other are re-sorted by their projection
    derivative (the order just past the crossing), ties by row id;
  * duplicate rows never swap, so the lower row id stays first.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dual import DualLine, pairwise_intersection
from .errors import DataError, SweepError

HALF_PI = math.pi / 2
ANGLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MedianRegion:
    theta_lo: float
    theta_hi: float
    median_index: int
    boundary_vertex: Optional[np.ndarray] = None

    def contains(self, theta: float) -> bool:
        return self.theta_lo < theta < self.theta_hi


@dataclass(frozen=True)
class SweepEvent:
    theta: float
    i: int
    j: int


def median_rank(n: int) -> int:
    """0-based ascending position of the single-tuple median."""
    return (n + 1) // 2 - 1


def sweep_events(X: np.ndarray) -> tuple:
    """All pairwise crossings strictly inside the open first quadrant.

    Returns ``(theta, i, j)`` arrays sorted by (theta, radius, min id, max id).
    Pair (i, j) crosses at angle theta where (t_i - t_j).f(theta) = 0; this
    lies in the open quadrant iff the coordinate differences have opposite
    signs.
    """
    n = X.shape[0]
    i, j = np.triu_indices(n, k=1)
    da = X[i, 0] - X[j, 0]
    db = X[i, 1] - X[j, 1]
    keep = da * db < 0
    i, j, da, db = i[keep], j[keep], da[keep], db[keep]
    theta = np.arctan2(np.abs(da), np.abs(db))
    radius = 1.0 / (X[i, 0] * np.cos(theta) + X[i, 1] * np.sin(theta))
    order = np.lexsort((j, i, radius, theta))
    return theta[order], i[order], j[order]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def _vertex(X, old: int, new: int, theta: float) -> np.ndarray:
    v = pairwise_intersection(DualLine(X[old], old), DualLine(X[new], new))
    if v is None:
        f = np.array([math.cos(theta), math.sin(theta)])
        v = f / float(X[old] @ f)
    return v


def enumerate_median_regions(data) -> list:
    """Ordered (counter-clockwise) median regions tiling [0, pi/2]."""
    X = np.asarray(getattr(data, "features", data), dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise DataError("median regions are computed for 2-D data only")
    if np.any(X <= 0):
        raise DataError(
            "all coordinates must be strictly positive; apply normalize_positive first"
        )
    n = X.shape[0]
    k = median_rank(n)

    order = list(np.lexsort((np.arange(n), X[:, 1], X[:, 0])))
    pos = [0] * n
    for p, r in enumerate(order):
        pos[r] = p

    thetas, ii, jj = sweep_events(X)
    a = X[:, 0].tolist()
    b = X[:, 1].tolist()
    thetas_l, ii_l, jj_l = thetas.tolist(), ii.tolist(), jj.tolist()

    regions = []
    lo = 0.0
    median = order[k]
    m = len(thetas_l)
    e = 0
    while e < m:
        stop = e + 1
        while stop < m and thetas_l[stop] - thetas_l[stop - 1] <= ANGLE_TOL:
            stop += 1
        theta = thetas_l[e]
        if stop == e + 1:
            r, s = ii_l[e], jj_l[e]
            # after the crossing the line with the larger y-coefficient projects higher
            hi, other = (r, s) if b[r] > b[s] else (s, r)
            if pos[hi] < pos[other]:
                if pos[other] != pos[hi] + 1:
                    raise SweepError(
                        f"non-adjacent swap of rows {r} and {s} at theta={theta!r}"
                    )
                p = pos[hi]
                order[p], order[p + 1] = other, hi
                pos[other], pos[hi] = p, p + 1
        else:
            _apply_group(order, pos, a, b, thetas_l, ii_l, jj_l, e, stop)
        e = stop
        if order[k] != median:
            new = order[k]
            regions.append(MedianRegion(lo, theta, median, _vertex(X, median, new, theta)))
            lo, median = theta, new
    regions.append(MedianRegion(lo, HALF_PI, median, None))
    return regions


def _apply_group(order, pos, a, b, thetas, ii, jj, start, stop) -> None:
    uf = _UnionFind()
    first_theta = {}
    for e in range(start, stop):
        uf.union(ii[e], jj[e])
    for e in range(start, stop):
        root = uf.find(ii[e])
        first_theta.setdefault(root, thetas[e])
    for members in uf.groups():
        theta = first_theta[uf.find(members[0])]
        s, c = math.sin(theta), math.cos(theta)
        slots = sorted(pos[r] for r in members)
        if slots[-1] - slots[0] + 1 != len(slots):
            raise SweepError(
                f"crossing lines {sorted(members)} are not contiguous at theta={theta!r}"
            )
        ranked = sorted(members, key=lambda r: (b[r] * c - a[r] * s, r))
        for p, r in zip(slots, ranked):
            order[p] = r
            pos[r] = p


def median_at(regions: Sequence[MedianRegion], theta: float) -> int:
    """Median row id at ``theta``; a boundary angle resolves to the counter-clockwise region."""
    if not 0.0 <= theta <= HALF_PI:
        raise ValueError(f"theta={theta} outside [0, pi/2]")
    los = [r.theta_lo for r in regions]
    return regions[bisect.bisect_right(los, theta) - 1].median_index


def dump_regions_csv(regions: Sequence[MedianRegion], path) -> None:
    """Debug dump: theta_lo, theta_hi, median_index, vertex_x, vertex_y."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_lo", "theta_hi", "median_index", "vertex_x", "vertex_y"])
        for r in regions:
            vx, vy = ("", "") if r.boundary_vertex is None else map(repr, map(float, r.boundary_vertex))
            w.writerow([repr(r.theta_lo), repr(r.theta_hi), r.median_index, vx, vy])
