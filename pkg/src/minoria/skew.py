"""Pearson median skewness of linear projections.

``skew(D_f) = 3 (mean - median) / sd`` with the population standard deviation
and the single-tuple median at ascending rank ceil(n/2), so the median is
always an actual data row.

:func:`skew_naive` projects every row (O(n d + n log n)) and is the reference.
:func:`skew_fast` reuses :class:`SkewAggregates` and needs only the median row,
so each evaluation is O(d^2) regardless of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dual import angle_of, direction_at
from .errors import (
    BoundInapplicableError,
    DataError,
    DegenerateProjectionError,
    MedianEqualsMeanError,
    RankDeficientError,
)
from .median_level import MedianRegion, median_rank

# Projections whose spread is below this fraction of the data's total spread count as degenerate.
SIGMA_REL_TOL = 1e-10
RCOND_MIN = 1e-12


def _features(data) -> np.ndarray:
    return np.asarray(getattr(data, "features", data), dtype=float)


@dataclass(frozen=True, eq=False)
class SkewAggregates:
    """Sufficient statistics for O(d^2) skew evaluation.

    ``gram`` is T^T T over the raw rows and ``cov_gram`` is Q Q^T over the
    mean-centred rows, computed directly from centred data.
    """

    mean_vec: np.ndarray
    sum_vec: np.ndarray
    gram: np.ndarray
    cov_gram: np.ndarray
    n: int
    spread: float
    rcond: float


def precompute_aggregates(data) -> SkewAggregates:
    X = _features(data)
    n = X.shape[0]
    if n < 2:
        raise DataError("at least two rows are needed for a standard deviation")
    mean = X.mean(axis=0)
    Q = X - mean
    cov_gram = Q.T @ Q
    cov_gram = (cov_gram + cov_gram.T) / 2
    s = np.linalg.svd(cov_gram, compute_uv=False)
    rcond = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    return SkewAggregates(
        mean_vec=mean,
        sum_vec=X.sum(axis=0),
        gram=X.T @ X,
        cov_gram=cov_gram,
        n=n,
        spread=math.sqrt(float(np.trace(cov_gram)) / n),
        rcond=rcond,
    )


def _check_sigma(sigma: float, spread: float) -> None:
    if not sigma > SIGMA_REL_TOL * spread or spread == 0:
        raise DegenerateProjectionError("degenerate projection: standard deviation is zero")


def median_value(values: np.ndarray) -> float:
    """Value at ascending rank ceil(n/2)."""
    k = median_rank(len(values))
    return float(np.partition(values, k)[k])


def median_row(data, f) -> int:
    """Row id of the projection median (ties by ascending row id)."""
    proj = _features(data) @ np.asarray(f, dtype=float)
    return int(np.argsort(proj, kind="stable")[median_rank(len(proj))])


def skew_naive(data, f) -> float:
    X = _features(data)
    n = X.shape[0]
    if n < 2:
        raise DataError("at least two rows are needed for a standard deviation")
    proj = X @ np.asarray(f, dtype=float)
    mu = proj.mean()
    nu = median_value(proj)
    sigma = math.sqrt(float(np.mean((proj - mu) ** 2)))
    spread = math.sqrt(float(np.sum((X - X.mean(axis=0)) ** 2)) / n)
    _check_sigma(sigma, spread)
    return 3.0 * (mu - nu) / sigma


def projection_sigma(agg: SkewAggregates, f) -> float:
    f = np.asarray(f, dtype=float)
    var = float(f @ agg.cov_gram @ f) / agg.n
    return math.sqrt(max(var, 0.0))


def skew_fast(agg: SkewAggregates, f, median_row) -> float:
    """Skew along ``f`` given the median tuple, in O(d^2).

    The variance uses the centred scatter f^T Q Q^T f / n, which equals
    (f^T T'f - 2 mu_f S.f + n mu_f^2) / n without its cancellation error.
    """
    f = np.asarray(f, dtype=float)
    mu = float(agg.mean_vec @ f)
    nu = float(np.asarray(median_row, dtype=float) @ f)
    sigma = projection_sigma(agg, f)
    _check_sigma(sigma, agg.spread)
    return 3.0 * (mu - nu) / sigma


def stationary_direction(agg: SkewAggregates, median_row) -> np.ndarray:
    """Unit vector along (Q Q^T)^{-1} q_m with q_m = median_row - mean (sign-free)."""
    if agg.rcond < RCOND_MIN:
        raise RankDeficientError("rank-deficient data: centred scatter matrix is singular")
    q = np.asarray(median_row, dtype=float) - agg.mean_vec
    if np.linalg.norm(q) <= 1e-12 * max(agg.spread, 1e-300):
        raise MedianEqualsMeanError("median equals mean, interior stationary point undefined")
    v = np.linalg.solve(agg.cov_gram, q)
    return v / np.linalg.norm(v)


def interior_candidate(agg: SkewAggregates, region: MedianRegion, row) -> np.ndarray | None:
    """The stationary direction if either of its signs lies strictly inside the region."""
    try:
        v = stationary_direction(agg, row)
    except (RankDeficientError, MedianEqualsMeanError):
        return None
    for cand in (v, -v):
        if region.contains(angle_of(cand)):
            return cand
    return None


def orient_positive(agg: SkewAggregates, data, f, s: float):
    """Return ``(g, skew(g))`` with ``g = f`` or ``-f`` such that the skew is non-negative.

    For odd n the median of -f is the same tuple and skew(-f) = -skew(f).
    For even n it is the other central tuple, so the skew of -f is
    re-evaluated; it is then at least -skew(f) > 0.
    """
    f = np.asarray(f, dtype=float)
    if s >= 0:
        return f, s
    if agg.n % 2:
        return -f, -s
    X = _features(data)
    return -f, skew_fast(agg, -f, X[median_row(X, -f)])


def region_max_skew(agg: SkewAggregates, region: MedianRegion, data, interior: bool = True):
    """Largest |skew| over a median region.

    |skew| is monotone inside a region away from the stationary direction,
    so it suffices to check both boundary rays and, when it falls inside the
    region, the stationary direction.  Returns ``(f, skew)`` with ``f``
    oriented so the skew is positive (see :func:`orient_positive`).
    """
    X = _features(data)
    row = X[region.median_index]
    candidates = [direction_at(region.theta_lo), direction_at(region.theta_hi)]
    if interior:
        c = interior_candidate(agg, region, row)
        if c is not None:
            candidates.append(c)
    best = None
    for f in candidates:
        try:
            s = skew_fast(agg, f, row)
        except DegenerateProjectionError:
            continue
        if best is None or abs(s) > abs(best[1]):
            best = (f, s)
    if best is None:
        raise DegenerateProjectionError("every candidate direction in the region is degenerate")
    return orient_positive(agg, X, *best)


def rotation_bound_check(data, f, alpha: float):
    """Ratio skew(R_alpha f) / skew(f) and the bound 1 + tan(alpha) tan(beta_m).

    ``beta_m`` is the angle from q_m = mean - t_m to f, signed so that
    q_m.(R_alpha f) / q_m.f = cos(alpha) + sin(alpha) tan(beta_m) exactly.
    """
    X = _features(data)
    if X.shape[1] != 2:
        raise DataError("the rotation bound is defined for 2-D data")
    f = np.asarray(f, dtype=float)
    c, s = math.cos(alpha), math.sin(alpha)
    g = np.array([c * f[0] - s * f[1], s * f[0] + c * f[1]])
    m = median_row(X, f)
    if median_row(X, g) != m:
        raise BoundInapplicableError("bound inapplicable: the median changed under rotation")
    q = X.mean(axis=0) - X[m]
    tan_beta = (q[1] * f[0] - q[0] * f[1]) / (q[0] * f[0] + q[1] * f[1])
    ratio = skew_naive(X, g) / skew_naive(X, f)
    return ratio, 1.0 + math.tan(alpha) * tan_beta
