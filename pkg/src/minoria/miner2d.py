"""Two-dimensional mining: the Warm-up oracle and Ray-sweeping.

Both drivers evaluate candidate directions over the median regions of the
first quadrant, rank them by |skew| and pop them in order, keeping a
direction when its tail's mean loss exceeds the overall mean loss by at
least ``tau`` and it is angularly separated from every kept direction.

With ``passes=2`` the sweep is repeated on ``rotate_negative(ds)`` so that
directions of the second quadrant are covered too.  For odd n the
orientation flip (skew(-f) = -skew(f)) then covers every direction in the
plane.  For even n the median of -f is a different tuple, so two more passes
run on the point-reflected data to reach the third and fourth quadrants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .dataset import Dataset, rotate_negative
from .dual import direction_at
from .errors import DataError, DegenerateProjectionError
from .median_level import enumerate_median_regions
from .skew import orient_positive, precompute_aggregates, region_max_skew, skew_fast, skew_naive

DEFAULT_MIN_SEP_COS = math.cos(math.pi / 12)
SKEW_TIE_TOL = 1e-12


@dataclass(frozen=True)
class MiningParams:
    """``tau=None`` disables the loss gate (every separated candidate is accepted)."""

    l: int = 3
    p: float = 0.1
    tau: Optional[float] = 0.0
    min_sep_cos: float = DEFAULT_MIN_SEP_COS
    passes: int = 2

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("l must be non-negative")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")
        if not 0 < self.min_sep_cos <= 1:
            raise ValueError("min_sep_cos must lie in (0, 1]")
        if self.passes not in (1, 2):
            raise ValueError("passes must be 1 or 2")


@dataclass(eq=False)
class MiningCandidate:
    direction: np.ndarray
    skew: float
    tail: np.ndarray
    disparity: Optional[float]
    accepted: bool
    heuristic: str = ""
    metrics: dict = field(default_factory=dict)


def tail_size(n: int, p: float) -> int:
    return max(1, min(n, math.ceil(p * n)))


def p_tail(data, f, p: float, skew: Optional[float] = None) -> np.ndarray:
    """Row ids of the ceil(p n) rows on the long-tail side of the projection.

    Positive skew (mean above median) takes the highest projections, otherwise
    the lowest.  Ties go to the lower row id.  ``skew`` may be passed when the
    caller already knows it.
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    X = np.asarray(getattr(data, "features", data), dtype=float)
    n = X.shape[0]
    proj = X @ np.asarray(f, dtype=float)
    if skew is None:
        try:
            skew = skew_naive(X, f)
        except DegenerateProjectionError:
            skew = 0.0
    idx = np.arange(n)
    key = -proj if skew > 0 else proj
    return np.lexsort((idx, key))[: tail_size(n, p)]


def disparity(ds: Dataset, tail) -> float:
    """Mean loss over ``tail`` minus mean loss over all rows."""
    if ds.loss is None:
        raise DataError("a loss column is required to compute disparity")
    tail = np.asarray(tail, dtype=int)
    if tail.size == 0:
        raise DataError("tail is empty")
    return float(ds.loss[tail].mean() - ds.loss.mean())


def _too_close(f, g, min_sep_cos: float) -> bool:
    c = float(f @ g)
    return c > min_sep_cos or c >= 1.0 - 1e-12


def _rank(scored) -> list:
    """Order by descending |skew|; values within ``SKEW_TIE_TOL`` (relative) keep generation order.

    Exact ties such as 3/sqrt(2) for three points come out of different
    evaluators with rounding noise, and must not reorder the candidates.
    """
    items = sorted(enumerate(scored), key=lambda t: (-abs(t[1][1]), t[0]))
    out, i = [], 0
    while i < len(items):
        top = abs(items[i][1][1])
        j = i + 1
        while j < len(items) and abs(items[j][1][1]) >= top - SKEW_TIE_TOL * max(1.0, top):
            j += 1
        out.extend(item for _, item in sorted(items[i:j], key=lambda t: t[0]))
        i = j
    return out


def select_candidates(
    ds: Dataset,
    scored: Iterable,
    p: float,
    tau: Optional[float],
    l: int,
    min_sep_cos: float,
    heuristic: str,
    gate=None,
) -> list:
    """Pop ``(direction, signed_skew, tail_side_direction)`` triples by |skew|.

    ``direction`` is oriented so its skew is positive.  The tail is computed
    on ``tail_side_direction`` (the direction the skew was evaluated on).
    ``gate(ds, tail)`` returns the disparity compared against ``tau``;
    by default the whole tail is used.
    """
    if l <= 0:
        return []
    if tau is not None and ds.loss is None:
        raise DataError("a loss column is required when tau is set")
    gate = gate or disparity
    out = []
    for f, s, f_eval in _rank(scored):
        if any(_too_close(f, g.direction, min_sep_cos) for g in out):
            continue
        tail = p_tail(ds, f_eval, p, skew=s)
        disp = gate(ds, tail) if ds.loss is not None else None
        if tau is not None and disp < tau:
            continue
        out.append(MiningCandidate(f, abs(s), tail, disp, True, heuristic))
        if len(out) >= l:
            break
    return out


def _boundary_angles(regions) -> list:
    angles = [r.theta_lo for r in regions]
    angles.append(regions[-1].theta_hi)
    return angles


def _unrotate(g: np.ndarray) -> np.ndarray:
    # direction g on (y, A - x) data is (-g1, g0) on the original data
    return np.array([-g[1], g[0]])


def _reflect(ds: Dataset) -> Dataset:
    # (c - x).g = const - x.g, so direction g here is direction -g on ds
    X = ds.features
    return ds.with_features(np.ceil(X.max(axis=0)) + 1.0 - X)


def _passes(ds: Dataset, passes: int):
    yield ds, lambda g: g
    if passes == 2:
        yield rotate_negative(ds), _unrotate
        if ds.n % 2 == 0:
            flipped = _reflect(ds)
            yield flipped, lambda g: -g
            yield rotate_negative(flipped), lambda g: -_unrotate(g)


def warmup_directions(ds: Dataset, passes: int = 2) -> list:
    """Skew at every median-region boundary (axes included), evaluated naively."""
    scored = []
    for data, back in _passes(ds, passes):
        agg = precompute_aggregates(data)
        regions = enumerate_median_regions(data)
        for theta in _boundary_angles(regions):
            g = direction_at(theta)
            try:
                g, s = orient_positive(agg, data, g, skew_naive(data, g))
            except DegenerateProjectionError:
                continue
            g = back(g)
            scored.append((g, s, g))
    return scored


def raysweep_directions(ds: Dataset, passes: int = 2, interior: bool = True) -> list:
    """One counter-clockwise pass per quadrant using O(d^2) skew updates.

    ``interior=False`` evaluates region boundaries only, which makes the
    candidate set identical to :func:`warmup_directions`.
    """
    scored = []
    for data, back in _passes(ds, passes):
        X = data.features
        agg = precompute_aggregates(data)
        regions = enumerate_median_regions(data)
        if interior:
            for region in regions:
                try:
                    f, s = region_max_skew(agg, region, X)
                except DegenerateProjectionError:
                    continue
                g = back(f)
                scored.append((g, s, g))
            continue
        medians = [r.median_index for r in regions]
        angles = _boundary_angles(regions)
        for idx, theta in enumerate(angles):
            g = direction_at(theta)
            row = X[medians[min(idx, len(medians) - 1)]]
            try:
                g, s = orient_positive(agg, data, g, skew_fast(agg, g, row))
            except DegenerateProjectionError:
                continue
            g = back(g)
            scored.append((g, s, g))
    return scored


def _check(ds: Dataset) -> None:
    if ds.d != 2:
        raise DataError("the 2-D miners need exactly two features; use select_features")


def mine_warmup(ds: Dataset, params: MiningParams) -> list:
    _check(ds)
    if params.l == 0:
        return []
    scored = warmup_directions(ds, params.passes)
    return select_candidates(ds, scored, params.p, params.tau, params.l, params.min_sep_cos, "warmup")


def mine_raysweep(ds: Dataset, params: MiningParams, interior: bool = True) -> list:
    _check(ds)
    if params.l == 0:
        return []
    scored = raysweep_directions(ds, params.passes, interior)
    return select_candidates(ds, scored, params.p, params.tau, params.l, params.min_sep_cos, "raysweep")
