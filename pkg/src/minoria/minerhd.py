"""Heuristic direction search for d > 2.

* :func:`focused_explore` looks only at directions that point from
  low-loss rows towards high-loss rows (the most effective heuristic).
* :func:`grid_directions` + :func:`diverse_sample`: a polar grid over the
  positive orthant, thinned by greedy farthest-point selection.
* :func:`qp_diversify`: grow a set of directions, each as far as possible
  from the ones before it.
* :func:`ee_search`: epsilon-greedy exploration/exploitation that samples
  around the best direction so far inside a spherical cap.

All of them score directions with the aggregate-based skew, taking the
median by selection (O(n) per direction), and share the candidate selection
of the 2-D miners.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, stats

from .dataset import Dataset
from .errors import DataError, OptimizerError
from .miner2d import DEFAULT_MIN_SEP_COS, disparity, select_candidates
from .skew import SIGMA_REL_TOL, SkewAggregates, precompute_aggregates

GRID_CAP = 10**6


@dataclass(frozen=True)
class FocusedParams:
    error_fraction: float = 0.1
    tail_error_fraction: float = 1.0
    error_samples: int = 50
    other_samples: int = 50
    p: float = 0.1
    tau: Optional[float] = 0.0
    l: int = 5
    min_sep_cos: float = DEFAULT_MIN_SEP_COS
    seed: int = 0
    gate: str = "tail_error"  # or "tail"

    def __post_init__(self):
        if not 0 < self.error_fraction < 1:
            raise ValueError("error_fraction must lie in (0, 1)")
        if not 0 < self.tail_error_fraction <= 1:
            raise ValueError("tail_error_fraction must lie in (0, 1]")
        if self.error_samples < 1 or self.other_samples < 1:
            raise ValueError("sample sizes must be >= 1")
        if self.gate not in ("tail_error", "tail"):
            raise ValueError("gate must be 'tail_error' or 'tail'")


@dataclass(frozen=True)
class EEParams:
    explore_prob: float = 0.4
    cone_cos: float = 0.9
    iterations: int = 1000
    starts: int = 6
    seed: int = 0
    p: float = 0.1
    tau: Optional[float] = None
    l: int = 3
    min_sep_cos: float = DEFAULT_MIN_SEP_COS
    full_sphere: bool = False

    def __post_init__(self):
        if not 0 <= self.explore_prob <= 1:
            raise ValueError("explore_prob must lie in [0, 1]")
        if not 0 < self.cone_cos <= 1:
            raise ValueError("cone_cos must lie in (0, 1]")
        if self.iterations < 0 or self.starts < 1:
            raise ValueError("iterations must be >= 0 and starts >= 1")


@dataclass(frozen=True)
class GridParams:
    angle_step: float = math.pi / 8
    l: int = 20
    seed: int = 0
    cap: int = GRID_CAP

    def __post_init__(self):
        if not 0 < self.angle_step <= math.pi / 2:
            raise ValueError("angle_step must lie in (0, pi/2]")


# -- scoring -----------------------------------------------------------------

def skew_by_selection(X: np.ndarray, agg: SkewAggregates, F: np.ndarray) -> np.ndarray:
    """Skew of every row of ``F``; NaN where the projection is degenerate."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    P = X @ F.T
    k = (X.shape[0] + 1) // 2 - 1
    nu = np.partition(P, k, axis=0)[k]
    mu = F @ agg.mean_vec
    var = np.einsum("ij,jk,ik->i", F, agg.cov_gram, F) / agg.n
    sigma = np.sqrt(np.maximum(var, 0.0))
    out = np.full(len(F), np.nan)
    ok = sigma > SIGMA_REL_TOL * agg.spread * np.linalg.norm(F, axis=1)
    out[ok] = 3.0 * (mu[ok] - nu[ok]) / sigma[ok]
    return out


def _skew_one(X, agg, f) -> float:
    return float(skew_by_selection(X, agg, f[None, :])[0])


def _scored(X, agg: SkewAggregates, F, skews) -> list:
    """``(direction, skew, direction)`` triples oriented so the skew is non-negative.

    For even n, -f has its own median tuple, so flipped directions are re-scored.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    skews = np.asarray(skews, dtype=float).copy()
    keep = ~np.isnan(skews)
    neg = keep & (skews < 0)
    F = np.where(neg[:, None], -F, F)
    if agg.n % 2:
        skews[neg] = -skews[neg]
    elif neg.any():
        skews[neg] = skew_by_selection(X, agg, F[neg])
    return [(f, float(sk), f) for f, sk, k in zip(F, skews, keep) if k]


def _tail_error_gate(tail_error_fraction: float):
    def gate(ds: Dataset, tail):
        tail = np.asarray(tail)
        order = np.lexsort((tail, -ds.loss[tail]))
        keep = tail[order[: max(1, math.ceil(tail_error_fraction * len(tail)))]]
        return disparity(ds, keep)
    return gate


# -- focused exploration --------------------------------------------------------

def focused_directions(ds: Dataset, params: FocusedParams) -> np.ndarray:
    """Unit vectors s - t for sampled s in the error region and t outside it."""
    if ds.loss is None:
        raise DataError("focused exploration needs a loss column")
    n = ds.n
    order = np.lexsort((np.arange(n), -ds.loss))
    size = int(math.floor(params.error_fraction * n))
    if size < 1:
        raise DataError("error region is empty; increase error_fraction")
    S, rest = order[:size], order[size:]
    if rest.size == 0:
        raise DataError("no rows outside the error region")
    rng = np.random.default_rng(params.seed)
    s_idx = rng.choice(S, size=min(params.error_samples, S.size), replace=False)
    t_idx = rng.choice(rest, size=min(params.other_samples, rest.size), replace=False)
    X = ds.features
    V = (X[s_idx][:, None, :] - X[t_idx][None, :, :]).reshape(-1, ds.d)
    norms = np.linalg.norm(V, axis=1)
    keep = norms > 0
    return V[keep] / norms[keep, None]


def focused_explore(ds: Dataset, params: FocusedParams) -> list:
    F = focused_directions(ds, params)
    agg = precompute_aggregates(ds)
    scored = _scored(ds.features, agg, F, skew_by_selection(ds.features, agg, F))
    gate = _tail_error_gate(params.tail_error_fraction) if params.gate == "tail_error" else disparity
    return select_candidates(ds, scored, params.p, params.tau, params.l, params.min_sep_cos, "focused", gate)


# -- grid partitioning --------------------------------------------------------

def _from_angles(phi: np.ndarray) -> np.ndarray:
    """Hyperspherical angles (m, d-1) -> unit vectors (m, d)."""
    m, k = phi.shape
    out = np.ones((m, k + 1))
    sin_prod = np.ones(m)
    for i in range(k):
        out[:, i] = sin_prod * np.cos(phi[:, i])
        sin_prod = sin_prod * np.sin(phi[:, i])
    out[:, k] = sin_prod
    return out


def grid_directions(d: int, params: GridParams) -> np.ndarray:
    """Cell centres of a polar grid with ``angle_step`` spacing on each of the d-1 angles.

    Centres sit at (i + 1/2) angle_step; the last cell of an angle is clipped
    to pi/2 when angle_step does not divide pi/2.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    per_angle = math.ceil(math.pi / 2 / params.angle_step - 1e-12)
    total = per_angle ** (d - 1)
    if total > params.cap:
        raise ValueError(
            f"grid would have {total} cells (cap {params.cap}); "
            "use a larger angle_step or the exploration heuristics"
        )
    centres = np.minimum((np.arange(per_angle) + 0.5) * params.angle_step, math.pi / 2)
    mesh = np.meshgrid(*([centres] * (d - 1)), indexing="ij")
    phi = np.column_stack([m.ravel() for m in mesh])
    return _from_angles(phi)


def diverse_sample(directions, l: int, seed: int = 0, start: Optional[int] = None) -> np.ndarray:
    """Greedy farthest-point selection by angle, from a seeded random start."""
    D = np.asarray(directions, dtype=float)
    if l > len(D):
        raise ValueError(f"cannot pick {l} directions out of {len(D)}")
    if l <= 0:
        return D[:0]
    if start is None:
        start = int(np.random.default_rng(seed).integers(len(D)))
    chosen = [start]
    min_angle = np.arccos(np.clip(D @ D[start], -1.0, 1.0))
    min_angle[start] = -1.0
    for _ in range(l - 1):
        nxt = int(np.argmax(min_angle))
        chosen.append(nxt)
        min_angle = np.minimum(min_angle, np.arccos(np.clip(D @ D[nxt], -1.0, 1.0)))
        min_angle[chosen] = -1.0
    return D[chosen]


def grid_search(ds: Dataset, grid: GridParams, p=0.1, tau=0.0, l=3, min_sep_cos=DEFAULT_MIN_SEP_COS) -> list:
    G = grid_directions(ds.d, grid)
    F = diverse_sample(G, min(grid.l, len(G)), grid.seed)
    agg = precompute_aggregates(ds)
    scored = _scored(ds.features, agg, F, skew_by_selection(ds.features, agg, F))
    return select_candidates(ds, scored, p, tau, l, min_sep_cos, "grid")


# -- QP diversification -----------------------------------------------------------

def _farthest_unit_vector(P: np.ndarray, rng, restarts: int = 8) -> tuple:
    """Solve min y s.t. P x <= y, |x| = 1, x >= 0 from several random starts."""
    d = P.shape[1]
    cons = [
        {"type": "ineq", "fun": lambda z: z[d] - P @ z[:d], "jac": lambda z: np.hstack([-P, np.ones((len(P), 1))])},
        {"type": "eq", "fun": lambda z: z[:d] @ z[:d] - 1.0, "jac": lambda z: np.append(2 * z[:d], 0.0)},
    ]
    bounds = [(0.0, None)] * d + [(None, None)]
    best = None
    for _ in range(restarts):
        x0 = np.abs(rng.normal(size=d))
        x0 /= np.linalg.norm(x0)
        z0 = np.append(x0, float(np.max(P @ x0)))
        res = optimize.minimize(
            lambda z: z[d], z0, jac=lambda z: np.append(np.zeros(d), 1.0),
            method="SLSQP", bounds=bounds, constraints=cons,
            options={"maxiter": 500, "ftol": 1e-12},
        )
        x = np.clip(res.x[:d], 0.0, None)
        norm = np.linalg.norm(x)
        if norm == 0 or abs(norm - 1.0) > 1e-6:
            continue
        x /= norm
        y = float(np.max(P @ x))
        if best is None or y < best[1] - 1e-12:
            best = (x, y)
    if best is None:
        raise OptimizerError(f"no restart reached a feasible unit vector (d={d}, |P|={len(P)})")
    return best


def qp_diversify(P, count: int, seed: int = 0, return_objective: bool = False):
    """Append ``count`` unit vectors, each minimizing its largest inner product with the set so far."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.size == 0:
        raise ValueError("P must be non-empty")
    if P.shape[1] < 2:
        raise ValueError("directions must have at least 2 components")
    rng = np.random.default_rng(seed)
    added, ys = [], []
    cur = P
    for _ in range(count):
        x, y = _farthest_unit_vector(cur, rng)
        added.append(x)
        ys.append(y)
        cur = np.vstack([cur, x])
    out = np.array(added).reshape(-1, P.shape[1])
    return (out, np.array(ys)) if return_objective else out


def qp_search(ds: Dataset, count: int, seed=0, p=0.1, tau=0.0, l=3, min_sep_cos=DEFAULT_MIN_SEP_COS) -> list:
    """Score the axes plus ``count`` QP-diversified directions."""
    P0 = np.eye(ds.d)
    F = np.vstack([P0, qp_diversify(P0, count, seed)])
    agg = precompute_aggregates(ds)
    scored = _scored(ds.features, agg, F, skew_by_selection(ds.features, agg, F))
    return select_candidates(ds, scored, p, tau, l, min_sep_cos, "qp")


# -- exploration / exploitation -------------------------------------------------

def cone_sample(center, cone_cos: float, rng) -> np.ndarray:
    """Uniform unit vector on the spherical cap {f : cos(f, center) >= cone_cos}."""
    if not 0 < cone_cos <= 1:
        raise ValueError("cone_cos must lie in (0, 1]")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    given = np.asarray(center, dtype=float)
    norm = np.linalg.norm(given)
    c = given if abs(norm - 1.0) <= 1e-12 else given / norm
    if cone_cos == 1:
        return c.copy()
    d = len(c)
    # on S^{d-1}, (1 - cos)/2 follows Beta((d-1)/2, (d-1)/2); invert its CDF truncated to the cap
    a = (d - 1) / 2
    u_max = (1 - cone_cos) / 2
    u = stats.beta.ppf(rng.uniform() * stats.beta.cdf(u_max, a, a), a, a)
    w = 1 - 2 * u
    v = rng.normal(size=d)
    v -= (v @ c) * c
    v /= np.linalg.norm(v)
    return w * c + math.sqrt(max(0.0, 1 - w * w)) * v


def _random_direction(d: int, rng, full_sphere: bool) -> np.ndarray:
    v = rng.normal(size=d)
    if not full_sphere:
        v = np.abs(v)
    return v / np.linalg.norm(v)


def ee_search(ds: Dataset, params: EEParams, return_history: bool = False):
    """Epsilon-greedy search; the best |skew| seen is monotone over iterations."""
    rng = np.random.default_rng(params.seed)
    X = ds.features
    agg = precompute_aggregates(ds)
    keep = max(10 * params.l, 1)
    top: list = []  # min-heap of (|skew|, counter, f, skew)
    counter = 0
    best = None
    history = []

    def visit(f):
        nonlocal counter, best
        s = _skew_one(X, agg, f)
        if np.isnan(s):
            return
        counter += 1
        item = (abs(s), counter, f, s)
        if len(top) < keep:
            heapq.heappush(top, item)
        elif item[0] > top[0][0]:
            heapq.heapreplace(top, item)
        if best is None or abs(s) > abs(best[1]):
            best = (f, s)

    for _ in range(params.starts):
        visit(_random_direction(ds.d, rng, params.full_sphere))
    history.append(abs(best[1]) if best else float("nan"))
    for _ in range(params.iterations):
        if best is None or rng.uniform() < params.explore_prob:
            f = _random_direction(ds.d, rng, params.full_sphere)
        else:
            f = cone_sample(best[0], params.cone_cos, rng)
        visit(f)
        history.append(abs(best[1]) if best else float("nan"))

    ranked = sorted(top, key=lambda t: (-t[0], t[1]))
    scored = _scored(X, agg, [t[2] for t in ranked], [t[3] for t in ranked])
    out = select_candidates(ds, scored, params.p, params.tau, params.l, params.min_sep_cos, "ee")
    return (out, history) if return_history else out
