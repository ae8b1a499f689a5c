"""Point/hyperplane duality.

A tuple ``t`` maps to the dual hyperplane ``{x : t.x = 1}``.  The ray from the
origin through a unit vector ``f`` meets that hyperplane at radius
``1 / (t.f)``, so ranking tuples by projection onto ``f`` is the reverse of
ranking their dual hyperplanes by distance along the ray.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GeometryError

PARALLEL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DualLine:
    coeffs: np.ndarray
    source_index: int = 0


def _features(data) -> np.ndarray:
    return np.asarray(getattr(data, "features", data), dtype=float)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise GeometryError("zero vector has no direction")
    return v / norm


def direction_at(theta: float) -> np.ndarray:
    """Unit vector at angle ``theta`` (radians) from the x-axis."""
    return np.array([np.cos(theta), np.sin(theta)])


def angle_of(f) -> float:
    return float(np.arctan2(f[1], f[0]))


def dualize(t, index: int = 0) -> DualLine:
    return DualLine(np.array(t, dtype=float), index)


def ray_intersection(line: DualLine, f) -> float:
    """Radius ``alpha`` such that ``alpha * f`` lies on the dual line."""
    dot = float(np.dot(line.coeffs, f))
    if dot <= 0:
        raise GeometryError(
            f"no positive intersection: t.f = {dot:.6g} for tuple {line.source_index}"
        )
    return 1.0 / dot


def pairwise_intersection(a: DualLine, b: DualLine) -> Optional[np.ndarray]:
    """Intersection of two dual lines in the plane, or None when parallel."""
    if len(a.coeffs) != 2 or len(b.coeffs) != 2:
        raise GeometryError("pairwise_intersection is defined for d = 2")
    (a1, a2), (b1, b2) = a.coeffs, b.coeffs
    det = a1 * b2 - a2 * b1
    scale = np.linalg.norm(a.coeffs) * np.linalg.norm(b.coeffs)
    if abs(det) <= PARALLEL_TOL * scale:
        return None
    # Cramer's rule on [a; b] x = [1, 1]
    return np.array([(b2 - a2) / det, (a1 - b1) / det])


def dual_point(points) -> np.ndarray:
    """Dual of the hyperplane through ``d`` points: the common point of their duals."""
    P = np.asarray(points, dtype=float)
    return np.linalg.solve(P, np.ones(P.shape[0]))


def projections(data, f) -> np.ndarray:
    return _features(data) @ np.asarray(f, dtype=float)


def projection_order(data, f) -> np.ndarray:
    """Row ids in ascending order of ``t.f``; ties by ascending row id."""
    return np.argsort(projections(data, f), kind="stable")


def ray_radii(data, f) -> np.ndarray:
    """Radius at which each tuple's dual hyperplane crosses the ray through ``f``."""
    dots = projections(data, f)
    if np.any(dots <= 0):
        raise GeometryError("some dual hyperplanes do not cross the ray at a positive radius")
    return 1.0 / dots


def radius_order(data, f) -> np.ndarray:
    """Row ids in ascending order of ray-intersection radius; ties by row id."""
    return np.argsort(ray_radii(data, f), kind="stable")
