"""Euclidean primitives: points, distances, diameters, convex data.

Points are plain float64 numpy arrays. Every public operation validates
finiteness and dimension agreement. Threshold comparisons never hard-code
tolerances; they take a GeomContext.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousPredicate, DimensionMismatch

__all__ = [
    "GeomContext",
    "DEFAULT_CTX",
    "as_point",
    "as_points",
    "distance",
    "diameter",
    "convex_combination",
    "HalfSpace",
    "half_space_contains",
    "Ball",
    "ball_contains",
    "threshold_compare",
]


@dataclass(frozen=True)
class GeomContext:
    """Tolerance context for geometric predicates.

    eps_geo: relative half-width of the ambiguity band around predicate
        thresholds.
    eps_med: relative guard (of reach) for nearest-point uniqueness.
    """

    eps_geo: float = 1e-9
    eps_med: float = 1e-6


DEFAULT_CTX = GeomContext()


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally checking dimension."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DimensionMismatch(f"point must be 1-D and nonempty, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DimensionMismatch("point has non-finite coordinates")
    if dim is not None and p.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.size}")
    return p


def as_points(xs, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite (k, n) float64 array of row points."""
    a = np.asarray(xs, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[1] == 0 or a.shape[0] == 0:
        raise DimensionMismatch(f"expected (k, n) points, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("points have non-finite coordinates")
    if dim is not None and a.shape[1] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {a.shape[1]}")
    return a


def distance(a, b) -> float:
    """Euclidean distance between two points of equal dimension."""
    pa = as_point(a)
    pb = as_point(b, dim=pa.size)
    return float(np.linalg.norm(pa - pb))


def diameter(points) -> float:
    """Max pairwise distance of a point set; 0.0 for a singleton."""
    pts = as_points(points)
    if pts.shape[0] == 1:
        return 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff * diff).sum(axis=2).max()))


# slack on weight validation; weights come from user arithmetic
_WEIGHT_ATOL = 1e-12


def convex_combination(points, weights) -> np.ndarray:
    """Weighted average of row points; weights must be a convex combination."""
    pts = as_points(points)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != pts.shape[0]:
        raise DimensionMismatch(
            f"{pts.shape[0]} points but {w.size} weights"
        )
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < -_WEIGHT_ATOL):
        raise ValueError(f"negative weight {w.min()}")
    s = float(w.sum())
    if abs(s - 1.0) > 1e-10:
        raise ValueError(f"weights sum to {s}, expected 1")
    return w @ pts


@dataclass(frozen=True)
class HalfSpace:
    """Open half-space {z : <z - anchor, normal> > 0}."""

    anchor: tuple
    normal: tuple

    def __post_init__(self):
        a = as_point(self.anchor)
        n = as_point(self.normal, dim=a.size)
        if float(np.linalg.norm(n)) == 0.0:
            raise ValueError("half-space normal must be nonzero")
        object.__setattr__(self, "anchor", tuple(a))
        object.__setattr__(self, "normal", tuple(n))


def half_space_contains(h: HalfSpace, z) -> bool:
    """Strict membership in the open half-space."""
    a = np.asarray(h.anchor)
    n = np.asarray(h.normal)
    p = as_point(z, dim=a.size)
    return float(np.dot(p - a, n)) > 0.0


@dataclass(frozen=True)
class Ball:
    """Ball with center, radius >= 0, and open/closed boundary flag."""

    center: tuple
    radius: float
    open: bool = False

    def __post_init__(self):
        c = as_point(self.center)
        if not np.isfinite(self.radius) or self.radius < 0:
            raise ValueError(f"radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "center", tuple(c))
        object.__setattr__(self, "radius", float(self.radius))


def ball_contains(b: Ball, z) -> bool:
    """Membership in the ball, honoring the boundary flag exactly."""
    c = np.asarray(b.center)
    p = as_point(z, dim=c.size)
    d = float(np.linalg.norm(p - c))
    return d < b.radius if b.open else d <= b.radius


def threshold_compare(value: float, threshold: float, strict: bool,
                      ctx: GeomContext = DEFAULT_CTX) -> bool:
    """Decide ``value <= threshold`` (or ``<`` when strict) with a guard band.

    Exact float equality answers definitively by strictness. Otherwise a
    value within eps_geo * max(1, |threshold|) of the threshold raises
    AmbiguousPredicate: the arithmetic cannot be trusted to pick a side.
    """
    if not np.isfinite(value) or not np.isfinite(threshold):
        raise ValueError("threshold comparison on non-finite values")
    if value == threshold:
        return not strict
    band = ctx.eps_geo * max(1.0, abs(threshold))
    if abs(value - threshold) <= band:
        raise AmbiguousPredicate(
            f"value {value!r} within +/-{band:g} of threshold {threshold!r}"
        )
    return value < threshold
