"""Simplex membership predicates and skeleton enumeration.

Two families of scale-parameter complexes over a finite point set:

* Vietoris-Rips: a subset is a simplex when its diameter fits the scale.
* Cech: a subset is a simplex when some ball of radius scale/2 covers it,
  centered anywhere in ambient space (ambient flavor) or restricted to a
  reference shape (intrinsic flavor, decided over a finite witness set).

Every predicate answers definitively only outside a relative eps_geo band
around its threshold and raises AmbiguousPredicate inside the band; a value
exactly at the threshold answers by strictness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AmbiguousPredicate, MedialAxisProximity, SizeLimit
from .euclid import DEFAULT_CTX, GeomContext, as_point, as_points, diameter, threshold_compare
from .shapes import project

FLAVORS = ("vr", "cech-ambient", "cech-intrinsic")

_MAX_DIM = 6
_MAX_VR_POINTS = 2000
_MAX_CECH_POINTS = 300
_MAX_BALL_DIM = 10


@dataclass(frozen=True)
class Simplex:
    """Nonempty set of pairwise-distinct vertices, stored in given order."""

    vertices: tuple

    def __post_init__(self):
        pts = as_points([as_point(v) for v in self.vertices])
        if pts.shape[0] == 0:
            raise ValueError("simplex needs at least one vertex")
        for i in range(pts.shape[0]):
            for j in range(i + 1, pts.shape[0]):
                if np.all(np.abs(pts[i] - pts[j]) <= 1e-12):
                    raise ValueError(f"vertices {i} and {j} coincide")
        object.__setattr__(self, "vertices", tuple(tuple(map(float, v)) for v in pts))

    def array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class ComplexSpec:
    """Which complex: flavor in {"vr", "cech-ambient", "cech-intrinsic"},
    scale r > 0, strict (<) versus non-strict (<=) threshold, and the
    reference shape (required for the intrinsic flavor)."""

    flavor: str
    scale: float
    strict: bool = False
    shape: object = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        if self.flavor == "cech-intrinsic" and self.shape is None:
            raise ValueError("cech-intrinsic requires a shape")


@dataclass(frozen=True)
class MinBallResult:
    center: tuple
    radius: float


def _ball_from_support(support: list) -> tuple:
    """Smallest ball with all support points on its boundary.

    center = p0 + sum alpha_i (p_i - p0) where the Gram system
    (V V^T) alpha = |v_i|^2 / 2 places the center equidistant from all
    support points; least squares keeps the center in the affine hull when
    the support is degenerate.
    """
    if not support:
        return None, -1.0
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    V = np.asarray(support[1:]) - p0
    gram = V @ V.T
    rhs = 0.5 * np.einsum("ij,ij->i", V, V)
    try:
        alpha = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        alpha, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    center = p0 + alpha @ V
    return center, float(np.linalg.norm(center - p0))


def _welzl(pts: np.ndarray) -> tuple:
    """Welzl's recursive smallest-enclosing-ball with move-to-front."""
    n = pts.shape[1]
    order = list(range(pts.shape[0]))

    def solve(count: int, support: list) -> tuple:
        if count == 0 or len(support) == n + 1:
            return _ball_from_support(support)
        idx = order[count - 1]
        center, radius = solve(count - 1, support)
        p = pts[idx]
        if center is not None and np.linalg.norm(p - center) <= radius * (1 + 1e-12) + 1e-14:
            return center, radius
        center, radius = solve(count - 1, support + [p])
        # move-to-front: boundary points get examined early next time
        order.remove(idx)
        order.insert(0, idx)
        return center, radius

    return solve(pts.shape[0], [])


def min_enclosing_ball(points: Sequence) -> MinBallResult:
    """Unique smallest ball enclosing the points."""
    pts = as_points([as_point(p) for p in points])
    if pts.shape[0] == 0:
        raise ValueError("min_enclosing_ball needs at least one point")
    if pts.shape[1] > _MAX_BALL_DIM:
        raise SizeLimit(f"min_enclosing_ball supports dimension <= {_MAX_BALL_DIM}")
    if pts.shape[0] == 1:
        return MinBallResult(tuple(map(float, pts[0])), 0.0)
    if pts.shape[0] == 2:
        center = 0.5 * (pts[0] + pts[1])
        return MinBallResult(tuple(map(float, center)), float(np.linalg.norm(pts[0] - center)))
    center, radius = _welzl(pts)
    # sharpen the radius to the farthest point actually enclosed
    radius = float(np.max(np.linalg.norm(pts - center, axis=1)))
    return MinBallResult(tuple(map(float, center)), radius)


def is_vr_simplex(s: Simplex, spec: ComplexSpec, ctx: GeomContext = DEFAULT_CTX) -> bool:
    """Diameter within scale, strictness-aware."""
    if spec.flavor != "vr":
        raise ValueError(f"is_vr_simplex needs flavor 'vr', got {spec.flavor!r}")
    return threshold_compare(diameter(s.array()), spec.scale, spec.strict, ctx)


def is_cech_simplex_ambient(s: Simplex, spec: ComplexSpec, ctx: GeomContext = DEFAULT_CTX) -> bool:
    """Smallest enclosing ball radius within scale/2, strictness-aware."""
    if spec.flavor != "cech-ambient":
        raise ValueError(f"is_cech_simplex_ambient needs flavor 'cech-ambient', got {spec.flavor!r}")
    ball = min_enclosing_ball(s.vertices)
    return threshold_compare(ball.radius, spec.scale / 2.0, spec.strict, ctx)


def is_cech_simplex_intrinsic(s: Simplex, spec: ComplexSpec, witnesses: Sequence,
                              ctx: GeomContext = DEFAULT_CTX) -> bool:
    """Some on-shape candidate center covers all vertices within scale/2.

    Candidates are the provided witnesses plus the shape projection of the
    ambient smallest-ball center when that projection is defined. This is a
    finite under-approximation of the existential over the whole shape; use
    dense witness sets for tight answers.
    """
    if spec.flavor != "cech-intrinsic":
        raise ValueError(f"is_cech_simplex_intrinsic needs flavor 'cech-intrinsic', got {spec.flavor!r}")
    verts = s.array()
    candidates = []
    if len(witnesses) > 0:
        W = as_points([as_point(w) for w in witnesses], dim=verts.shape[1])
        candidates.append(W)
    ball = min_enclosing_ball(s.vertices)
    try:
        candidates.append(project(spec.shape, np.asarray(ball.center))[None, :])
    except MedialAxisProximity:
        pass
    if not candidates:
        return False
    cand = np.vstack(candidates)
    cover = np.linalg.norm(cand[:, None, :] - verts[None, :, :], axis=2).max(axis=1)
    return threshold_compare(float(cover.min()), spec.scale / 2.0, spec.strict, ctx)


def _cliques(adj: np.ndarray, max_size: int) -> list:
    """All cliques of the adjacency matrix with 1..max_size vertices, as
    sorted index tuples in lexicographic order."""
    m = adj.shape[0]
    out = []

    def extend(clique: list, cands: np.ndarray):
        out.append(tuple(clique))
        if len(clique) == max_size:
            return
        for v in cands:
            extend(clique + [int(v)], cands[(cands > v) & adj[v, cands]])

    all_idx = np.arange(m)
    for v in range(m):
        extend([v], all_idx[(all_idx > v) & adj[v]])
    return sorted(out, key=lambda t: (len(t), t))


def enumerate_skeleton(points: Sequence, spec: ComplexSpec, max_dim: int,
                       witnesses: Sequence = (), ctx: GeomContext = DEFAULT_CTX) -> list:
    """All simplices on the given points up to max_dim that satisfy the
    flavor's predicate. Vietoris-Rips is the clique complex of its
    1-skeleton; Cech flavors test each candidate subset, pruned by the
    Rips 1-skeleton at the same scale (every Cech simplex is one of its
    cliques)."""
    idx_simplices = _skeleton_indices(points, spec, max_dim, witnesses, ctx)
    pts = as_points([as_point(p) for p in points])
    return [Simplex(tuple(map(tuple, pts[list(t)]))) for t in idx_simplices]


def _skeleton_indices(points: Sequence, spec: ComplexSpec, max_dim: int,
                      witnesses: Sequence = (), ctx: GeomContext = DEFAULT_CTX) -> list:
    if not (1 <= max_dim <= _MAX_DIM):
        raise SizeLimit(f"max_dim must be in 1..{_MAX_DIM}, got {max_dim}")
    pts = as_points([as_point(p) for p in points])
    m = pts.shape[0]
    limit = _MAX_VR_POINTS if spec.flavor == "vr" else _MAX_CECH_POINTS
    if m > limit:
        raise SizeLimit(f"{spec.flavor} skeleton supports at most {limit} points, got {m}")
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    band = ctx.eps_geo * max(1.0, abs(spec.scale))

    if spec.flavor == "vr":
        off = np.triu(np.ones((m, m), dtype=bool), 1)
        gap = np.abs(dist - spec.scale)
        bad = off & (gap <= band) & (gap > 0)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise AmbiguousPredicate(
                f"edge ({i},{j}) length {dist[i, j]!r} within eps_geo of scale {spec.scale!r}")
        if spec.strict:
            adj = dist < spec.scale
        else:
            adj = dist <= spec.scale
        np.fill_diagonal(adj, False)
        return _cliques(adj, max_dim + 1)

    # Cech: candidate subsets are cliques of a loose Rips prefilter, which
    # never prunes a true simplex; each candidate runs the real predicate
    adj = dist <= spec.scale + 2.0 * band
    np.fill_diagonal(adj, False)
    out = []
    for t in _cliques(adj, max_dim + 1):
        simplex = Simplex(tuple(map(tuple, pts[list(t)])))
        if spec.flavor == "cech-ambient":
            ok = is_cech_simplex_ambient(simplex, spec, ctx)
        else:
            ok = is_cech_simplex_intrinsic(simplex, spec, witnesses, ctx)
        if ok:
            out.append(t)
    return out


def format_skeleton(points: Sequence, spec: ComplexSpec, max_dim: int,
                    witnesses: Sequence = (), ctx: GeomContext = DEFAULT_CTX) -> str:
    """Plain-text skeleton: header `dim <n> scale <r> flavor <f> strict <0|1>`
    then one simplex per line as space-separated vertex indices."""
    pts = as_points([as_point(p) for p in points])
    idx_simplices = _skeleton_indices(points, spec, max_dim, witnesses, ctx)
    lines = [f"dim {pts.shape[1]} scale {format(spec.scale, '.12g')} "
             f"flavor {spec.flavor} strict {1 if spec.strict else 0}"]
    lines.extend(" ".join(str(i) for i in t) for t in idx_simplices)
    return "\n".join(lines) + "\n"
