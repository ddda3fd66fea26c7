"""Retraction and homotopy maps on metric thickenings, plus randomized
verifiers for the geometric facts they rest on.

Each checker runs seeded trials: it samples a valid input (simplex, tube
point, or pair), evaluates the claimed inequality, and reports the count of
violations beyond tolerance together with the worst margin seen. Trials
derive independent RNG streams from (seed, trial_index), so results are
identical for any worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial import cKDTree

from .complexes import (
    ComplexSpec,
    Simplex,
    is_cech_simplex_ambient,
    is_cech_simplex_intrinsic,
    is_vr_simplex,
    min_enclosing_ball,
)
from .errors import AmbiguousPredicate, MedialAxisProximity
from .euclid import DEFAULT_CTX, GeomContext
from .shapes import (
    FinitePointSet,
    ZeroSphere,
    ambient_dim,
    distance_to_shape,
    project,
    reach,
    sample_rng,
    shape_label,
)
from .thickening import ThickeningPoint, inclusion_iota, linear_projection_f, make_thickening_point
from .transport import Measure

LEMMA_IDS = (
    "Convex",
    "VrTub",
    "VrSimplex",
    "CechRadius",
    "CechTub",
    "CechSimplexAmbient",
    "CechSimplexIntrinsic",
    "EmptyBall",
    "FedererLipschitz",
)

CSV_COLUMNS = ("lemma_id", "shape", "r", "k", "trials", "violations",
               "ambiguous", "worst_margin", "seed")

_ATOM_MERGE_TOL = 1e-12  # matches the Simplex distinctness tolerance


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of one randomized verification cell."""

    lemma_id: str
    shape: str
    r: float
    k: int
    trials: int
    violations: int
    ambiguous: int
    worst_margin: float
    seed: int
    starved: int = 0
    wall_time_ms: float | None = None

    def __post_init__(self):
        if self.lemma_id not in LEMMA_IDS:
            raise ValueError(f"unknown lemma_id {self.lemma_id!r}")

    def csv_row(self, include_timing: bool = False) -> str:
        cells = [self.lemma_id, self.shape, format(self.r, ".12g"), str(self.k),
                 str(self.trials), str(self.violations), str(self.ambiguous),
                 format(self.worst_margin, ".12g"), str(self.seed)]
        if include_timing:
            cells.append("" if self.wall_time_ms is None else format(self.wall_time_ms, ".3f"))
        return ",".join(cells)


def csv_header(include_timing: bool = False) -> str:
    cols = list(CSV_COLUMNS)
    if include_timing:
        cols.append("wall_time_ms")
    return ",".join(cols)


# ---------------------------------------------------------------------------
# maps


def retract(tp: ThickeningPoint, ctx: GeomContext = DEFAULT_CTX) -> np.ndarray:
    """Nearest-point projection of the barycenter: the on-shape point that the
    straight-line homotopy contracts toward.

    Guaranteed defined when the scale stays below the reach (twice the reach
    for the min-ball flavors); beyond that the projection may hit a nearest-
    point tie and MedialAxisProximity propagates to the caller."""
    spec = tp.spec
    if spec.shape is None:
        raise ValueError("retract needs a spec with a shape")
    return project(spec.shape, linear_projection_f(tp), ctx)


def homotopy_H(tp: ThickeningPoint, t: float, witnesses=(),
               ctx: GeomContext = DEFAULT_CTX) -> ThickeningPoint:
    """Straight-line homotopy between the identity (t=1) and the retraction
    composed with inclusion (t=0): reweight the atoms by t and put mass 1-t on
    the retraction point. The result is validated; a failing validation is a
    genuine counterexample and propagates as SimplexViolation."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    p = retract(tp, ctx)
    atoms = [np.asarray(a, dtype=float) for a in tp.measure.support]
    weights = [t * w for w in tp.measure.weights]
    merged = False
    for i, a in enumerate(atoms):
        if np.all(np.abs(a - p) <= _ATOM_MERGE_TOL):
            weights[i] += 1.0 - t
            merged = True
            break
    if not merged:
        atoms.append(p)
        weights.append(1.0 - t)
    measure = Measure(tuple(tuple(map(float, a)) for a in atoms), tuple(weights))
    wits = tuple(witnesses) + (tuple(map(float, p)),)
    return make_thickening_point(measure, tp.spec, witnesses=wits, ctx=ctx)


# ---------------------------------------------------------------------------
# sampling helpers

_MAX_ATTEMPTS = 64
_PATCH_BUDGET = 24


def _finite_points(shape):
    if isinstance(shape, ZeroSphere):
        return np.array([[-1.0], [1.0]])
    if isinstance(shape, FinitePointSet):
        return shape.array()
    return None


def _patch_points(shape, center, radius, count, rng, exclude_center=False):
    """`count` on-shape points within Euclidean `radius` of `center`, or None
    if the sampling budget runs out (continuous) / too few exist (finite)."""
    fin = _finite_points(shape)
    if fin is not None:
        keep = np.linalg.norm(fin - center, axis=1) <= radius
        if exclude_center:
            keep &= ~np.all(np.abs(fin - center) <= _ATOM_MERGE_TOL, axis=1)
        sel = fin[keep]
        if sel.shape[0] < count:
            return None
        idx = rng.choice(sel.shape[0], size=count, replace=False)
        return sel[idx]
    out = []
    need = count
    batch = 128
    for _ in range(_PATCH_BUDGET):
        cand = sample_rng(shape, batch, rng)
        keep = cand[np.linalg.norm(cand - center, axis=1) <= radius]
        if keep.shape[0]:
            out.append(keep[:need])
            need -= min(keep.shape[0], need)
        if need <= 0:
            return np.concatenate(out)
        batch = min(4096, batch * 2)
    return None


def _distinct_rows(pts: np.ndarray) -> bool:
    n = pts.shape[0]
    if n < 2:
        return True
    close = np.all(np.abs(pts[:, None, :] - pts[None, :, :]) <= _ATOM_MERGE_TOL, axis=2)
    return not np.any(close & ~np.eye(n, dtype=bool))


def _sample_valid_simplex(shape, natoms, accept, radius_full, radius_safe, rng):
    """Support tuple of `natoms` distinct on-shape points passing `accept`.

    Odd attempts draw companions from the tight patch (valid by the triangle
    inequality), even attempts from the full patch so every valid simplex
    containing the anchor stays reachable. Returns (points, 'ok'|'ambiguous'|
    'starved')."""
    for attempt in range(_MAX_ATTEMPTS):
        x0 = sample_rng(shape, 1, rng)[0]
        if natoms == 1:
            pts = x0[None, :]
        else:
            radius = radius_full if attempt % 2 == 0 else radius_safe
            rest = _patch_points(shape, x0, radius, natoms - 1, rng, exclude_center=True)
            if rest is None:
                continue
            pts = np.vstack([x0[None, :], rest])
            if not _distinct_rows(pts):
                continue
        try:
            if accept(pts):
                return pts, "ok"
        except AmbiguousPredicate:
            return None, "ambiguous"
    return None, "starved"


def _sample_witnessed_simplex(shape, natoms, accept, radius, rng):
    """Support tuple drawn inside the radius-`radius` patch of a fresh on-shape
    witness; valid for the intrinsic predicate by construction. Returns
    (points, witness, status)."""
    for _ in range(_MAX_ATTEMPTS):
        y = sample_rng(shape, 1, rng)[0]
        pts = _patch_points(shape, y, radius, natoms, rng)
        if pts is None or not _distinct_rows(pts):
            continue
        try:
            if accept(pts, y):
                return pts, y, "ok"
        except AmbiguousPredicate:
            return None, None, "ambiguous"
    return None, None, "starved"


def _max_feasible_atoms(shape, accept, cap: int) -> int:
    """Largest support size (up to cap) for which some valid simplex exists.
    Exact subset search on finite shapes; continuous shapes always admit
    arbitrarily small patches, so the cap itself is returned."""
    fin = _finite_points(shape)
    if fin is None:
        return cap
    n = fin.shape[0]
    for size in range(min(cap, n), 1, -1):
        for comb in combinations(range(n), size):
            try:
                if accept(fin[list(comb)]):
                    return size
            except AmbiguousPredicate:
                continue
    return 1


def _dirichlet_weights(n: int, rng) -> np.ndarray:
    w = rng.exponential(size=n)
    return w / w.sum()


# ---------------------------------------------------------------------------
# cell runner


def _worker_count() -> int:
    raw = os.environ.get("THICKEN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_cell(lemma_id, shape, r, k, trials, seed, trial_fn) -> LemmaReport:
    """Run `trial_fn(rng) -> (status, margin, tol)` for each trial index and
    aggregate order-independently (sums and max), so any worker count yields
    the same report."""
    if trials < 0:
        raise ValueError("trials must be >= 0")

    def run_chunk(lo: int, hi: int):
        ok = amb = starved = viol = 0
        worst = -math.inf
        for t in range(lo, hi):
            rng = np.random.default_rng((seed, t))
            status, margin, tol = trial_fn(rng)
            if status == "ok":
                ok += 1
                if margin > tol:
                    viol += 1
                if margin > worst:
                    worst = margin
            elif status == "ambiguous":
                amb += 1
            else:
                starved += 1
        return ok, amb, starved, viol, worst

    workers = _worker_count()
    if workers == 1 or trials < 64:
        parts = [run_chunk(0, trials)]
    else:
        step = max(1, math.ceil(trials / (4 * workers)))
        spans = [(lo, min(trials, lo + step)) for lo in range(0, trials, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda s: run_chunk(*s), spans))
    ok = sum(p[0] for p in parts)
    amb = sum(p[1] for p in parts)
    starved = sum(p[2] for p in parts)
    viol = sum(p[3] for p in parts)
    worst = max((p[4] for p in parts), default=-math.inf)
    return LemmaReport(
        lemma_id=lemma_id, shape=shape_label(shape), r=float(r), k=int(k),
        trials=ok + amb, violations=viol, ambiguous=amb,
        worst_margin=worst if ok else math.nan, seed=int(seed), starved=starved)


def _tol_for(bound: float, ctx: GeomContext) -> float:
    return max(ctx.eps_geo, 1e-9 * abs(bound))


def _require_scale_below_reach(shape, r: float) -> float:
    tau = reach(shape)
    if not r < tau * (1.0 - 1e-3):
        raise ValueError(f"need r < reach*(1-1e-3) = {tau * (1 - 1e-3):g}, got {r:g}")
    return tau


# ---------------------------------------------------------------------------
# lemma checkers


def check_convex_lemma(shape, r, k, trials, seed, strict=False,
                       ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """A convex set missing a hull point must miss a generator: for random
    on-shape generators, a random hull point y, and a random convex set
    (half-space or ball) excluding y, some generator lies outside the set."""
    if k < 0:
        raise ValueError("k must be >= 0")

    def trial(rng):
        natoms = 1 + int(rng.integers(0, k + 1))
        pts = sample_rng(shape, natoms, rng)
        lam = _dirichlet_weights(natoms, rng)
        y = lam @ pts
        gap = (0.01 + 0.99 * rng.random()) * (1.0 + float(np.linalg.norm(y)))
        normal = rng.normal(size=pts.shape[1])
        normal /= np.linalg.norm(normal)
        if rng.random() < 0.5:
            # half-space {z : <n, z> <= c} with y strictly outside by `gap`
            c = float(normal @ y) - gap
            margin = c - float(np.max(pts @ normal))
            bound = c
        else:
            # ball B(q, rho) with d(q, y) = rho + gap
            rho = (0.1 + 1.9 * rng.random()) * (1.0 + r)
            q = y + (rho + gap) * normal
            margin = rho - float(np.max(np.linalg.norm(pts - q, axis=1)))
            bound = rho
        return "ok", margin, _tol_for(bound, ctx)

    return _run_cell("Convex", shape, r, k, trials, seed, trial)


def _vr_accept(spec: ComplexSpec, ctx: GeomContext):
    """Diameter predicate with exact bound shortcuts: only diameters within
    twice the ambiguity band of the scale go through threshold_compare."""
    band = ctx.eps_geo * max(1.0, abs(spec.scale))

    def accept(pts):
        if pts.shape[0] == 1:
            diam = 0.0
        else:
            diff = pts[:, None, :] - pts[None, :, :]
            diam = float(np.sqrt((diff * diff).sum(axis=2).max()))
        if diam <= spec.scale - 2.0 * band:
            return True
        if diam >= spec.scale + 2.0 * band:
            return False
        return is_vr_simplex(Simplex(tuple(map(tuple, pts))), spec, ctx)
    return accept


def _cech_accept(spec: ComplexSpec, ctx: GeomContext):
    """Min-ball predicate with rigorous radius bounds (half the diameter from
    below, max distance to the centroid or to any vertex from above); the
    exact ball is computed only when the bounds straddle the threshold."""
    half = spec.scale / 2.0
    band = ctx.eps_geo * max(1.0, abs(half))

    def accept(pts):
        if pts.shape[0] == 1:
            lb = ub = 0.0
        else:
            diff = pts[:, None, :] - pts[None, :, :]
            d2 = (diff * diff).sum(axis=2)
            lb = 0.5 * float(np.sqrt(d2.max()))
            centroid_ub = float(np.linalg.norm(pts - pts.mean(axis=0), axis=1).max())
            vertex_ub = float(np.sqrt(d2.max(axis=1).min()))
            ub = min(centroid_ub, vertex_ub)
        if ub <= half - 2.0 * band:
            return True
        if lb >= half + 2.0 * band:
            return False
        return is_cech_simplex_ambient(Simplex(tuple(map(tuple, pts))), spec, ctx)
    return accept


def check_vr_tub_lemma(shape, r, k, trials, seed, strict=False,
                       ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """Barycenters of diameter-r supports stay within r of the shape."""
    if r <= 0:
        raise ValueError("r must be positive")
    spec = ComplexSpec("vr", r, strict=strict, shape=shape)
    accept = _vr_accept(spec, ctx)
    cap = _max_feasible_atoms(shape, accept, k + 1)

    def trial(rng):
        natoms = 1 + int(rng.integers(0, cap))
        pts, status = _sample_valid_simplex(shape, natoms, accept, r, r / 2, rng)
        if status != "ok":
            return status, 0.0, 0.0
        lam = _dirichlet_weights(natoms, rng)
        margin = distance_to_shape(shape, lam @ pts) - r
        return "ok", margin, _tol_for(r, ctx)

    return _run_cell("VrTub", shape, r, k, trials, seed, trial)


def check_vr_simplex_lemma(shape, r, k, trials, seed, strict=False,
                           ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """Adjoining the retraction point keeps a diameter-r support within
    diameter r: every vertex lies within r of the projected barycenter."""
    _require_scale_below_reach(shape, r)
    spec = ComplexSpec("vr", r, strict=strict, shape=shape)
    accept = _vr_accept(spec, ctx)
    cap = _max_feasible_atoms(shape, accept, k + 1)

    def trial(rng):
        natoms = 1 + int(rng.integers(0, cap))
        pts, status = _sample_valid_simplex(shape, natoms, accept, r, r / 2, rng)
        if status != "ok":
            return status, 0.0, 0.0
        lam = _dirichlet_weights(natoms, rng)
        try:
            p = project(shape, lam @ pts, ctx)
        except MedialAxisProximity:
            return "ok", math.inf, _tol_for(r, ctx)
        margin = float(np.max(np.linalg.norm(pts - p, axis=1))) - r
        return "ok", margin, _tol_for(r, ctx)

    return _run_cell("VrSimplex", shape, r, k, trials, seed, trial)


def check_cech_radius_lemma(shape, r, k, trials, seed, strict=False,
                            ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """Any hull point of a support with min-ball radius r lies within r of
    some vertex."""
    if r <= 0:
        raise ValueError("r must be positive")
    spec = ComplexSpec("cech-ambient", 2.0 * r, strict=strict, shape=shape)
    accept = _cech_accept(spec, ctx)
    cap = _max_feasible_atoms(shape, accept, k + 1)

    def trial(rng):
        natoms = 1 + int(rng.integers(0, cap))
        pts, status = _sample_valid_simplex(shape, natoms, accept, 2.0 * r, r, rng)
        if status != "ok":
            return status, 0.0, 0.0
        lam = _dirichlet_weights(natoms, rng)
        x = lam @ pts
        margin = float(np.min(np.linalg.norm(pts - x, axis=1))) - r
        return "ok", margin, _tol_for(r, ctx)

    return _run_cell("CechRadius", shape, r, k, trials, seed, trial)


def check_cech_tub_lemma(shape, r, k, trials, seed, strict=False,
                         ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """Barycenters of min-ball-radius-r supports stay within r of the shape."""
    if r <= 0:
        raise ValueError("r must be positive")
    spec = ComplexSpec("cech-ambient", 2.0 * r, strict=strict, shape=shape)
    accept = _cech_accept(spec, ctx)
    cap = _max_feasible_atoms(shape, accept, k + 1)

    def trial(rng):
        natoms = 1 + int(rng.integers(0, cap))
        pts, status = _sample_valid_simplex(shape, natoms, accept, 2.0 * r, r, rng)
        if status != "ok":
            return status, 0.0, 0.0
        lam = _dirichlet_weights(natoms, rng)
        margin = distance_to_shape(shape, lam @ pts) - r
        return "ok", margin, _tol_for(r, ctx)

    return _run_cell("CechTub", shape, r, k, trials, seed, trial)


def _witness_pool(shape, seed: int, trials: int, count: int = 1024) -> np.ndarray:
    """Deterministic on-shape candidate pool; the stream index `trials` never
    collides with a trial index."""
    return sample_rng(shape, count, np.random.default_rng((seed, trials)))


def check_cech_simplex_lemma(shape, r, k, trials, seed, flavor: str = "ambient",
                             strict=False, ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """Adjoining the retraction point to a min-ball-radius-r support keeps it
    one: the augmented support passes the same membership test (non-strict
    form asserted; the margin reports the strict gap)."""
    if flavor not in ("ambient", "intrinsic"):
        raise ValueError(f"flavor must be ambient or intrinsic, got {flavor!r}")
    _require_scale_below_reach(shape, r)
    scale = 2.0 * r
    lemma_id = "CechSimplexAmbient" if flavor == "ambient" else "CechSimplexIntrinsic"

    if flavor == "ambient":
        spec = ComplexSpec("cech-ambient", scale, strict=strict, shape=shape)
        accept = _cech_accept(spec, ctx)
        cap = _max_feasible_atoms(shape, accept, k + 1)

        def trial(rng):
            natoms = 1 + int(rng.integers(0, cap))
            pts, status = _sample_valid_simplex(shape, natoms, accept, scale, r, rng)
            if status != "ok":
                return status, 0.0, 0.0
            lam = _dirichlet_weights(natoms, rng)
            try:
                p = project(shape, lam @ pts, ctx)
            except MedialAxisProximity:
                return "ok", math.inf, _tol_for(r, ctx)
            aug = _augment(pts, p)
            margin = min_enclosing_ball(aug).radius - r
            return "ok", margin, _tol_for(r, ctx)

    else:
        spec = ComplexSpec("cech-intrinsic", scale, strict=strict, shape=shape)
        pool = _witness_pool(shape, seed, trials)
        band = ctx.eps_geo * max(1.0, abs(r))

        def accept(pts, y):
            # y is an on-shape witness; a cover comfortably below r settles
            # the existential without the full candidate sweep
            if float(np.linalg.norm(pts - y, axis=1).max()) <= r - 2.0 * band:
                return True
            s = Simplex(tuple(map(tuple, pts)))
            return is_cech_simplex_intrinsic(s, spec, (tuple(y),), ctx)

        fin = _finite_points(shape)
        if fin is None:
            cap = k + 1
        else:
            def accept_any(pts):
                s = Simplex(tuple(map(tuple, pts)))
                return is_cech_simplex_intrinsic(s, spec, tuple(map(tuple, fin)), ctx)
            cap = _max_feasible_atoms(shape, accept_any, k + 1)

        def trial(rng):
            natoms = 1 + int(rng.integers(0, cap))
            pts, y, status = _sample_witnessed_simplex(shape, natoms, accept, r, rng)
            if status != "ok":
                return status, 0.0, 0.0
            lam = _dirichlet_weights(natoms, rng)
            try:
                p = project(shape, lam @ pts, ctx)
            except MedialAxisProximity:
                return "ok", math.inf, _tol_for(r, ctx)
            aug = _augment(pts, p)
            cands = np.vstack([y[None, :], p[None, :], pool])
            cover = np.max(np.linalg.norm(cands[:, None, :] - aug[None, :, :], axis=2), axis=1)
            margin = float(np.min(cover)) - r
            if margin > -2.0 * band:
                # near or past the threshold: bring in the projected center of
                # the ambient smallest ball before judging
                try:
                    center = project(shape, np.asarray(min_enclosing_ball(aug).center), ctx)
                    extra = float(np.linalg.norm(center - aug, axis=1).max())
                    margin = min(margin, extra - r)
                except MedialAxisProximity:
                    pass
            return "ok", margin, _tol_for(r, ctx)

    return _run_cell(lemma_id, shape, r, k, trials, seed, trial)


def _augment(pts: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Support of [x_0, ..., x_k, p] with an exactly coincident p merged."""
    close = np.all(np.abs(pts - p) <= _ATOM_MERGE_TOL, axis=1)
    if np.any(close):
        return pts
    return np.vstack([pts, p[None, :]])


def check_empty_ball(shape, trials, seed, ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """The open ball of radius reach, tangent at the projection of a tube
    point and centered past it, misses the shape: every point of a dense
    on-shape sample stays at least reach away from the center."""
    tau = reach(shape)
    fin = _finite_points(shape)
    if fin is not None:
        dense = fin
    else:
        dense = sample_rng(shape, 10_000, np.random.default_rng((seed, trials)))
    tree = cKDTree(dense)
    dim = ambient_dim(shape)

    def trial(rng):
        for _ in range(_MAX_ATTEMPTS):
            s = sample_rng(shape, 1, rng)[0]
            u = rng.normal(size=dim)
            u /= np.linalg.norm(u)
            mag = tau * (1e-3 + 0.996 * rng.random())
            x = s + mag * u
            d = distance_to_shape(shape, x)
            if d <= 1e-12 * (1.0 + float(np.linalg.norm(x))):
                continue
            try:
                p = project(shape, x, ctx)
            except MedialAxisProximity:
                continue
            c = p + tau * (x - p) / np.linalg.norm(x - p)
            margin = tau - float(tree.query(c)[0])
            return "ok", margin, 1e-6
        return "starved", 0.0, 0.0

    return _run_cell("EmptyBall", shape, float(tau), 0, trials, seed, trial)


def check_federer(shape, r, trials, seed, ctx: GeomContext = DEFAULT_CTX) -> LemmaReport:
    """Projection is Lipschitz on the radius-r tube with factor
    reach/(reach - r)."""
    tau = _require_scale_below_reach(shape, r)
    factor = tau / (tau - r)
    dim = ambient_dim(shape)

    def trial(rng):
        for _ in range(_MAX_ATTEMPTS):
            base = sample_rng(shape, 2, rng)
            us = rng.normal(size=(2, dim))
            us /= np.linalg.norm(us, axis=1, keepdims=True)
            mags = r * 0.999 * rng.random(size=2)
            x = base[0] + mags[0] * us[0]
            y = base[1] + mags[1] * us[1]
            try:
                px = project(shape, x, ctx)
                py = project(shape, y, ctx)
            except MedialAxisProximity:
                continue
            bound = factor * float(np.linalg.norm(x - y))
            margin = float(np.linalg.norm(px - py)) - bound
            return "ok", margin, _tol_for(bound, ctx)
        return "starved", 0.0, 0.0

    return _run_cell("FedererLipschitz", shape, r, 0, trials, seed, trial)
