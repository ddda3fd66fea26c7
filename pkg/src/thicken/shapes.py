"""Parametric positive-reach subsets of R^n.

Each shape kind carries exact closed forms for reach, nearest-point
projection, and distance-to-set, plus a seeded on-shape sampler. A
brute-force grid estimator of reach (medial-axis near-tie scan) serves as
an independent oracle for the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MedialAxisProximity, UnsupportedShape
from .euclid import DEFAULT_CTX, GeomContext, as_point, as_points

__all__ = [
    "Circle",
    "Ellipse",
    "Sphere",
    "Torus",
    "ZeroSphere",
    "FinitePointSet",
    "TubePoint",
    "ambient_dim",
    "reach",
    "project",
    "distance_to_shape",
    "sample",
    "sample_rng",
    "estimate_reach",
    "shape_label",
]


@dataclass(frozen=True)
class Circle:
    """Circle of given radius centered at the origin of R^2."""

    radius: float = 1.0

    def __post_init__(self):
        if not (self.radius > 0):
            raise UnsupportedShape(f"circle radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Ellipse:
    """Ellipse x^2/a^2 + y^2/b^2 = 1 in R^2 with a >= b > 0."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a >= self.b > 0):
            raise UnsupportedShape(f"ellipse needs a >= b > 0, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class Sphere:
    """Sphere of given radius about the origin of R^dim, dim >= 2."""

    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise UnsupportedShape(f"sphere ambient dim must be an int >= 2, got {self.dim}")
        if not (self.radius > 0):
            raise UnsupportedShape(f"sphere radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Torus:
    """Torus of revolution about the z-axis in R^3: tube radius minor around
    a circle of radius major in the z=0 plane. Requires major > minor > 0."""

    major: float
    minor: float

    def __post_init__(self):
        if not (self.major > self.minor > 0):
            raise UnsupportedShape(
                f"torus needs major > minor > 0, got major={self.major}, minor={self.minor}"
            )


@dataclass(frozen=True)
class ZeroSphere:
    """The two-point set {-1, +1} in R^1."""


@dataclass(frozen=True)
class FinitePointSet:
    """A finite set of at least two distinct points in R^n."""

    points: tuple = field(default=())

    def __post_init__(self):
        pts = as_points(self.points)
        if pts.shape[0] < 2:
            raise UnsupportedShape("finite point set needs at least 2 points")
        diff = pts[:, None, :] - pts[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        iu = np.triu_indices(pts.shape[0], k=1)
        if d2[iu].min() <= 0:
            raise UnsupportedShape("finite point set has duplicate points")
        object.__setattr__(self, "points", tuple(tuple(p) for p in pts))

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


Shape = (Circle, Ellipse, Sphere, Torus, ZeroSphere, FinitePointSet)


def ambient_dim(shape) -> int:
    if isinstance(shape, (Circle, Ellipse)):
        return 2
    if isinstance(shape, Sphere):
        return shape.dim
    if isinstance(shape, Torus):
        return 3
    if isinstance(shape, ZeroSphere):
        return 1
    if isinstance(shape, FinitePointSet):
        return len(shape.points[0])
    raise UnsupportedShape(f"unsupported shape {shape!r}")


def reach(shape) -> float:
    """Exact reach by closed form."""
    if isinstance(shape, Circle):
        return shape.radius
    if isinstance(shape, Sphere):
        return shape.radius
    if isinstance(shape, Ellipse):
        return shape.b * shape.b / shape.a
    if isinstance(shape, Torus):
        return min(shape.minor, shape.major - shape.minor)
    if isinstance(shape, ZeroSphere):
        return 1.0
    if isinstance(shape, FinitePointSet):
        pts = shape.array()
        diff = pts[:, None, :] - pts[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        iu = np.triu_indices(pts.shape[0], k=1)
        return 0.5 * float(np.sqrt(d2[iu].min()))
    raise UnsupportedShape(f"unsupported shape {shape!r}")


def shape_label(shape) -> str:
    """Canonical short label used in CSV rows and reports."""
    if isinstance(shape, Circle):
        return f"circle(R={shape.radius:g})"
    if isinstance(shape, Ellipse):
        return f"ellipse(a={shape.a:g},b={shape.b:g})"
    if isinstance(shape, Sphere):
        return f"sphere(dim={shape.dim},R={shape.radius:g})"
    if isinstance(shape, Torus):
        return f"torus(R={shape.major:g},rho={shape.minor:g})"
    if isinstance(shape, ZeroSphere):
        return "zerosphere"
    if isinstance(shape, FinitePointSet):
        return f"finite(n={len(shape.points)})"
    raise UnsupportedShape(f"unsupported shape {shape!r}")


# ---------------------------------------------------------------------------
# distance / nearest point


def _ellipse_nearest(shape: Ellipse, x: np.ndarray):
    """Nearest point(s) on the ellipse.

    Returns (foot, dist, tied). Works in the first quadrant by symmetry and
    solves F(t) = (a*u1/(t+a^2))^2 + (b*u2/(t+b^2))^2 - 1 = 0 on t in
    (-b^2, inf) by safeguarded Newton (bisection fallback), 80 iterations,
    residual 1e-12. F is strictly decreasing there, so the root is unique.
    """
    a, b = shape.a, shape.b
    u1, u2 = abs(x[0]), abs(x[1])
    s1 = 1.0 if x[0] >= 0 else -1.0
    s2 = 1.0 if x[1] >= 0 else -1.0

    if u2 == 0.0:
        cusp = (a * a - b * b) / a
        if u1 >= cusp:
            foot = np.array([s1 * a, 0.0])
            return foot, abs(u1 - a), False
        if a == b:
            # circle degenerates: center only
            if u1 == 0.0:
                return np.array([a, 0.0]), a, True
            foot = np.array([s1 * a, 0.0])
            return foot, a - u1, False
        # two symmetric feet off-axis
        c = a * u1 / (a * a - b * b)
        y2 = b * math.sqrt(max(0.0, 1.0 - c * c))
        foot = np.array([s1 * a * c, y2])
        d = math.hypot(a * c - u1, y2)
        return foot, d, True

    lo = b * u2 - b * b          # F(lo) >= 0 (second term equals 1 there)
    hi = math.hypot(a * u1, b * u2) - b * b   # F(hi) <= 0
    if hi <= lo:
        hi = lo + max(1.0, abs(lo))

    def f_and_df(t):
        p = a * u1 / (t + a * a)
        q = b * u2 / (t + b * b)
        f = p * p + q * q - 1.0
        df = -2.0 * (p * p / (t + a * a) + q * q / (t + b * b))
        return f, df

    t = 0.5 * (lo + hi)
    for _ in range(80):
        f, df = f_and_df(t)
        if abs(f) <= 1e-12:
            break
        if f > 0:
            lo = t
        else:
            hi = t
        t_new = t - f / df if df != 0 else t
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        if t_new == t:
            break
        t = t_new

    foot = np.array([s1 * a * a * u1 / (t + a * a), s2 * b * b * u2 / (t + b * b)])
    d = math.hypot(foot[0] - x[0], foot[1] - x[1])
    return foot, d, False


def distance_to_shape(shape, x) -> float:
    """Distance from x to the shape; defined everywhere."""
    p = as_point(x, dim=ambient_dim(shape))
    if isinstance(shape, (Circle, Sphere)):
        r = shape.radius
        return abs(float(np.linalg.norm(p)) - r)
    if isinstance(shape, Ellipse):
        return _ellipse_nearest(shape, p)[1]
    if isinstance(shape, Torus):
        rho_xy = math.hypot(p[0], p[1])
        return abs(math.hypot(rho_xy - shape.major, p[2]) - shape.minor)
    if isinstance(shape, ZeroSphere):
        return min(abs(p[0] - 1.0), abs(p[0] + 1.0))
    if isinstance(shape, FinitePointSet):
        pts = shape.array()
        return float(np.sqrt(((pts - p) ** 2).sum(axis=1).min()))
    raise UnsupportedShape(f"unsupported shape {shape!r}")


def project(shape, x, ctx: GeomContext = DEFAULT_CTX) -> np.ndarray:
    """Unique nearest point on the shape.

    Raises MedialAxisProximity when two nearest-point candidates tie within
    relative eps_med, i.e. when x sits at (or numerically near) the medial
    axis. Uniqueness everywhere else follows from each kind's geometry;
    inside the reach tube it is guaranteed for every kind.
    """
    p = as_point(x, dim=ambient_dim(shape))
    tau = reach(shape)

    if isinstance(shape, (Circle, Sphere)):
        nrm = float(np.linalg.norm(p))
        if nrm <= shape.radius * ctx.eps_med:
            raise MedialAxisProximity("input at the center: all directions tie")
        return p * (shape.radius / nrm)

    if isinstance(shape, Ellipse):
        foot, d, tied = _ellipse_nearest(shape, p)
        if tied:
            raise MedialAxisProximity("two symmetric nearest points tie on the ellipse")
        # competing foot on the mirrored branch nearly ties near the medial axis
        mirrored = math.hypot(foot[0] - p[0], -foot[1] - p[1])
        if foot[1] != 0.0 and mirrored - d <= ctx.eps_med * tau:
            raise MedialAxisProximity("mirrored-branch nearest point nearly ties")
        return foot

    if isinstance(shape, Torus):
        rho_xy = math.hypot(p[0], p[1])
        if rho_xy <= shape.major * ctx.eps_med:
            raise MedialAxisProximity("input on the torus axis: a circle of nearest points")
        spine = np.array([p[0], p[1], 0.0]) * (shape.major / rho_xy)
        v = p - spine
        vn = float(np.linalg.norm(v))
        if vn <= shape.minor * ctx.eps_med:
            raise MedialAxisProximity("input on the torus spine: a circle of nearest points")
        return spine + v * (shape.minor / vn)

    if isinstance(shape, ZeroSphere):
        d_plus = abs(p[0] - 1.0)
        d_minus = abs(p[0] + 1.0)
        if abs(d_plus - d_minus) <= ctx.eps_med * tau:
            raise MedialAxisProximity("equidistant from -1 and +1")
        return np.array([1.0 if d_plus < d_minus else -1.0])

    if isinstance(shape, FinitePointSet):
        pts = shape.array()
        dists = np.sqrt(((pts - p) ** 2).sum(axis=1))
        order = np.argsort(dists, kind="stable")
        d1, d2 = dists[order[0]], dists[order[1]]
        if d2 - d1 <= ctx.eps_med * max(d1, tau):
            raise MedialAxisProximity("two sample points tie as nearest")
        return pts[order[0]].copy()

    raise UnsupportedShape(f"unsupported shape {shape!r}")


@dataclass(frozen=True)
class TubePoint:
    """A point certified to lie strictly inside the reach tube of a shape."""

    point: tuple
    base_shape: object
    dist_to_shape: float

    def __post_init__(self):
        p = as_point(self.point, dim=ambient_dim(self.base_shape))
        d = distance_to_shape(self.base_shape, p)
        if not (d < reach(self.base_shape)):
            raise MedialAxisProximity(
                f"point at distance {d:g} is outside the open reach tube"
            )
        object.__setattr__(self, "point", tuple(p))
        object.__setattr__(self, "dist_to_shape", float(d))


# ---------------------------------------------------------------------------
# sampling


def sample_rng(shape, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` on-shape points using the supplied generator."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if isinstance(shape, Circle):
        th = rng.uniform(0.0, 2.0 * math.pi, size=count)
        return np.column_stack([shape.radius * np.cos(th), shape.radius * np.sin(th)])
    if isinstance(shape, Ellipse):
        # angle proposal thinned to arc-length measure
        a, b = shape.a, shape.b
        out = np.empty((count, 2))
        got = 0
        while got < count:
            m = max(64, 2 * (count - got))
            th = rng.uniform(0.0, 2.0 * math.pi, size=m)
            speed = np.sqrt((a * np.sin(th)) ** 2 + (b * np.cos(th)) ** 2)
            keep = th[rng.uniform(0.0, a, size=m) < speed]
            take = min(keep.size, count - got)
            out[got:got + take, 0] = a * np.cos(keep[:take])
            out[got:got + take, 1] = b * np.sin(keep[:take])
            got += take
        return out
    if isinstance(shape, Sphere):
        g = rng.normal(size=(count, shape.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * shape.radius
    if isinstance(shape, Torus):
        R, rho = shape.major, shape.minor
        out = np.empty((count, 3))
        got = 0
        while got < count:
            m = max(64, 2 * (count - got))
            th = rng.uniform(0.0, 2.0 * math.pi, size=m)
            ph = rng.uniform(0.0, 2.0 * math.pi, size=m)
            keep = rng.uniform(0.0, R + rho, size=m) < (R + rho * np.cos(ph))
            th, ph = th[keep], ph[keep]
            take = min(th.size, count - got)
            ring = R + rho * np.cos(ph[:take])
            out[got:got + take, 0] = ring * np.cos(th[:take])
            out[got:got + take, 1] = ring * np.sin(th[:take])
            out[got:got + take, 2] = rho * np.sin(ph[:take])
            got += take
        return out
    if isinstance(shape, ZeroSphere):
        return rng.choice(np.array([[-1.0], [1.0]]), size=count)
    if isinstance(shape, FinitePointSet):
        pts = shape.array()
        return pts[rng.integers(0, pts.shape[0], size=count)]
    raise UnsupportedShape(f"unsupported shape {shape!r}")


def sample(shape, count: int, seed: int) -> np.ndarray:
    """Deterministic on-shape sampler; same seed, same points."""
    return sample_rng(shape, count, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# brute-force reach estimation (oracle)


def _bounding_box(shape):
    if isinstance(shape, Circle):
        r = shape.radius
        return np.array([[-r, -r], [r, r]])
    if isinstance(shape, Ellipse):
        return np.array([[-shape.a, -shape.b], [shape.a, shape.b]])
    if isinstance(shape, Sphere):
        r = shape.radius
        return np.array([[-r] * shape.dim, [r] * shape.dim])
    if isinstance(shape, Torus):
        e = shape.major + shape.minor
        return np.array([[-e, -e, -shape.minor], [e, e, shape.minor]])
    if isinstance(shape, ZeroSphere):
        return np.array([[-1.0], [1.0]])
    if isinstance(shape, FinitePointSet):
        pts = shape.array()
        return np.vstack([pts.min(axis=0), pts.max(axis=0)])
    raise UnsupportedShape(f"unsupported shape {shape!r}")


def _measure_1d(shape) -> float:
    """Perimeter-style intrinsic size used to size witness pools."""
    if isinstance(shape, Circle):
        return 2.0 * math.pi * shape.radius
    if isinstance(shape, Ellipse):
        a, b = shape.a, shape.b
        h = ((a - b) / (a + b)) ** 2
        return math.pi * (a + b) * (1.0 + 3.0 * h / (10.0 + math.sqrt(4.0 - 3.0 * h)))
    if isinstance(shape, Sphere) and shape.dim == 2:
        return 2.0 * math.pi * shape.radius
    return 0.0


def _measure_2d(shape) -> float:
    if isinstance(shape, Sphere) and shape.dim == 3:
        return 4.0 * math.pi * shape.radius ** 2
    if isinstance(shape, Torus):
        return 4.0 * math.pi ** 2 * shape.major * shape.minor
    return 0.0


def _lattice_points(center, lo, hi, h):
    """Lattice center + k*h clipped to [lo, hi]; returns (points, int keys).

    Anchoring every level's grid to the same lattice center keeps the
    shape's symmetry rows/planes exactly on-grid, where true nearest-point
    ties are exact and the tie test needs only sampling-noise tolerance.
    """
    axes = []
    for i in range(center.size):
        k_lo = math.ceil((lo[i] - center[i]) / h - 1e-12)
        k_hi = math.floor((hi[i] - center[i]) / h + 1e-12)
        axes.append(np.arange(k_lo, k_hi + 1, dtype=np.int64))
    mesh = np.meshgrid(*axes, indexing="ij")
    keys = np.column_stack([m.ravel() for m in mesh])
    return center + keys * h, keys


def _sep_hit(wd, wi, pool, tie, sep_lo, gamma):
    """Vector sep test: some witness ties the nearest distance while sitting
    well away from the nearest foot."""
    d1 = wd[:, 0]
    feet = pool[wi[:, 0]]
    sep = np.linalg.norm(pool[wi] - feet[:, None, :], axis=2)
    sep_req = np.minimum(np.maximum(gamma * np.sqrt(d1 * tie), sep_lo), 1.4 * d1)
    near = wd <= (d1 + tie)[:, None]
    return (near & (sep >= sep_req[:, None])).any(axis=1)


def _flag_ties(grid_pts, tree, pool, tie, sep_lo, gamma, floor):
    """One tie scan. A grid point is a medial-axis candidate when some pool
    witness, well separated from its nearest foot, lies within tie of the
    nearest distance. Points where all k nearest witnesses tie at once get
    deeper witness queries before the same test. Returns mask, d1."""
    m = grid_pts.shape[0]
    flagged = np.empty(m, dtype=bool)
    d1 = np.empty(m)
    for start in range(0, m, 65536):
        block = grid_pts[start:start + 65536]
        hit = np.zeros(block.shape[0], dtype=bool)
        b_d1 = None
        todo = np.arange(block.shape[0])
        for k in (16, 128, 1024):
            k = min(k, pool.shape[0])
            wd, wi = tree.query(block[todo], k=k, workers=-1)
            if k == 1:
                wd = wd[:, None]
                wi = wi[:, None]
            if b_d1 is None:
                b_d1 = wd[:, 0].copy()
                eligible = b_d1 >= floor
            sub_hit = _sep_hit(wd, wi, pool, tie, sep_lo, gamma) & eligible[todo]
            hit[todo[sub_hit]] = True
            crowded = eligible[todo] & ~sub_hit & (wd[:, -1] <= wd[:, 0] + tie)
            todo = todo[crowded]
            if todo.size == 0 or k == pool.shape[0]:
                break
        flagged[start:start + 65536] = hit
        d1[start:start + 65536] = b_d1
    return flagged, d1


def estimate_reach(shape, grid_density: int) -> float:
    """Grid-scan estimate of reach.

    Scans an ambient lattice, marks points whose nearest-shape distance is
    nearly tied by a well-separated second witness (medial-axis candidates),
    and returns the smallest nearest-shape distance over the marked set,
    zooming the scan around the best candidates for three refinement levels.
    Converges to the reach as density grows.
    """
    from scipy.spatial import cKDTree

    n = ambient_dim(shape)
    if n > 3:
        raise DimensionMismatch(f"estimate_reach supports ambient dim <= 3, got {n}")
    if grid_density < 2:
        raise ValueError("grid_density must be >= 2")

    box = _bounding_box(shape)
    center = 0.5 * (box[0] + box[1])
    extent = box[1] - box[0]
    span = float(extent.max())
    pad = 0.06 * span
    lo0, hi0 = box[0] - pad, box[1] + pad
    h0 = float((hi0 - lo0).max()) / grid_density

    rng = np.random.default_rng(20260813)
    if isinstance(shape, (ZeroSphere, FinitePointSet)):
        pool = shape.array() if isinstance(shape, FinitePointSet) else np.array([[-1.0], [1.0]])
        spacing = 0.0
    else:
        per = _measure_1d(shape)
        if per > 0:
            pool = sample_rng(shape, 12000, rng)
            spacing = per / pool.shape[0]
        else:
            area = _measure_2d(shape)
            pool = sample_rng(shape, 60000, rng)
            spacing = math.sqrt(area / pool.shape[0])
    tree = cKDTree(pool)

    tau_hat = 0.5 * float(extent.min())
    gamma = 70.0
    best = math.inf
    windows = [(lo0, hi0)]
    h = h0
    for level in range(4):
        parts = []
        seen = set()
        for w_lo, w_hi in windows:
            pts, keys = _lattice_points(center, np.maximum(w_lo, lo0), np.minimum(w_hi, hi0), h)
            if pts.shape[0] == 0:
                continue
            fresh = [i for i, key in enumerate(map(tuple, keys)) if key not in seen]
            seen.update(map(tuple, keys[fresh]))
            parts.append((pts[fresh], keys[fresh]))
        if not parts:
            h /= 6.0
            continue
        grid_pts = np.vstack([p for p, _ in parts])
        grid_keys = np.vstack([k for _, k in parts])
        noise = spacing * spacing / (2.0 * max(tau_hat, 1e-9))
        tie = 3.0 * noise + 1e-12 * max(1.0, span)
        floor = max(4.0 * tie, 3.0 * spacing,
                    0.35 * (best if math.isfinite(best) else 0.0))
        mask, d1 = _flag_ties(grid_pts, tree, pool, tie, 6.0 * spacing, gamma, floor)
        if not mask.any():
            # no exact-symmetry ties on this lattice; allow grid-offset slack
            tie = max(tie, 0.45 * h)
            mask, d1 = _flag_ties(grid_pts, tree, pool, tie, 6.0 * spacing, gamma, floor)
        if not mask.any():
            h /= 6.0
            continue
        cand_pts = grid_pts[mask]
        cand_keys = grid_keys[mask]
        cand_d1 = d1[mask]
        prev = best
        best = float(cand_d1.min())
        tau_hat = best
        if math.isfinite(prev) and abs(prev - best) <= 0.25 * tie:
            break
        keep = cand_d1 <= best * 1.35 + 2.0 * tie
        cand_pts, cand_keys, cand_d1 = cand_pts[keep], cand_keys[keep], cand_d1[keep]
        order = np.argsort(cand_d1, kind="stable")
        cand_pts, cand_keys = cand_pts[order], cand_keys[order]
        # cluster kept candidates on an 8-cell lattice, 64 windows max
        # widen windows by the structural bias scale when the separation
        # requirement is below the antipodal cap (cusp-style minimizers)
        sep_est = gamma * math.sqrt(best * tie)
        ext = 1.5 * h
        if sep_est < 1.4 * best:
            ext += 0.6 * sep_est * sep_est / max(best, 1e-9)
        boxes = {}
        for p, key in zip(cand_pts, cand_keys):
            ck = tuple(key // 8)
            if ck in boxes:
                b_lo, b_hi = boxes[ck]
                boxes[ck] = (np.minimum(b_lo, p), np.maximum(b_hi, p))
            else:
                boxes[ck] = (p.copy(), p.copy())
            if len(boxes) > 64:
                break
        h /= 6.0
        # budget the next level's lattice points: drop worst windows first,
        # then coarsen the step if even the best window alone is too big
        raw = [(b_lo - ext, b_hi + ext) for b_lo, b_hi in boxes.values()]
        while True:
            windows = []
            total = 0
            for w_lo, w_hi in raw:
                count = int(np.prod(np.floor((w_hi - w_lo) / h) + 1))
                if windows and total + count > 300000:
                    break
                total += count
                windows.append((w_lo, w_hi))
            if total <= 300000 or h >= h0:
                break
            h *= 1.5

    if not math.isfinite(best):
        raise RuntimeError("no medial-axis candidates found; increase grid_density")
    return best
