"""Exact 1-Wasserstein distance between finitely supported measures.

The solver runs the transportation variant of the network simplex on the
complete bipartite graph between the two supports: spanning-tree bases,
dual pricing, most-negative entering arc with lexicographic ties, and a
Bland fallback after degenerate streaks. A brute-force oracle enumerates
every spanning-tree basis of tiny instances for independent verification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, SizeLimit
from .euclid import as_point, as_points

_MAX_ATOMS = 64
_ZERO_WEIGHT = 1e-14
_RENORM_DRIFT = 1e-10


@dataclass(frozen=True)
class Measure:
    """Finitely supported probability measure: distinct atoms, positive
    weights summing to 1. Near-zero weights are dropped at construction and
    the rest renormalized (drift capped at 1e-10)."""

    support: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.support) == 0:
            raise ValueError("measure needs at least one atom")
        pts = as_points([as_point(p) for p in self.support])
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != pts.shape[0]:
            raise ValueError("weights must match support length")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError(f"negative weight {w.min()}")
        keep = w > _ZERO_WEIGHT
        pts, w = pts[keep], w[keep]
        if pts.shape[0] == 0:
            raise ValueError("measure needs at least one atom with positive weight")
        if pts.shape[0] > _MAX_ATOMS:
            raise SizeLimit(f"at most {_MAX_ATOMS} atoms, got {pts.shape[0]}")
        total = float(w.sum())
        if abs(total - 1.0) > _RENORM_DRIFT:
            raise ValueError(f"weights sum to {total!r}, off by more than {_RENORM_DRIFT}")
        w = w / total
        for i in range(pts.shape[0]):
            for j in range(i + 1, pts.shape[0]):
                if np.array_equal(pts[i], pts[j]):
                    raise ValueError(f"support atoms {i} and {j} coincide")
        object.__setattr__(self, "support", tuple(tuple(map(float, p)) for p in pts))
        object.__setattr__(self, "weights", tuple(map(float, w)))

    def array(self) -> np.ndarray:
        return np.asarray(self.support, dtype=float)

    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.support[0])


@dataclass(frozen=True)
class TransportPlan:
    entries: tuple

    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)


def _plan_entries(P: np.ndarray) -> tuple:
    return tuple(tuple(map(float, row)) for row in P)


def _cost_matrix(mu: Measure, nu: Measure) -> np.ndarray:
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"measure dimensions differ: {mu.dim} vs {nu.dim}")
    A, B = mu.array(), nu.array()
    return np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)


def plan_cost(plan: TransportPlan, mu: Measure, nu: Measure) -> float:
    """Total mass-times-distance cost of a feasible plan."""
    P = plan.array()
    a, b = mu.weight_array(), nu.weight_array()
    if P.shape != (a.size, b.size):
        raise DimensionMismatch(f"plan shape {P.shape} does not match supports {(a.size, b.size)}")
    if np.any(P < -1e-12):
        raise ValueError(f"negative plan entry {P.min()}")
    if np.max(np.abs(P.sum(axis=1) - a)) > 1e-10:
        raise ValueError("plan row sums do not reproduce the first measure")
    if np.max(np.abs(P.sum(axis=0) - b)) > 1e-10:
        raise ValueError("plan column sums do not reproduce the second measure")
    if abs(P.sum() - 1.0) > 1e-10:
        raise ValueError(f"plan total mass {P.sum()!r} is not 1")
    return float(np.sum(P * _cost_matrix(mu, nu)))


def _tree_duals(basis: np.ndarray, C: np.ndarray) -> tuple:
    """Node potentials with u[0] = 0, following basic arcs: u_i + v_j = C_ij."""
    m, n = C.shape
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    rows_by_col = [np.flatnonzero(basis[:, j]) for j in range(n)]
    cols_by_row = [np.flatnonzero(basis[i, :]) for i in range(m)]
    stack = [(True, 0)]
    while stack:
        is_row, k = stack.pop()
        if is_row:
            for j in cols_by_row[k]:
                if math.isnan(v[j]):
                    v[j] = C[k, j] - u[k]
                    stack.append((False, j))
        else:
            for i in rows_by_col[k]:
                if math.isnan(u[i]):
                    u[i] = C[i, k] - v[k]
                    stack.append((True, i))
    return u, v


def _basis_cycle(basis: np.ndarray, i0: int, j0: int) -> list:
    """Cells of the unique cycle created by adding arc (i0, j0) to the basis
    tree, starting with (i0, j0); signs alternate +,-,+,... along the list."""
    m, n = basis.shape
    # path from column node j0 back to row node i0 through the tree
    parent = {}
    stack = [("c", j0)]
    seen = {("c", j0)}
    while stack:
        kind, k = stack.pop()
        if kind == "c":
            for i in np.flatnonzero(basis[:, k]):
                node = ("r", int(i))
                if node not in seen:
                    seen.add(node)
                    parent[node] = ("c", k)
                    if i == i0:
                        stack.clear()
                        break
                    stack.append(node)
        else:
            for j in np.flatnonzero(basis[k, :]):
                node = ("c", int(j))
                if node not in seen:
                    seen.add(node)
                    parent[node] = ("r", k)
                    stack.append(node)
    cells = [(i0, j0)]
    node = ("r", i0)
    while node != ("c", j0):
        prev = parent[node]
        if node[0] == "r":
            cells.append((node[1], prev[1]))
        else:
            cells.append((prev[1], node[1]))
        node = prev
    return cells


def wasserstein1(mu: Measure, nu: Measure) -> tuple:
    """Exact optimum of the transportation linear program and an optimal plan."""
    C = _cost_matrix(mu, nu)
    a, b = mu.weight_array(), nu.weight_array()
    m, n = C.shape
    if m == 1 or n == 1:
        P = np.outer(a, b)
        return float(np.sum(P * C)), TransportPlan(_plan_entries(P))

    # northwest-corner initial basic feasible solution
    F = np.zeros((m, n))
    basis = np.zeros((m, n), dtype=bool)
    ra, rb = a.copy(), b.copy()
    i = j = 0
    while True:
        q = min(ra[i], rb[j])
        F[i, j] = q
        basis[i, j] = True
        ra[i] -= q
        rb[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if ra[i] <= rb[j] and i < m - 1:
            i += 1
        else:
            j += 1

    tol = 1e-13 * max(1.0, float(C.max()))
    degenerate_streak = 0
    for _ in range(20000):
        u, v = _tree_duals(basis, C)
        reduced = C - u[:, None] - v[None, :]
        reduced[basis] = 0.0
        if degenerate_streak < 50:
            flat = np.argmin(reduced)  # ties resolve to the lowest index
            i0, j0 = np.unravel_index(flat, reduced.shape)
            if reduced[i0, j0] >= -tol:
                break
        else:
            # Bland: first improving arc in lexicographic order
            neg = np.argwhere(reduced < -tol)
            if neg.size == 0:
                break
            i0, j0 = map(int, neg[0])
        cells = _basis_cycle(basis, int(i0), int(j0))
        minus = cells[1::2]
        theta = min(F[c] for c in minus)
        leave = min(c for c in minus if F[c] <= theta)
        for k, c in enumerate(cells):
            F[c] += theta if k % 2 == 0 else -theta
        F[leave] = 0.0
        basis[leave] = False
        basis[i0, j0] = True
        degenerate_streak = degenerate_streak + 1 if theta <= tol else 0
    else:
        raise RuntimeError("network simplex failed to converge")

    F[F < 0] = 0.0
    return float(np.sum(F * C)), TransportPlan(_plan_entries(F))


@lru_cache(maxsize=32)
def _spanning_bases(m: int, n: int) -> tuple:
    """All spanning trees of the complete bipartite graph K_{m,n}, as tuples
    of (i, j) arcs; a tree basis has m + n - 1 arcs and connects all nodes."""
    arcs = [(i, j) for i in range(m) for j in range(n)]
    out = []
    for subset in combinations(range(len(arcs)), m + n - 1):
        parent = list(range(m + n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for k in subset:
            i, j = arcs[k]
            ri, rj = find(i), find(m + j)
            if ri == rj:
                ok = False
                break
            parent[ri] = rj
        if ok:
            out.append(tuple(arcs[k] for k in subset))
    return tuple(out)


def oracle_wasserstein1(mu: Measure, nu: Measure) -> float:
    """Brute-force optimum: enumerate every spanning-tree basis, solve its
    unique flow by leaf elimination, keep the cheapest feasible one."""
    C = _cost_matrix(mu, nu)
    a, b = mu.weight_array(), nu.weight_array()
    m, n = C.shape
    if m * n > 16:
        raise SizeLimit(f"oracle supports |mu|*|nu| <= 16, got {m * n}")
    best = math.inf
    for tree in _spanning_bases(m, n):
        rest = {arc: 0.0 for arc in tree}
        supply = list(a) + [-x for x in b]
        adj = {k: [] for k in range(m + n)}
        for i, j in tree:
            adj[i].append((i, j))
            adj[m + j].append((i, j))
        degree = {k: len(adj[k]) for k in adj}
        leaves = [k for k, d in degree.items() if d == 1]
        removed = set()
        feasible = True
        while leaves:
            k = leaves.pop()
            arc = next((e for e in adj[k] if e not in removed), None)
            if arc is None:
                continue
            i, j = arc
            flow = supply[k] if k < m else -supply[k]
            rest[arc] = flow
            if flow < -1e-12:
                feasible = False
                break
            other = m + j if k < m else i
            supply[other] += supply[k]
            supply[k] = 0.0
            removed.add(arc)
            degree[other] -= 1
            if degree[other] == 1:
                leaves.append(other)
        if not feasible:
            continue
        cost = sum(f * C[i, j] for (i, j), f in rest.items())
        if cost < best:
            best = cost
    return best


def parse_measure_text(text: str) -> Measure:
    """One atom per line: weight then coordinates, whitespace-separated.
    Blank lines and #-comments are skipped."""
    support, weights = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ValueError(f"line {lineno}: need weight and at least one coordinate")
        try:
            vals = [float(f) for f in fields]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        weights.append(vals[0])
        support.append(tuple(vals[1:]))
    if not support:
        raise ValueError("no atoms found")
    return Measure(tuple(support), tuple(weights))


def format_measure_text(measure: Measure) -> str:
    lines = []
    for w, p in zip(measure.weights, measure.support):
        coords = " ".join(format(c, ".17g") for c in p)
        lines.append(f"{format(w, '.17g')} {coords}")
    return "\n".join(lines) + "\n"
