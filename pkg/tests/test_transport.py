"""Exact 1-Wasserstein on finite measures.

Two independent cross-checks: the tree-enumeration oracle (all spanning
bases of the bipartite support graph) for small instances, and a generic LP
solver for larger ones. Frozen values below were produced by the oracle.
"""
import numpy as np
import pytest
from scipy.optimize import linprog

from thicken import (
    DimensionMismatch,
    Measure,
    SizeLimit,
    TransportPlan,
    format_measure_text,
    oracle_wasserstein1,
    parse_measure_text,
    plan_cost,
    wasserstein1,
)


def random_measure(rng, max_atoms=4, dim=2, grid=None) -> Measure:
    n = int(rng.integers(1, max_atoms + 1))
    if grid is not None:
        idx = rng.choice(len(grid), size=n, replace=False)
        pts = np.asarray(grid, dtype=float)[idx]
    else:
        pts = rng.normal(size=(n, dim))
    w = rng.random(n) + 0.05
    return Measure(tuple(map(tuple, pts)), tuple(w / w.sum()))


def lp_wasserstein(mu: Measure, nu: Measure) -> float:
    a, b = mu.weight_array(), nu.weight_array()
    A, B = mu.array(), nu.array()
    C = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    m, n = C.shape
    A_eq = np.zeros((m + n, m * n))
    for i in range(m):
        A_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        A_eq[m + j, j::n] = 1.0
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs")
    assert res.success
    return float(res.fun)


def test_measure_validation():
    with pytest.raises(ValueError):
        Measure(((0.0,),), (0.9,))  # mass must sum to 1
    with pytest.raises(ValueError):
        Measure(((0.0,), (1.0,)), (-0.1, 1.1))
    with pytest.raises(ValueError):
        Measure(((0.0,), (0.0,)), (0.5, 0.5))  # duplicate support
    with pytest.raises(SizeLimit):
        Measure(tuple((float(i),) for i in range(65)), tuple([1.0 / 65] * 65))
    # tiny weights are dropped, the rest renormalized
    m = Measure(((0.0,), (1.0,)), (1.0 - 1e-15, 1e-15))
    assert len(m.weights) == 1
    assert m.weights[0] == 1.0


def test_plan_cost_forced_plans():
    # one Dirac onto itself: the only plan is the single cell of mass 1
    dx = Measure(((0.5, 0.5),), (1.0,))
    assert plan_cost(TransportPlan(((1.0,),)), dx, dx) == 0.0
    # Dirac to Dirac: cost is the point distance
    dy = Measure(((3.5, 4.5),), (1.0,))
    assert plan_cost(TransportPlan(((1.0,),)), dx, dy) == pytest.approx(5.0, abs=1e-12)
    # split source onto a midpoint Dirac: both cells forced, every unit moves 1/2
    mu = Measure(((0.0,), (1.0,)), (0.5, 0.5))
    nu = Measure(((0.5,),), (1.0,))
    assert plan_cost(TransportPlan(((0.5,), (0.5,))), mu, nu) == pytest.approx(0.5, abs=1e-12)


def test_wasserstein_frozen_values():
    # values frozen from oracle_wasserstein1
    d0 = Measure(((0.0, 0.0),), (1.0,))
    d1 = Measure(((1.0, 0.0),), (1.0,))
    assert wasserstein1(d0, d1)[0] == pytest.approx(1.0, abs=1e-12)
    # half at 0, half at 1, target is the midpoint: every unit travels 1/2
    mu = Measure(((0.0,), (1.0,)), (0.5, 0.5))
    nu = Measure(((0.5,),), (1.0,))
    assert wasserstein1(mu, nu)[0] == pytest.approx(0.5, abs=1e-12)
    # unbalanced split: 3/4 of the mass crosses distance 2
    mu = Measure(((0.0,), (2.0,)), (0.75, 0.25))
    nu = Measure(((0.0,), (2.0,)), (0.0 + 0.25, 0.75))
    assert wasserstein1(mu, nu)[0] == pytest.approx(1.0, abs=1e-12)
    # quarter/three-quarter swap on {0,1}: half the mass crosses distance 1
    mu = Measure(((0.0,), (1.0,)), (0.25, 0.75))
    nu = Measure(((0.0,), (1.0,)), (0.75, 0.25))
    assert wasserstein1(mu, nu)[0] == pytest.approx(0.5, abs=1e-12)
    assert oracle_wasserstein1(mu, nu) == pytest.approx(0.5, abs=1e-12)
    # two horizontal pairs one unit apart vertically: straight-down matching
    mu = Measure(((0.0, 0.0), (1.0, 0.0)), (0.5, 0.5))
    nu = Measure(((0.0, 1.0), (1.0, 1.0)), (0.5, 0.5))
    assert wasserstein1(mu, nu)[0] == pytest.approx(1.0, abs=1e-12)


def test_dirac_distance_is_point_distance():
    rng = np.random.default_rng(10)
    for _ in range(30):
        x, y = rng.normal(size=(2, 3)) * 3
        dxy, _ = wasserstein1(Measure((tuple(x),), (1.0,)), Measure((tuple(y),), (1.0,)))
        assert dxy == pytest.approx(float(np.linalg.norm(x - y)), abs=1e-12)
    dx = Measure(((2.0, 2.0),), (1.0,))
    assert oracle_wasserstein1(dx, dx) == 0.0


def test_wasserstein_matches_tree_oracle():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(400):
        mu = random_measure(rng, max_atoms=4, dim=int(rng.integers(1, 4)))
        nu = random_measure(rng, max_atoms=4, dim=mu.dim)
        got, plan = wasserstein1(mu, nu)
        want = oracle_wasserstein1(mu, nu)
        worst = max(worst, abs(got - want) / max(1.0, want))
        assert plan_cost(plan, mu, nu) == pytest.approx(got, abs=1e-10)
    assert worst < 1e-9


def test_wasserstein_matches_lp_on_larger_instances():
    rng = np.random.default_rng(3)
    for _ in range(40):
        mu = random_measure(rng, max_atoms=12, dim=3)
        nu = random_measure(rng, max_atoms=12, dim=3)
        got, _ = wasserstein1(mu, nu)
        assert got == pytest.approx(lp_wasserstein(mu, nu), abs=1e-8)


def test_oracle_size_limit():
    rng = np.random.default_rng(4)
    mu = random_measure(rng, max_atoms=5, dim=1)
    nu = Measure(tuple((float(i), ) for i in range(5)), tuple([0.2] * 5))
    while len(mu.weights) * len(nu.weights) <= 16:
        mu = random_measure(rng, max_atoms=5, dim=1)
    with pytest.raises(SizeLimit):
        oracle_wasserstein1(mu, nu)


def test_metric_axioms():
    rng = np.random.default_rng(5)
    for _ in range(60):
        mu = random_measure(rng, max_atoms=3, dim=2)
        nu = random_measure(rng, max_atoms=3, dim=2)
        pi = random_measure(rng, max_atoms=3, dim=2)
        dmn, _ = wasserstein1(mu, nu)
        dnm, _ = wasserstein1(nu, mu)
        assert dmn >= 0
        assert dmn == pytest.approx(dnm, abs=1e-10)  # symmetry
        dmp, _ = wasserstein1(mu, pi)
        dpn, _ = wasserstein1(pi, nu)
        assert dmn <= dmp + dpn + 1e-9  # triangle inequality
        assert wasserstein1(mu, mu)[0] == pytest.approx(0.0, abs=1e-12)


def test_translation_invariance():
    rng = np.random.default_rng(6)
    for _ in range(40):
        mu = random_measure(rng, max_atoms=4, dim=2)
        nu = random_measure(rng, max_atoms=4, dim=2)
        v = rng.normal(size=2)
        mu2 = Measure(tuple(tuple(np.asarray(p) + v) for p in mu.support), mu.weights)
        nu2 = Measure(tuple(tuple(np.asarray(p) + v) for p in nu.support), nu.weights)
        assert wasserstein1(mu, nu)[0] == pytest.approx(wasserstein1(mu2, nu2)[0], abs=1e-9)


def test_degenerate_instances_terminate():
    # uniform weights on collinear equispaced points: heavily degenerate
    for n in (4, 8, 16):
        pts = tuple((float(i),) for i in range(n))
        w = tuple([1.0 / n] * n)
        mu = Measure(pts, w)
        nu = Measure(tuple((float(i) + 0.25,) for i in range(n)), w)
        got, plan = wasserstein1(mu, nu)
        assert got == pytest.approx(0.25, abs=1e-10)  # everyone shifts 0.25
        assert plan_cost(plan, mu, nu) == pytest.approx(got, abs=1e-10)
    # permuted grid against itself: optimal cost zero with ties everywhere
    rng = np.random.default_rng(8)
    grid = [(float(i), float(j)) for i in range(4) for j in range(4)]
    perm = rng.permutation(16)
    mu = Measure(tuple(grid), tuple([1 / 16] * 16))
    nu = Measure(tuple(grid[i] for i in perm), tuple([1 / 16] * 16))
    assert wasserstein1(mu, nu)[0] == pytest.approx(0.0, abs=1e-12)


def test_plan_marginals_checked():
    mu = Measure(((0.0,), (1.0,)), (0.5, 0.5))
    nu = Measure(((0.5,),), (1.0,))
    _, plan = wasserstein1(mu, nu)
    with pytest.raises(DimensionMismatch):
        plan_cost(plan, nu, mu)  # transposed shape rejected
    with pytest.raises(ValueError):
        # right shape, wrong marginals
        other = Measure(((0.0,), (1.0,)), (0.25, 0.75))
        plan_cost(plan, other, nu)


def test_measure_text_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(20):
        mu = random_measure(rng, max_atoms=5, dim=3)
        again = parse_measure_text(format_measure_text(mu))
        assert np.array_equal(again.array(), mu.array())
        # constructor renormalization may shift the last ulp
        assert np.allclose(again.weight_array(), mu.weight_array(), rtol=0, atol=1e-15)
    parsed = parse_measure_text("# comment\n0.5 0 0\n0.5 1 0\n")
    assert parsed.weights == (0.5, 0.5)
    with pytest.raises(ValueError):
        parse_measure_text("0.5 0 0\n0.5 1\n")  # ragged coordinates
