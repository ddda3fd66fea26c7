"""Positive-reach shapes: reach values, projection vs dense oracle, sampling,
medial-axis detection, brute-force reach estimation."""
import math

import numpy as np
import pytest

from thicken import (
    Circle,
    Ellipse,
    FinitePointSet,
    MedialAxisProximity,
    Sphere,
    Torus,
    UnsupportedShape,
    ZeroSphere,
    ambient_dim,
    distance_to_shape,
    estimate_reach,
    project,
    reach,
    sample,
    sample_rng,
    shape_label,
)
from thicken.shapes import TubePoint

ALL_SHAPES = (
    Circle(1.0),
    Circle(2.5),
    Ellipse(2.0, 1.0),
    Sphere(3, 1.0),
    Sphere(4, 0.7),
    Torus(3.0, 1.0),
    ZeroSphere(),
    FinitePointSet(((0.0, 0.0), (3.0, 0.0), (0.0, 4.0))),
)


def test_constructor_guards():
    with pytest.raises(UnsupportedShape):
        Circle(0.0)
    with pytest.raises(UnsupportedShape):
        Ellipse(1.0, 2.0)  # needs a >= b
    with pytest.raises(UnsupportedShape):
        Sphere(1, 1.0)  # ambient dim >= 2
    with pytest.raises(UnsupportedShape):
        Torus(1.0, 2.0)  # needs major > minor
    with pytest.raises(UnsupportedShape):
        FinitePointSet(((0.0,),))  # needs 2 points
    with pytest.raises(UnsupportedShape):
        FinitePointSet(((0.0,), (0.0,)))  # duplicates


def test_reach_closed_forms():
    assert reach(Circle(1.0)) == 1.0
    assert reach(Circle(2.0)) == 2.0
    assert reach(Sphere(5, 0.5)) == 0.5
    assert reach(Ellipse(2.0, 1.0)) == pytest.approx(0.5)  # b^2/a
    assert reach(Torus(3.0, 1.0)) == 1.0  # min(minor, major - minor)
    assert reach(Torus(3.0, 2.0)) == 1.0
    assert reach(ZeroSphere()) == 1.0
    assert reach(FinitePointSet(((0.0,), (3.0,)))) == 1.5  # half min gap


def test_ambient_dims_and_labels():
    assert ambient_dim(Circle(1.0)) == 2
    assert ambient_dim(Sphere(4, 1.0)) == 4
    assert ambient_dim(Torus(3.0, 1.0)) == 3
    assert ambient_dim(ZeroSphere()) == 1
    assert shape_label(Circle(1.0)) == "circle(R=1)"
    assert shape_label(Ellipse(2.0, 1.0)) == "ellipse(a=2,b=1)"
    assert shape_label(Sphere(3, 1.0)) == "sphere(dim=3,R=1)"
    assert shape_label(Torus(3.0, 1.0)) == "torus(R=3,rho=1)"
    assert shape_label(ZeroSphere()) == "zerosphere"
    assert shape_label(FinitePointSet(((0.0,), (1.0,)))) == "finite(n=2)"


def test_distance_to_shape_known_values():
    assert distance_to_shape(Circle(1.0), [2.0, 0.0]) == 1.0
    # radially inward in the z=0 plane lands on the tube's inner equator
    assert distance_to_shape(Torus(3.0, 1.0), [3.0, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-12)
    assert distance_to_shape(ZeroSphere(), [0.25]) == 0.75


@pytest.mark.parametrize("shape", ALL_SHAPES, ids=shape_label)
def test_samples_lie_on_shape(shape):
    pts = sample(shape, 200, seed=3)
    assert pts.shape == (200, ambient_dim(shape))
    for p in pts:
        assert distance_to_shape(shape, p) < 1e-12


def test_sample_exactness_special_cases():
    zs = sample(ZeroSphere(), 16, seed=4)
    assert set(map(float, zs.ravel())) <= {-1.0, 1.0}
    sp = sample(Sphere(3, 1.0), 1000, seed=4)
    assert np.max(np.abs(np.linalg.norm(sp, axis=1) - 1.0)) < 1e-12


def test_sample_is_seed_deterministic():
    a = sample(Torus(3.0, 1.0), 64, seed=11)
    b = sample(Torus(3.0, 1.0), 64, seed=11)
    c = sample(Torus(3.0, 1.0), 64, seed=12)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("shape", ALL_SHAPES, ids=shape_label)
def test_projection_against_dense_argmin(shape):
    # oracle: nearest of 20000 on-shape samples; the exact projection must be
    # at least as close, and agree with distance_to_shape
    rng = np.random.default_rng(5)
    dense = sample_rng(shape, 20000, np.random.default_rng(99))
    tau = reach(shape)
    for _ in range(40):
        s = sample_rng(shape, 1, rng)[0]
        u = rng.normal(size=s.size)
        u /= np.linalg.norm(u)
        x = s + (0.8 * tau * rng.random()) * u
        try:
            p = project(shape, x)
        except MedialAxisProximity:
            continue  # the random offset can legitimately land near the axis
        d_exact = float(np.linalg.norm(x - p))
        assert d_exact == pytest.approx(distance_to_shape(shape, x), abs=1e-9)
        assert distance_to_shape(shape, p) < 1e-9
        d_dense = float(np.min(np.linalg.norm(dense - x, axis=1)))
        assert d_exact <= d_dense + 1e-12


def test_projection_known_values():
    assert np.allclose(project(Circle(1.0), [2.0, 0.0]), [1.0, 0.0])
    assert np.allclose(project(Sphere(3, 2.0), [0.0, 0.0, 5.0]), [0.0, 0.0, 2.0])
    assert np.allclose(project(Ellipse(2.0, 1.0), [3.0, 0.0]), [2.0, 0.0])
    # torus: radially outward in the z=0 plane hits the outer equator
    assert np.allclose(project(Torus(3.0, 1.0), [5.0, 0.0, 0.0]), [4.0, 0.0, 0.0])
    assert np.allclose(project(ZeroSphere(), [0.2]), [1.0])
    fp = FinitePointSet(((0.0, 0.0), (3.0, 0.0)))
    assert np.allclose(project(fp, [1.0, 1.0]), [0.0, 0.0])


def test_projection_medial_axis_raises():
    with pytest.raises(MedialAxisProximity):
        project(Circle(1.0), [0.0, 0.0])
    with pytest.raises(MedialAxisProximity):
        project(Sphere(3, 1.0), [0.0, 0.0, 0.0])
    with pytest.raises(MedialAxisProximity):
        project(ZeroSphere(), [0.0])
    with pytest.raises(MedialAxisProximity):
        project(Torus(3.0, 1.0), [0.0, 0.0, 5.0])  # points on the z-axis tie
    with pytest.raises(MedialAxisProximity):
        project(FinitePointSet(((0.0,), (2.0,))), [1.0])
    # ellipse: the center lies between the two curvature centers, still medial
    with pytest.raises(MedialAxisProximity):
        project(Ellipse(2.0, 1.0), [0.0, 0.0])


def test_projection_is_idempotent_on_shape_points():
    rng = np.random.default_rng(17)
    for shape in ALL_SHAPES:
        for s in sample_rng(shape, 25, rng):
            assert np.allclose(project(shape, s), s, atol=1e-12)


def test_tube_point_certificate():
    tp = TubePoint((1.5, 0.0), Circle(1.0), 0.0)
    assert tp.dist_to_shape == 0.5  # recomputed, not trusted from the caller
    with pytest.raises(MedialAxisProximity):
        TubePoint((3.0, 0.0), Circle(1.0), 0.0)  # distance 2 >= reach 1


@pytest.mark.parametrize("shape", (Circle(1.0), Ellipse(2.0, 1.0), Sphere(3, 1.0)),
                         ids=shape_label)
def test_projection_federer_contraction_quick(shape):
    # inside the tube at radius r, projection is tau/(tau-r)-Lipschitz
    rng = np.random.default_rng(23)
    tau = reach(shape)
    r = 0.5 * tau
    factor = tau / (tau - r)
    for _ in range(200):
        ss = sample_rng(shape, 2, rng)
        us = rng.normal(size=ss.shape)
        us /= np.linalg.norm(us, axis=1, keepdims=True)
        x, y = ss + (r * rng.random(2))[:, None] * us
        px, py = project(shape, x), project(shape, y)
        lhs = float(np.linalg.norm(px - py))
        rhs = factor * float(np.linalg.norm(x - y))
        assert lhs <= rhs + 1e-9


def test_empty_interior_ball_property_circle():
    # tangent ball of radius tau at any shape point contains no shape point
    # in its interior
    shape = Circle(1.0)
    dense = sample(shape, 4000, seed=31)
    rng = np.random.default_rng(37)
    for _ in range(100):
        s = sample_rng(shape, 1, rng)[0]
        n = s / np.linalg.norm(s)
        c = s - n  # inward tangent ball center for the unit circle
        assert np.min(np.linalg.norm(dense - c, axis=1)) >= 1.0 - 1e-9


@pytest.mark.parametrize("shape,density,rel_tol", (
    (Circle(1.0), 200, 0.01),
    (Ellipse(2.0, 1.0), 400, 0.02),
    (FinitePointSet(((0.0,), (3.0,))), 50, 1e-9),
), ids=("circle", "ellipse", "finite-pair"))
def test_estimate_reach_cheap_densities(shape, density, rel_tol):
    # the torus case runs in the acceptance gate (its 3-D grid is slow)
    est = estimate_reach(shape, density)
    assert abs(est - reach(shape)) <= rel_tol * reach(shape)
