"""Points of metric thickenings: finitely supported measures whose support
sets pass a complex's simplex predicate, together with the linear barycenter
projection, the Dirac inclusion, and the Wasserstein distance between points
of the same thickening.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import (
    ComplexSpec,
    Simplex,
    is_cech_simplex_ambient,
    is_cech_simplex_intrinsic,
    is_vr_simplex,
    min_enclosing_ball,
)
from .errors import SimplexViolation, SpecMismatch
from .euclid import DEFAULT_CTX, GeomContext, as_point, convex_combination, diameter
from .shapes import distance_to_shape
from .transport import Measure, wasserstein1


@dataclass(frozen=True)
class ThickeningPoint:
    """A validated point of a metric thickening. Construct via
    make_thickening_point; the constructor itself only checks types."""

    measure: Measure
    spec: ComplexSpec

    def __post_init__(self):
        if not isinstance(self.measure, Measure):
            raise TypeError("measure must be a Measure")
        if not isinstance(self.spec, ComplexSpec):
            raise TypeError("spec must be a ComplexSpec")

    def support_simplex(self) -> Simplex:
        return Simplex(self.measure.support)


def _failure_report(s: Simplex, spec: ComplexSpec, witnesses) -> str:
    if spec.flavor == "vr":
        measured = diameter(s.array())
        return (f"support diameter {measured:.12g} exceeds scale {spec.scale:.12g} "
                f"(flavor vr, strict={spec.strict})")
    ball = min_enclosing_ball(s.array())
    if spec.flavor == "cech-ambient":
        return (f"support min-ball radius {ball.radius:.12g} exceeds {spec.scale / 2:.12g} "
                f"(flavor cech-ambient, strict={spec.strict})")
    return (f"no on-shape witness covers the support within {spec.scale / 2:.12g} "
            f"(flavor cech-intrinsic, strict={spec.strict}, "
            f"{len(tuple(witnesses))} candidate witnesses)")


def make_thickening_point(measure: Measure, spec: ComplexSpec, witnesses=(),
                          ctx: GeomContext = DEFAULT_CTX) -> ThickeningPoint:
    """Validate that the measure's support is a simplex of the complex and
    wrap it. Raises SimplexViolation with a diagnostic report on failure;
    AmbiguousPredicate propagates from the underlying predicate."""
    s = Simplex(measure.support)
    if spec.flavor == "vr":
        ok = is_vr_simplex(s, spec, ctx)
    elif spec.flavor == "cech-ambient":
        ok = is_cech_simplex_ambient(s, spec, ctx)
    else:
        ok = is_cech_simplex_intrinsic(s, spec, witnesses, ctx)
    if not ok:
        raise SimplexViolation(_failure_report(s, spec, witnesses))
    return ThickeningPoint(measure, spec)


def linear_projection_f(tp: ThickeningPoint) -> np.ndarray:
    """Euclidean barycenter of the measure: sum of weight times atom."""
    return convex_combination(tp.measure.array(), tp.measure.weight_array())


def inclusion_iota(x, spec: ComplexSpec, ctx: GeomContext = DEFAULT_CTX) -> ThickeningPoint:
    """The Dirac measure at x as a thickening point. When ``spec`` carries a
    shape, x must lie on it."""
    p = as_point(x)
    if spec.shape is not None:
        gap = distance_to_shape(spec.shape, p)
        if gap > ctx.eps_geo * max(1.0, float(np.linalg.norm(p))):
            raise ValueError(f"point is off-shape by {gap:.3g}, cannot include")
    measure = Measure((tuple(map(float, p)),), (1.0,))
    return make_thickening_point(measure, spec, witnesses=(tuple(map(float, p)),), ctx=ctx)


def thickening_distance(a: ThickeningPoint, b: ThickeningPoint) -> float:
    """1-Wasserstein distance between two points of the same thickening."""
    if a.spec != b.spec:
        raise SpecMismatch(f"cannot compare points of {a.spec} and {b.spec}")
    value, _ = wasserstein1(a.measure, b.measure)
    return value
