import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lab.errors import InputError
from lab.models import ConvexBody, SpaceDescriptor, Vector
from lab.space import (
    MAX_GRID_POINTS,
    asymptotic_radius,
    body_diameter,
    contains,
    diameter,
    grid_points,
    norm,
    norming_functional,
    sample_body,
)

coordinate = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@st.composite
def spaces(draw, max_dim=4):
    dim = draw(st.integers(min_value=1, max_value=max_dim))
    if draw(st.booleans()):
        return SpaceDescriptor.sup(dim)
    return SpaceDescriptor.lp(draw(st.floats(min_value=1.0, max_value=8.0)), dim)


@st.composite
def vector_pairs(draw):
    space = draw(spaces())
    x = draw(st.lists(coordinate, min_size=space.dimension, max_size=space.dimension))
    y = draw(st.lists(coordinate, min_size=space.dimension, max_size=space.dimension))
    return space, Vector.of(x, space), Vector.of(y, space)


def unit(i: int, space: SpaceDescriptor) -> Vector:
    return Vector.of(np.eye(space.dimension)[i], space)


class TestNorm:
    def test_known_values(self):
        assert norm(SpaceDescriptor.lp(2.0, 2), Vector.of([3, 4], SpaceDescriptor.lp(2.0, 2))) == pytest.approx(5.0)
        l1 = SpaceDescriptor.lp(1.0, 3)
        assert norm(l1, Vector.of([1, -1, 1], l1)) == pytest.approx(3.0)
        l3 = SpaceDescriptor.lp(3.0, 2)
        assert norm(l3, Vector.of([1, 1], l3)) == pytest.approx(2 ** (1 / 3), abs=1e-12)

    def test_sup_norm(self):
        sup = SpaceDescriptor.sup(3)
        assert norm(sup, Vector.of([1, -5, 2], sup)) == 5.0

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            norm(SpaceDescriptor.lp(2.0, 3), Vector.of([1, 2], SpaceDescriptor.lp(2.0, 2)))

    @given(vector_pairs())
    @settings(max_examples=200)
    def test_triangle_inequality(self, case):
        space, x, y = case
        total = Vector.of(x.array + y.array, space)
        assert norm(space, total) <= norm(space, x) + norm(space, y) + 1e-9 * (1 + norm(space, x) + norm(space, y))

    @given(vector_pairs(), st.floats(min_value=-100, max_value=100))
    def test_homogeneity(self, case, scale):
        space, x, _ = case
        scaled = Vector.of(scale * x.array, space)
        assert norm(space, scaled) == pytest.approx(abs(scale) * norm(space, x), rel=1e-9, abs=1e-9)

    @given(spaces(), st.floats(min_value=0.0, max_value=10.0), st.floats(min_value=0.0, max_value=10.0))
    def test_disjoint_support_additivity(self, space, a, b):
        """Disjoint supports combine like the scalar p-norm (max for sup)."""
        assume(space.dimension >= 2)
        x = Vector.of(a * np.eye(space.dimension)[0], space)
        y = Vector.of(b * np.eye(space.dimension)[1], space)
        total = norm(space, Vector.of(x.array + y.array, space))
        expected = max(a, b) if space.kind == "sup_norm" else (a**space.p + b**space.p) ** (1 / space.p)
        assert total == pytest.approx(expected, rel=1e-12, abs=1e-12)


class TestNormingFunctional:
    def test_hilbert_case(self):
        space = SpaceDescriptor.lp(2.0, 2)
        f = norming_functional(space, Vector.of([3, 4], space))
        assert f.coeffs == pytest.approx((0.6, 0.8))

    def test_l3(self):
        space = SpaceDescriptor.lp(3.0, 2)
        v = Vector.of([1, 1], space)
        f = norming_functional(space, v)
        assert f.coeffs == pytest.approx((2 ** (-2 / 3), 2 ** (-2 / 3)))
        assert f.evaluate(v) == pytest.approx(2 ** (1 / 3))
        assert f.dual_norm() == pytest.approx(1.0)

    def test_l1_ties_to_zero(self):
        space = SpaceDescriptor.lp(1.0, 3)
        f = norming_functional(space, Vector.of([2, 0, -1], space))
        assert f.coeffs == (1.0, 0.0, -1.0)
        assert f.dual_norm() == 1.0

    def test_sup_picks_lowest_index(self):
        space = SpaceDescriptor.sup(3)
        f = norming_functional(space, Vector.of([-2, 2, 1], space))
        assert f.coeffs == (-1.0, 0.0, 0.0)

    def test_zero_vector_rejected(self):
        space = SpaceDescriptor.lp(2.0, 2)
        with pytest.raises(InputError):
            norming_functional(space, Vector.of([0, 0], space))

    @given(vector_pairs())
    @settings(max_examples=200)
    def test_norms_the_vector(self, case):
        space, v, _ = case
        size = norm(space, v)
        assume(size > 1e-6)
        f = norming_functional(space, v)
        assert f.evaluate(v) == pytest.approx(size, rel=1e-9)
        assert f.dual_norm() == pytest.approx(1.0, rel=1e-9)


class TestSampleBody:
    def test_box_membership_and_determinism(self):
        body = ConvexBody.interval(0.0, 3.0)
        first = sample_body(body, 4, 7)
        assert len(first) == 4
        assert all(0.0 <= v.coords[0] <= 3.0 for v in first)
        assert sample_body(body, 4, 7) == first

    def test_ball_membership(self):
        space = SpaceDescriptor.lp(2.0, 2)
        body = ConvexBody.ball((0.0, 0.0), 1.0, space)
        points = sample_body(body, 100, 1)
        assert all(norm(space, v) <= 1.0 + 1e-12 for v in points)

    @pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
    def test_lp_ball_membership(self, p):
        space = SpaceDescriptor.lp(p, 3)
        body = ConvexBody.ball((1.0, 0.0, -1.0), 2.0, space)
        assert all(contains(body, v) for v in sample_body(body, 200, 3))

    def test_hull_membership(self):
        space = SpaceDescriptor.lp(2.0, 2)
        body = ConvexBody.hull([(0, 0), (1, 0), (0, 1)], space)
        assert all(contains(body, v) for v in sample_body(body, 50, 5))

    def test_seeds_differ(self):
        body = ConvexBody.interval(0.0, 1.0)
        assert sample_body(body, 10, 1) != sample_body(body, 10, 2)

    def test_nonpositive_count(self):
        with pytest.raises(InputError):
            sample_body(ConvexBody.interval(0.0, 1.0), 0, 0)


class TestDiameter:
    def test_examples(self):
        line = SpaceDescriptor.lp(2.0, 1)
        assert diameter([Vector.of([0], line), Vector.of([3], line)]) == pytest.approx(3.0)
        space = SpaceDescriptor.lp(2.0, 3)
        points = [unit(0, space), unit(1, space), Vector.of([0, 0, 0], space)]
        assert diameter(points) == pytest.approx(math.sqrt(2.0))
        assert diameter([unit(0, space)]) == 0.0

    def test_empty(self):
        with pytest.raises(InputError):
            diameter([])

    def test_body_diameter(self):
        assert body_diameter(ConvexBody.interval(0.0, 3.0)) == 3.0
        space = SpaceDescriptor.sup(2)
        assert body_diameter(ConvexBody.box((0, 0), (1, 2), space)) == 2.0
        assert body_diameter(ConvexBody.ball((0, 0), 1.0, SpaceDescriptor.lp(2.0, 2))) == 2.0

    @given(st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=20))
    def test_line_diameter_is_spread(self, values):
        line = SpaceDescriptor.lp(2.0, 1)
        points = [Vector.of([v], line) for v in values]
        assert diameter(points) == pytest.approx(max(values) - min(values), abs=1e-12)


class TestGridPoints:
    def test_endpoints_exact(self):
        grid = grid_points(ConvexBody.interval(0.0, 3.0), 0.01)
        coords = [v.coords[0] for v in grid]
        assert coords[0] == 0.0 and coords[-1] == 3.0
        assert len(coords) == 301

    def test_ball_grid_inside(self):
        space = SpaceDescriptor.lp(2.0, 2)
        body = ConvexBody.ball((0.0, 0.0), 1.0, space)
        assert all(norm(space, v) <= 1.0 + 1e-9 for v in grid_points(body, 0.1))

    def test_oversized_grid_rejected(self):
        body = ConvexBody.ball((0.0, 0.0), 1.0, SpaceDescriptor.lp(2.0, 2))
        with pytest.raises(InputError, match=str(MAX_GRID_POINTS)):
            grid_points(body, 0.005)

    def test_fine_one_dimensional_grid_allowed(self):
        assert len(grid_points(ConvexBody.interval(-1.0, 1.0), 0.005)) == 401


class TestAsymptoticRadius:
    def test_orthonormal_tail(self):
        space = SpaceDescriptor.lp(2.0, 12)
        tail = [unit(i, space) for i in range(10)]
        origin = Vector.of(np.zeros(12), space)
        radius, center = asymptotic_radius(tail, [origin, unit(0, space)], 5)
        assert radius == pytest.approx(1.0)
        assert center == origin

    def test_constant_tail(self):
        line = SpaceDescriptor.lp(2.0, 1)
        c = Vector.of([0.7], line)
        radius, _ = asymptotic_radius([c] * 6, [c], 3)
        assert radius == 0.0

    def test_harmonic_tail(self):
        line = SpaceDescriptor.lp(2.0, 1)
        tail = [Vector.of([1.0 / n], line) for n in range(1, 11)]
        zero, one = Vector.of([0.0], line), Vector.of([1.0], line)
        radius, center = asymptotic_radius(tail, [zero, one], 3)
        assert radius <= 1.0 / 8.0
        assert center == zero

    def test_window_too_long(self):
        line = SpaceDescriptor.lp(2.0, 1)
        tail = [Vector.of([0.0], line)] * 3
        with pytest.raises(InputError):
            asymptotic_radius(tail, tail, 4)
