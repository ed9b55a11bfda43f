from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lab.errors import InputError, PreconditionError
from lab.iteration import (
    MAX_EXACT_M,
    afps_extract,
    ar_bound,
    averaged_map,
    check_ar_soundness,
    orbit,
    residual_at,
    verify_identity3,
    verify_residual_monotonicity,
)
from lab.mappings import (
    apply,
    check_condition_C_lambda,
    check_condition_L_witness,
    check_nonexpansive,
    get_map,
    half,
    identity,
    interval_threshold,
    negation,
    threshold_family,
)
from lab.models import SpaceDescriptor, Vector
from lab.space import grid_points, sample_body

LINE = SpaceDescriptor.lp(2.0, 1)
gammas = st.floats(min_value=0.05, max_value=0.95)


def point(x: float) -> Vector:
    return Vector.of([x], LINE)


def attest(mapping, lam=0.5, step=0.005):
    return check_condition_C_lambda(mapping, lam, grid_points(mapping.body, step), step)


class TestAveragedMap:
    def test_identity_stays_identity(self):
        assert apply(averaged_map(identity(), 0.3), point(0.4)).coords[0] == pytest.approx(0.4)

    def test_negation_midpoint_is_zero(self):
        assert apply(averaged_map(negation(), 0.5), point(0.7)).coords[0] == 0.0

    def test_interval_threshold(self):
        assert apply(averaged_map(interval_threshold(), 0.5), point(2.0)).coords[0] == 1.0

    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.5, 1.5])
    def test_gamma_out_of_range(self, gamma):
        with pytest.raises(InputError):
            averaged_map(half(), gamma)

    @given(gammas, st.floats(min_value=0.0, max_value=3.0))
    def test_displacement_identity(self, gamma, x):
        """T_gamma x - x = gamma (T x - x)."""
        mapping = interval_threshold()
        averaged = apply(averaged_map(mapping, gamma), point(x)).coords[0]
        image = apply(mapping, point(x)).coords[0]
        assert averaged - x == pytest.approx(gamma * (image - x), abs=1e-12)


class TestOrbit:
    def test_contraction(self):
        trace = orbit(half(), 0.5, point(1.0), 3)
        assert trace.iterates[:, 0].tolist() == [1.0, 0.75, 0.5625, 0.421875]
        assert trace.residuals.tolist() == [0.25, 0.1875, 0.140625]
        assert trace.t_residuals.shape == (4,)

    def test_fixed_point_is_constant(self):
        trace = orbit(identity(), 0.5, point(0.3), 5)
        assert np.all(trace.iterates == 0.3)
        assert np.all(trace.residuals == 0.0)

    def test_interval_threshold(self):
        trace = orbit(interval_threshold(), 0.5, point(3.0), 2)
        assert trace.iterates[:, 0].tolist() == [3.0, 2.0, 1.0]

    def test_residuals_are_gamma_times_displacement(self):
        trace = orbit(get_map("rotation"), 0.3, Vector.of([0.5, 0.5], SpaceDescriptor.lp(2.0, 2)), 30)
        assert np.allclose(trace.residuals, 0.3 * trace.t_residuals[:-1], atol=1e-12)

    def test_trace_is_read_only(self):
        trace = orbit(half(), 0.5, point(1.0), 3)
        with pytest.raises(ValueError):
            trace.iterates[0, 0] = 5.0

    def test_deterministic(self):
        first = orbit(interval_threshold(), 0.7, point(3.0), 40)
        second = orbit(interval_threshold(), 0.7, point(3.0), 40)
        assert np.array_equal(first.iterates, second.iterates)

    def test_invalid_inputs(self):
        with pytest.raises(InputError):
            orbit(half(), 0.5, point(2.0), 3)
        with pytest.raises(InputError):
            orbit(half(), 0.5, point(0.5), 0)
        with pytest.raises(InputError):
            orbit(half(), 1.0, point(0.5), 3)


class TestResidualMonotonicity:
    def test_contraction(self):
        trace = orbit(half(), 0.5, point(1.0), 3)
        report = verify_residual_monotonicity(trace, attest(half(), step=0.01))
        assert report.monotone
        assert report.checked == 2

    def test_constant_trace(self):
        mapping = identity()
        trace = orbit(mapping, 0.5, point(0.3), 5)
        report = verify_residual_monotonicity(trace, check_nonexpansive(mapping, grid_points(mapping.body, 0.1)))
        assert report.monotone
        assert report.attested_lambda == 0.0

    def test_interval_threshold(self):
        mapping = interval_threshold()
        trace = orbit(mapping, 0.5, point(3.0), 4)
        assert trace.residuals.tolist() == [1.0, 1.0, 0.5, 0.25]
        assert verify_residual_monotonicity(trace, attest(mapping)).monotone

    def test_violated_report_is_refused(self):
        mapping = interval_threshold()
        trace = orbit(mapping, 0.5, point(3.0), 4)
        with pytest.raises(PreconditionError):
            verify_residual_monotonicity(trace, check_nonexpansive(mapping, grid_points(mapping.body, 0.01)))

    def test_lambda_above_gamma_is_refused(self):
        mapping = interval_threshold()
        trace = orbit(mapping, 0.5, point(3.0), 4)
        with pytest.raises(PreconditionError):
            verify_residual_monotonicity(trace, attest(mapping, lam=0.75, step=0.01))

    def test_other_map_is_refused(self):
        trace = orbit(interval_threshold(), 0.5, point(3.0), 4)
        with pytest.raises(PreconditionError):
            verify_residual_monotonicity(trace, attest(half(), step=0.01))

    def test_uncovered_orbit_is_refused(self):
        mapping = interval_threshold()
        trace = orbit(mapping, 0.5, point(3.0), 4)
        partial = check_condition_C_lambda(mapping, 0.5, [point(k / 100) for k in range(101)])
        assert partial.verdict == "no_violation_found"
        with pytest.raises(PreconditionError):
            verify_residual_monotonicity(trace, partial)

    def test_witness_report_is_refused(self):
        mapping = half()
        trace = orbit(mapping, 0.5, point(1.0), 3)
        witness = check_condition_L_witness(mapping, [point(0.0)], [point(0.5)], 1)
        with pytest.raises(PreconditionError):
            verify_residual_monotonicity(trace, witness)


class TestIdentity3:
    def test_affine_orbit(self):
        trace = orbit(half(), 0.5, point(1.0), 20)
        assert verify_identity3(trace, half()) <= 1e-12

    def test_interval_threshold(self):
        mapping = interval_threshold()
        assert verify_identity3(orbit(mapping, 0.5, point(3.0), 10), mapping) <= 1e-12

    def test_long_contraction_orbit(self):
        assert verify_identity3(orbit(half(), 0.9, point(1.0), 100), half()) <= 1e-10

    def test_mismatched_map(self):
        trace = orbit(half(), 0.5, point(1.0), 5)
        with pytest.raises(InputError):
            verify_identity3(trace, negation())

    @given(st.floats(min_value=0.0, max_value=2.9), gammas, st.floats(min_value=0.0, max_value=3.0))
    @settings(max_examples=50, deadline=None)
    def test_any_threshold_map(self, jump, gamma, x0):
        mapping = threshold_family(jump)
        trace = orbit(mapping, gamma, point(x0), 25)
        assert verify_identity3(trace, mapping) <= 1e-10


class TestARBound:
    def test_known_constants(self):
        assert (ar_bound(0.5, 0.5).M, ar_bound(0.5, 0.5).L, ar_bound(0.5, 0.5).n0) == (5, 64, 321)
        bound = ar_bound(0.25, 0.5)
        assert (bound.M, bound.L, bound.n0) == (9, 1024, 9217)

    def test_delta_above_one(self):
        bound = ar_bound(1.5, 0.5)
        assert bound.n0 == 0
        assert (bound.M, bound.L) == (2, 8)

    @pytest.mark.parametrize("delta, gamma", [(0.5, 0.0), (0.5, 1.0), (0.0, 0.5), (-1.0, 0.5), (float("nan"), 0.5)])
    def test_invalid(self, delta, gamma):
        with pytest.raises(InputError):
            ar_bound(delta, gamma)

    def test_exact_evaluation_limit(self):
        with pytest.raises(InputError):
            ar_bound(2.0 / MAX_EXACT_M / 2.0, 0.5)

    @given(st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=100, deadline=None)
    def test_minimality(self, delta, gamma):
        bound = ar_bound(delta, gamma)
        d, g = Fraction(repr(delta)), Fraction(repr(gamma))
        assert bound.M * d > 2 >= (bound.M - 1) * d
        width = g * (1 - g) ** bound.M
        assert bound.L * width >= 1 > (bound.L - 1) * width
        assert bound.n0 == bound.M * bound.L + 1


class TestAfpsExtract:
    def test_contraction(self):
        trace = orbit(half(), 0.5, point(1.0), 20)
        afps = afps_extract(trace, 0.1)
        expected = [x for x in trace.iterates[:, 0] if abs(x) / 2 <= 0.1]
        assert [v.coords[0] for v in afps] == expected
        assert len(afps) == 15

    def test_large_tolerance_keeps_everything(self):
        trace = orbit(half(), 0.5, point(1.0), 20)
        assert len(afps_extract(trace, 2.0)) == 21

    def test_fixed_point_trace(self):
        trace = orbit(identity(), 0.5, point(0.3), 6)
        assert len(afps_extract(trace, 0.0)) == 7


class TestResidualAt:
    def test_direct(self):
        probe = residual_at(half(), 0.5, point(1.0), 10, 1024)
        assert probe.mode == "direct"
        assert probe.residual == pytest.approx(0.25 * 0.75**10)

    def test_beyond_horizon(self):
        probe = residual_at(half(), 0.5, point(1.0), 5000, 100)
        assert probe.mode == "monotone_bound"
        assert probe.step_reached == 100
        assert probe.residual == pytest.approx(0.25 * 0.75**100)

    def test_fixed_point_stops_early(self):
        probe = residual_at(negation(), 0.5, point(1.0), 50, 1024)
        assert probe.mode == "fixed_point"
        assert probe.step_reached == 1
        assert probe.residual == 0.0

    def test_uncertified_when_residuals_grow(self):
        # a jump close to the end point breaks (C): the residual goes 0.05 -> 1.475
        probe = residual_at(threshold_family(2.9), 0.5, point(3.0), 100, 5)
        assert probe.mode == "uncertified"
        assert not probe.monotone

    def test_direct_records_growing_residuals(self):
        residual = residual_at(threshold_family(2.9), 0.5, point(3.0), 3, 1024)
        assert residual.mode == "direct"
        assert not residual.monotone

    def test_contraction_is_monotone(self):
        assert residual_at(half(), 0.5, point(1.0), 10, 1024).monotone


class TestARSoundness:
    def test_interval_threshold(self):
        mapping = interval_threshold()
        report = check_ar_soundness(mapping, 0.5, 0.5, sample_body(mapping.body, 20, 0))
        assert report.verdict == "pass"
        assert report.n0 == 321
        assert report.threshold == pytest.approx(1.5)
        assert report.worst_residual < report.threshold

    def test_large_n0_uses_monotone_bound(self):
        mapping = half()
        report = check_ar_soundness(mapping, 0.9, 0.1, sample_body(mapping.body, 20, 0), horizon=256)
        assert report.verdict == "pass"
        assert set(report.modes) <= {"monotone_bound", "fixed_point"}

    def test_map_without_condition_c_fails(self):
        mapping = threshold_family(2.9)
        report = check_ar_soundness(mapping, 0.5, 0.1, [point(3.0)], horizon=5)
        assert report.verdict == "fail"
        assert report.failures[0].mode == "uncertified"

    def test_growing_residuals_fail_below_the_horizon(self):
        # n0 = 321 is reached directly and the last residual is tiny
        report = check_ar_soundness(threshold_family(2.9), 0.5, 0.5, [point(3.0)])
        assert report.verdict == "fail"
        assert report.failures[0].mode == "direct"
        assert report.worst_residual < report.threshold
