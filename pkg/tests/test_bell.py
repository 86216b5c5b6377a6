import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavitybell.bell import (
    PAIR_DIMS,
    TSIRELSON_BOUND,
    AngleScheme,
    bell_s,
    bell_s_simplified,
    bell_surface,
    correlation_analytic,
    correlation_expectation,
    observed_bell_with_failures,
    sigma_theta,
    sigma_x,
    sigma_y,
    sigma_z,
)
from cavitybell.core import StateVector
from cavitybell.protocols import RotationSpec, rotation_operator
from conftest import random_unit_state


def pair_state(alpha: complex) -> StateVector:
    rest = np.sqrt(max(1.0 - abs(alpha) ** 2, 0.0))
    amps = np.array(
        [rest, -alpha / np.sqrt(2.0), alpha / np.sqrt(2.0), 0.0], dtype=complex
    )
    return StateVector(PAIR_DIMS, amps)


class TestSigmaTheta:
    def test_axis_cases(self):
        assert np.abs(sigma_theta(0.0).mat - sigma_x().mat).max() < 1e-15
        assert np.abs(sigma_theta(np.pi / 2.0).mat - sigma_y().mat).max() < 1e-12

    def test_eigenvalues(self):
        vals = np.linalg.eigvalsh(sigma_theta(0.7).mat)
        assert vals == pytest.approx([-1.0, 1.0])

    @given(st.floats(-10.0, 10.0))
    @settings(max_examples=100, deadline=None)
    def test_hermitian_involution_traceless(self, theta):
        m = sigma_theta(theta).mat
        assert np.abs(m - m.conj().T).max() < 1e-12
        assert np.abs(m @ m - np.eye(2)).max() < 1e-12
        assert abs(np.trace(m)) < 1e-12

    def test_readout_convention(self):
        # shelving classifies fluorescence as level 0; <sz> = 1 - 2|a0|^2
        a0 = 0.6
        state = np.array([a0, 0.8])
        val = np.vdot(state, sigma_z().mat @ state).real
        assert val == pytest.approx(1.0 - 2.0 * a0**2)


class TestCorrelationExpectation:
    @given(st.floats(0.0, 1.0), st.floats(0.0, 2 * np.pi),
           st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_prepared_family_value(self, mag, phase, t1, t2):
        alpha = mag * np.exp(1j * phase)
        e = correlation_expectation(pair_state(alpha), t1, t2)
        assert e == pytest.approx(-abs(alpha) ** 2 * np.cos(t1 - t2), abs=1e-12)

    def test_product_ground_state(self):
        state = StateVector(PAIR_DIMS, np.array([1.0, 0, 0, 0], dtype=complex))
        for t1, t2 in ((0.0, 0.0), (0.3, 1.2), (2.0, -0.5)):
            assert correlation_expectation(state, t1, t2) == pytest.approx(0.0, abs=1e-15)

    @given(st.integers(0, 10_000), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    @settings(max_examples=40, deadline=None)
    def test_angle_difference_law_without_double_excitation(self, seed, t1, t2):
        rng = np.random.default_rng(seed)
        amps = random_unit_state(rng, 4)
        amps[3] = 0.0
        amps /= np.linalg.norm(amps)
        state = StateVector(PAIR_DIMS, amps)
        lhs = correlation_expectation(state, t1, t2)
        rhs = correlation_expectation(state, t1 - t2, 0.0)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_angle_law_negative_control(self):
        # a doubly excited component breaks the difference-only form
        amps = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
        state = StateVector(PAIR_DIMS, amps)
        lhs = correlation_expectation(state, 0.9, 0.4)
        rhs = correlation_expectation(state, 0.5, 0.0)
        assert abs(lhs - rhs) > 0.1

    def test_unnormalized_rejected(self):
        state = StateVector(PAIR_DIMS, np.array([1.0, 1.0, 0, 0], dtype=complex))
        with pytest.raises(ValueError):
            correlation_expectation(state, 0.0, 0.0)


class TestAnalyticCorrelation:
    def test_values(self):
        assert correlation_analytic(1.0, 0.0) == pytest.approx(-1.0)
        assert correlation_analytic(0.0, 1.3) == 0.0
        assert correlation_analytic(np.sqrt(0.5), np.pi / 2.0) == pytest.approx(0.0, abs=1e-15)


class TestBellStatistic:
    def test_zero(self):
        assert bell_s([0.0, 0.0, 0.0, 0.0]) == 0.0

    def test_classical_corner(self):
        assert bell_s([1.0, 1.0, 1.0, 1.0]) == pytest.approx(2.0)

    def test_quantum_maximum_from_expectations(self):
        scheme = AngleScheme(np.pi / 4.0)
        state = pair_state(1.0)
        es = [correlation_expectation(state, t1, t2) for t1, t2 in scheme.settings()]
        assert bell_s(es) == pytest.approx(TSIRELSON_BOUND, abs=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            bell_s([1.5, 0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            bell_s([0.0, 0.0, 0.0])

    def test_simplified_values(self):
        assert bell_s_simplified(1.0, np.pi / 4.0) == pytest.approx(TSIRELSON_BOUND, abs=1e-12)
        assert bell_s_simplified(0.0, 1.0) == 0.0
        threshold_alpha = 2.0 ** (-0.25)  # |alpha|^2 = 1/sqrt(2)
        assert bell_s_simplified(threshold_alpha, np.pi / 4.0) == pytest.approx(2.0, abs=1e-12)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 2 * np.pi), st.floats(0.0, np.pi))
    @settings(max_examples=60, deadline=None)
    def test_simplified_matches_four_setting_form(self, mag, phase, vartheta):
        alpha = mag * np.exp(1j * phase)
        scheme = AngleScheme(vartheta)
        state = pair_state(alpha)
        es = [correlation_expectation(state, t1, t2) for t1, t2 in scheme.settings()]
        assert bell_s(es) == pytest.approx(bell_s_simplified(alpha, vartheta), abs=1e-12)

    def test_angle_scheme_spread(self):
        scheme = AngleScheme(0.37)
        assert scheme.theta1 - scheme.theta2p == pytest.approx(3 * 0.37)
        assert scheme.theta1 - scheme.theta2 == pytest.approx(0.37)
        assert scheme.theta2 - scheme.theta1p == pytest.approx(0.37)
        assert scheme.theta1p - scheme.theta2p == pytest.approx(0.37)


class TestBellSurface:
    def test_maximum_location_and_bound(self):
        scan = bell_surface()
        area, vartheta, value = scan.max_cell()
        assert area == pytest.approx(np.pi, abs=1e-12)
        assert vartheta == pytest.approx(np.pi / 4.0, abs=1e-12)
        assert value == pytest.approx(TSIRELSON_BOUND, abs=1e-9)
        assert scan.b_s.max() <= TSIRELSON_BOUND + 1e-9

    def test_zero_area_row(self):
        scan = bell_surface(area_points=5, vartheta_points=5)
        assert np.abs(scan.b_s[0]).max() == 0.0

    def test_violation_islands(self):
        scan = bell_surface()
        frac = float(np.mean(scan.b_s > 2.0))
        assert 0.0 < frac < 1.0

    def test_degenerate_grid(self):
        scan = bell_surface(area_points=2, vartheta_points=2)
        assert scan.b_s.shape == (2, 2)

    def test_too_small_grid_rejected(self):
        with pytest.raises(ValueError):
            bell_surface(area_points=1)


class TestFailureModel:
    def test_perfect_preparation(self):
        assert observed_bell_with_failures(1.0, 2.5) == 2.5

    def test_the_71_percent_threshold(self):
        b = observed_bell_with_failures(1.0 / np.sqrt(2.0), TSIRELSON_BOUND)
        assert b == pytest.approx(2.0, abs=1e-12)

    def test_half_success_loses_violation(self):
        b = observed_bell_with_failures(0.5, TSIRELSON_BOUND)
        assert b == pytest.approx(np.sqrt(2.0))
        assert b < 2.0

    def test_range_check(self):
        with pytest.raises(ValueError):
            observed_bell_with_failures(1.5, 2.0)


class TestMeasurementRoutes:
    @given(st.integers(0, 10_000), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_rotate_then_sigma_z_equals_direct(self, seed, t1, t2):
        # operator identity behind the measurement recipe: conjugating the
        # readout observable by the (pi/4, 3pi/2 - theta) rotation gives
        # sigma_theta, so rotate-then-measure equals the direct expectation
        rng = np.random.default_rng(seed)
        state = StateVector(PAIR_DIMS, random_unit_state(rng, 4))
        direct = correlation_expectation(state, t1, t2)
        u1 = rotation_operator(RotationSpec(np.pi / 4.0, 3.0 * np.pi / 2.0 - t1)).mat
        u2 = rotation_operator(RotationSpec(np.pi / 4.0, 3.0 * np.pi / 2.0 - t2)).mat
        rotated = np.kron(u1, u2) @ state.amps
        zz = np.kron(sigma_z().mat, sigma_z().mat)
        routed = float(np.vdot(rotated, zz @ rotated).real)
        assert routed == pytest.approx(direct, abs=1e-12)
