"""Closed-form geometry: densities, curvature traces, mode constants, volumes."""

import math

import numpy as np
import pytest

from rosseig import (
    Space,
    ball_volume,
    curvature_trace,
    curvature_trace_deriv,
    density,
    gradient_bound,
    gradient_sum,
    mode_constants,
    parse_space,
    radius_from_volume,
    sphere_area,
    standard_spaces,
)

PI = math.pi


class TestSpace:
    def test_parse_roundtrip(self):
        for name in ("K1_n2_nc", "K2_n2_c", "K8_n2_c", "K4_n1_nc"):
            assert parse_space(name).name == name

    @pytest.mark.parametrize("bad", ["K3_n2_c", "K8_n3_c", "K1_n1_c", "foo", "K2_n2_x"])
    def test_invalid_spaces_rejected(self, bad):
        with pytest.raises(ValueError):
            parse_space(bad)

    def test_real_dim(self):
        assert Space(2, 2, True).real_dim == 4
        assert Space(8, 2, False).real_dim == 16

    def test_standard_family(self):
        fam = standard_spaces()
        assert len(fam) == 28  # 14 (k,n) pairs, both types
        assert all(s.real_dim <= 16 for s in fam)
        assert len(standard_spaces(compact=True)) == 14


class TestDensity:
    def test_cp1_midpoint(self):
        # sin(pi/4) cos(pi/4) = 1/2
        assert density(Space(2, 1, True), PI / 4) == pytest.approx(0.5, abs=1e-15)

    def test_round_sphere_limit(self):
        # k=1, m=2: J -> sin(pi/2) = 1 approaching the equator
        assert density(Space(1, 2, True), PI / 2 - 1e-9) == pytest.approx(1.0, abs=1e-9)

    def test_hyperbolic_three_space(self):
        assert density(Space(1, 3, False), 1.0) == pytest.approx(math.sinh(1.0) ** 2,
                                                                 rel=1e-15)

    def test_domain_violation_names_radius(self):
        with pytest.raises(ValueError, match="1.7"):
            density(Space(2, 1, True), 1.7)
        with pytest.raises(ValueError, match="-0.5"):
            density(Space(1, 3, False), -0.5)

    def test_positive_on_grid(self):
        for space in standard_spaces():
            hi = PI / 2 - 1e-6 if space.compact else 25.0
            r = np.linspace(1e-6, hi, 400)
            assert np.all(density(space, r) > 0.0)


class TestCurvatureTrace:
    def test_sphere_cot(self):
        assert curvature_trace(Space(1, 2, True), PI / 4) == pytest.approx(1.0,
                                                                           rel=1e-14)

    def test_cp2_sphere_eigenvalue(self):
        # -H'(pi/4) = 3/sin^2 + 1/cos^2 = 8 for k=2, m=4
        val = -curvature_trace_deriv(Space(2, 2, True), PI / 4)
        assert val == pytest.approx(8.0, rel=1e-13)

    @pytest.mark.parametrize("space", standard_spaces(), ids=str)
    def test_small_radius_leading_order(self, space):
        r = 1e-6
        assert curvature_trace(space, r) * r == pytest.approx(space.real_dim - 1,
                                                              rel=1e-9)

    @pytest.mark.parametrize("space", standard_spaces(), ids=str)
    def test_matches_log_density_derivative(self, space):
        hi = PI / 2 - 1e-2 if space.compact else 10.0
        r = np.linspace(1e-2, hi, 300)
        dr = 1e-6
        fd = (np.log(density(space, r + dr)) - np.log(density(space, r - dr))) / (2 * dr)
        H = curvature_trace(space, r)
        assert np.max(np.abs(fd - H) / np.maximum(np.abs(H), 1.0)) < 1e-8


class TestModeConstants:
    def test_k1(self):
        mc = mode_constants(Space(1, 5, False))
        assert (mc.l, mc.p) == (4, 4)

    def test_k2_n2(self):
        mc = mode_constants(Space(2, 2, True))
        assert (mc.l, mc.p) == (1, 2)  # floor(3/2), 2(2-1)

    def test_k_equals_m(self):
        mc = mode_constants(Space(2, 1, True))
        assert (mc.l, mc.p) == (1, 1)

    def test_case_table_brute_force(self):
        # independent re-evaluation of the case analysis for every m <= 16
        for space in standard_spaces():
            m, k, n = space.real_dim, space.field_dim, space.quat_dim
            mc = mode_constants(space)
            l_ref = m - 1 if (k == 1 or k == m) else math.floor((m - k + 1) / 2)
            p_ref = (m - 1) if k == m else k * (n - 1)
            assert (mc.l, mc.p) == (l_ref, p_ref)
            assert 1 <= mc.l <= m - 1
            assert 1 <= mc.p <= m - 1
            if k == 1:
                assert mc.l == mc.p == m - 1


class TestGradientSum:
    def test_cp2_value(self):
        assert gradient_sum(Space(2, 2, True), PI / 4) == pytest.approx(8.0, rel=1e-13)

    def test_hyperbolic_value(self):
        val = gradient_sum(Space(1, 3, False), 1.0)
        assert val == pytest.approx(2.0 / math.sinh(1.0) ** 2, rel=1e-13)

    @pytest.mark.parametrize("space", standard_spaces(), ids=str)
    def test_identity_on_grid(self, space):
        hi = PI / 2 - 1e-3 if space.compact else 20.0
        r = np.linspace(1e-3, hi, 1000)
        gs = gradient_sum(space, r)
        hp = curvature_trace_deriv(space, r)
        assert np.max(np.abs(gs + hp) / np.abs(hp)) <= 1e-12


class TestGradientBound:
    def test_cp2_bound(self):
        space = Space(2, 2, True)
        gb = gradient_bound(space, PI / 4)
        assert gb == pytest.approx(4.0, rel=1e-13)
        assert gb <= -curvature_trace_deriv(space, PI / 4) / mode_constants(space).l

    def test_hyperbolic_plane_equality(self):
        space = Space(1, 2, False)
        gb = gradient_bound(space, 1.0)
        assert gb == pytest.approx(-curvature_trace_deriv(space, 1.0), rel=1e-14)

    def test_quaternionic_case(self):
        # both sides evaluated numerically
        space = Space(4, 2, False)
        lhs = gradient_bound(space, 2.0)
        rhs = -curvature_trace_deriv(space, 2.0) / mode_constants(space).p
        assert lhs == pytest.approx(1.0 / math.sinh(2.0) ** 2, rel=1e-13)
        assert lhs <= rhs

    def test_compact_domain_restriction(self):
        with pytest.raises(ValueError):
            gradient_bound(Space(2, 1, True), 1.0)  # beyond pi/4

    @pytest.mark.parametrize("space", standard_spaces(), ids=str)
    def test_bound_closure(self, space):
        mc = mode_constants(space)
        if space.compact:
            r = np.linspace(1e-3, PI / 4, 800)
            mult = mc.l
        else:
            r = np.linspace(1e-3, 20.0, 800)
            mult = mc.p
        nhp = -curvature_trace_deriv(space, r)
        worst = np.max((mult * gradient_bound(space, r) - nhp) / nhp)
        assert worst <= 1e-12


class TestVolume:
    def test_sphere_areas(self):
        assert sphere_area(2) == pytest.approx(2 * PI, rel=1e-15)
        assert sphere_area(3) == pytest.approx(4 * PI, rel=1e-15)

    def test_hyperbolic_plane_closed_form(self):
        space = Space(1, 2, False)
        for R in (0.3, 0.7, 1.5):
            assert ball_volume(space, R) == pytest.approx(
                2 * PI * (math.cosh(R) - 1), rel=1e-11)

    def test_cp1_quarter_ball(self):
        assert ball_volume(Space(2, 1, True), PI / 4) == pytest.approx(PI / 2,
                                                                       rel=1e-11)

    def test_roundtrip(self):
        space = Space(1, 2, False)
        V = ball_volume(space, 0.7)
        assert radius_from_volume(space, V) == pytest.approx(0.7, rel=1e-10)

    @pytest.mark.parametrize("space", [Space(2, 2, True), Space(4, 1, False)], ids=str)
    def test_roundtrip_more_spaces(self, space):
        R = 0.5
        assert radius_from_volume(space, ball_volume(space, R)) == pytest.approx(
            R, rel=1e-10)

    def test_compact_volume_cap(self):
        space = Space(2, 1, True)
        too_big = 1.01 * ball_volume(space, PI / 4)
        with pytest.raises(ValueError, match="radius constraint violated"):
            radius_from_volume(space, too_big)

    def test_nonpositive_volume(self):
        with pytest.raises(ValueError):
            radius_from_volume(Space(1, 2, False), 0.0)
