"""Radial solvers: shooting vs Rayleigh oracle, plateau profile, defect, annuli."""

import json
import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import jv, jvp

from rosseig import (
    RadialProfile,
    Space,
    monotonicity_defect,
    parse_space,
    plateau_extension,
    solve_annulus,
    solve_ball,
    solve_ball_rayleigh,
)
from rosseig.radial import euclidean_ball_constant

PI = math.pi

# mu1 * R^2 for the flat unit disk, frozen from the finite-difference Rayleigh
# oracle at N=4000 (and equal to the square of the first zero of J_1')
FLAT_DISK_CONSTANT = 3.390


def bessel_flat_constant(m: int) -> float:
    """Independent flat-ball constant: first root of the Neumann condition for
    g = r^(1-m/2) J_{m/2}(beta r) at r=1."""

    def cond(b):
        return (1.0 - m / 2.0) * jv(m / 2.0, b) + b * jvp(m / 2.0, b)

    xs = np.linspace(0.3, 10.0, 400)
    vals = [cond(x) for x in xs]
    for i in range(len(xs) - 1):
        if vals[i] * vals[i + 1] < 0:
            return brentq(cond, xs[i], xs[i + 1]) ** 2
    raise AssertionError("no bracket for the flat constant")


class TestFlatConstant:
    @pytest.mark.parametrize("m", [2, 3, 5, 8, 16])
    def test_matches_bessel_condition(self, m):
        assert euclidean_ball_constant(m) == pytest.approx(bessel_flat_constant(m),
                                                           rel=1e-9)


class TestSolveBall:
    def test_euclidean_limit_disk(self):
        # small hyperbolic disk behaves like the flat disk
        oracle = solve_ball_rayleigh(Space(1, 2, False), 0.05, 4000)
        assert oracle.mu1 * 0.05**2 == pytest.approx(FLAT_DISK_CONSTANT, abs=0.01)
        shoot = solve_ball(Space(1, 2, False), 0.05)
        assert shoot.mu1 == pytest.approx(oracle.mu1, rel=1e-5)

    def test_cp2_lower_bound(self):
        b = solve_ball(Space(2, 2, True), PI / 4)
        assert b.mu1 >= 2 * (4 + 2) - 1e-6

    @pytest.mark.parametrize("name", ["K2_n1_c", "K1_n4_nc", "K4_n1_c"])
    def test_tiny_radius_euclidean_limit(self, name):
        space = parse_space(name)
        b = solve_ball(space, 1e-3)
        C = euclidean_ball_constant(space.real_dim)
        assert b.mu1 * 1e-6 == pytest.approx(C, rel=0.02)

    def test_profile_normalization_and_structure(self):
        b = solve_ball(Space(1, 3, False), 1.0)
        g = b.profile
        assert g.values[0] == 0.0
        assert g.dvalues[0] == pytest.approx(1.0, rel=1e-12)
        assert np.all(g.values[1:] > 0.0)           # g > 0 on (0, R]
        assert np.all(g.dvalues[:-1] > 0.0)         # g' > 0 on [0, R)
        assert abs(g.dvalues[-1]) < b.tol * np.max(np.abs(g.dvalues))

    def test_monotone_in_radius(self):
        space = Space(1, 3, False)
        mus = [solve_ball(space, R).mu1 for R in (0.4, 0.8, 1.2, 1.6)]
        assert all(a > b for a, b in zip(mus, mus[1:]))

    def test_compact_radius_gate(self):
        with pytest.raises(ValueError, match="radius constraint violated"):
            solve_ball(Space(2, 2, True), 0.9)

    def test_tol_range(self):
        with pytest.raises(ValueError):
            solve_ball(Space(1, 2, False), 0.5, tol=1e-3)

    def test_json_fields(self, tmp_path):
        b = solve_ball(Space(1, 3, False), 1.0)
        path = tmp_path / "ball.json"
        b.to_json(path)
        data = json.loads(path.read_text())
        assert set(data) == {"space", "R", "mu1", "solver", "tol", "grid_size"}
        assert data["solver"] == "shooting"
        assert data["space"] == "K1_n3_nc"


class TestRayleighOracle:
    def test_agreement_bound(self):
        # |mu_shoot - mu_fd| / mu <= 5 * (R/N)^2 * 100 for H^3, R = 1
        space = Space(1, 3, False)
        R = 1.0
        b = solve_ball(space, R, tol=1e-11)
        for N in (500, 1000, 2000):
            fd = solve_ball_rayleigh(space, R, N)
            assert abs(b.mu1 - fd.mu1) / b.mu1 <= 5 * (R / N) ** 2 * 100

    def test_cross_oracle_compact(self):
        b = solve_ball(Space(2, 1, True), PI / 4, tol=1e-10)
        fd = solve_ball_rayleigh(Space(2, 1, True), PI / 4, 2000)
        assert abs(b.mu1 - fd.mu1) / b.mu1 < 1e-5

    def test_convergence_order_and_extrapolation(self):
        space = Space(1, 3, False)
        b = solve_ball(space, 1.0, tol=1e-11)
        mus = [solve_ball_rayleigh(space, 1.0, N).mu1 for N in (500, 1000, 2000)]
        errs = [abs(m - b.mu1) for m in mus]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(1.8 <= o <= 2.2 for o in orders)
        extrapolated = mus[2] + (mus[2] - mus[1]) / 3.0
        assert abs(extrapolated - b.mu1) / b.mu1 < 1e-6

    def test_first_eigenvector_positive(self):
        fd = solve_ball_rayleigh(Space(2, 2, True), 0.5, 400)
        assert np.all(fd.profile.values[1:] > 0.0)

    def test_grid_size_gate(self):
        with pytest.raises(ValueError):
            solve_ball_rayleigh(Space(1, 2, False), 0.5, 50)


class TestPlateau:
    def test_plateau_values(self):
        b = solve_ball(Space(1, 2, False), 0.8)
        G = plateau_extension(b)
        gR = b.profile.values[-1]
        assert G(b.R + 1.0) == pytest.approx(gR, rel=1e-14)
        assert G(0.0) == 0.0
        assert G(b.R) == pytest.approx(gR, rel=1e-14)
        # clamped far beyond the stored grid
        assert G(50.0) == pytest.approx(gR, rel=1e-14)
        assert G.deriv(b.R + 0.5) == 0.0

    def test_monotone_nondecreasing(self):
        b = solve_ball(Space(2, 2, True), 0.6)
        G = plateau_extension(b)
        r = np.linspace(0.0, G.grid[-1], 2000)
        vals = np.asarray(G(r))
        assert np.all(np.diff(vals) >= -1e-12 * vals.max())


class TestDefect:
    def test_vanishes_at_origin(self):
        b = solve_ball(Space(2, 2, True), 0.6)
        s = monotonicity_defect(b)
        scale = np.max(np.abs(b.profile.dvalues))
        assert abs(s.values[0]) < 1e-4 * scale  # s ~ O(r^2) near 0

    def test_compact_terminal_value(self):
        b = solve_ball(Space(2, 2, True), 0.6)
        s = monotonicity_defect(b)
        gR = b.profile.values[-1]
        expect = -2.0 / math.tan(2.0 * 0.6) * gR
        assert s.values[-1] == pytest.approx(expect, rel=1e-8)
        assert s.values[-1] < 0.0

    def test_noncompact_terminal_value(self):
        b = solve_ball(Space(1, 3, False), 1.2)
        s = monotonicity_defect(b)
        expect = -b.profile.values[-1] / math.tanh(1.2)
        assert s.values[-1] == pytest.approx(expect, rel=1e-8)

    def test_max_nonpositive_cp2(self):
        b = solve_ball(Space(2, 2, True), 0.6)
        s = monotonicity_defect(b)
        assert s.max_point()[0] <= 1e-10 * np.max(np.abs(b.profile.dvalues))


class TestAnnulus:
    def test_ordering_and_positivity(self):
        am = solve_annulus(Space(1, 3, False), 0.5, 1.5)
        eigs = am.eigenvalues()
        assert all(e > 0 for e in eigs)
        assert eigs == sorted(eigs)
        assert len(eigs) == 4

    def test_neumann_end_conditions(self):
        am = solve_annulus(Space(1, 3, False), 0.5, 1.5, count=2)
        for mode in am.modes:
            dv = mode.profile.dvalues
            scale = np.max(np.abs(dv))
            assert abs(dv[0]) <= 1e-9 * max(scale, 1.0)
            assert abs(dv[-1]) <= 1e-7 * max(scale, 1.0)

    def test_degenerate_annulus_matches_ball(self):
        space = Space(1, 3, False)
        r_out = 1.5
        am = solve_annulus(space, r_out / 100.0, r_out, modes=(1,), count=1)
        ball = solve_ball(space, r_out)
        assert am.modes[0].eigenvalue == pytest.approx(ball.mu1, rel=0.01)

    def test_compact_annulus(self):
        am = solve_annulus(Space(2, 1, True), 0.2, 0.7, count=2)
        assert all(e > 0 for e in am.eigenvalues())
        with pytest.raises(ValueError, match="radius constraint violated"):
            solve_annulus(Space(2, 1, True), 0.2, 1.0)

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            solve_annulus(Space(1, 3, False), 0.5, 1.5, modes=(0, 2))
        with pytest.raises(ValueError):
            solve_annulus(Space(1, 3, False), 1.5, 0.5)


class TestProfileIO:
    def test_csv_roundtrip(self, tmp_path):
        b = solve_ball(Space(1, 2, False), 0.7)
        path = tmp_path / "g.csv"
        b.profile.to_csv(path)
        back = RadialProfile.from_csv(path)
        assert np.allclose(back.grid, b.profile.grid, rtol=0, atol=0)
        assert np.allclose(back.values, b.profile.values, rtol=0, atol=0)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            RadialProfile(grid=[0.0, 1.0, 0.5], values=[0, 1, 2], meaning="x")
        with pytest.raises(ValueError):
            RadialProfile(grid=[0.0, 1.0], values=[0.0, math.inf], meaning="x")
