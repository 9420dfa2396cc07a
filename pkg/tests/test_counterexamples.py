"""Tests for the arctan family and the Cantor stress diagnostics."""

import numpy as np
import pytest

from quclab.cantorfn import CantorProfile
from quclab import counterexamples as ce
from quclab.errors import InputError


@pytest.fixture
def half_plane_points(rng):
    return np.stack([rng.uniform(1.1, 1.9, 300), rng.uniform(-0.4, 0.4, 300)], axis=1)


class TestArctan:
    def test_gradient_closed_form(self, half_plane_points):
        z = half_plane_points
        du = ce.arctan_gradient(z)
        # finite-difference oracle on arctan(y/x)
        h = 1e-7
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1.0
            fd = (ce.arctan_value(z + h * e) - ce.arctan_value(z - h * e)) / (2 * h)
            assert np.allclose(du[:, j], fd, atol=1e-7)

    def test_hessian_closed_form(self, half_plane_points):
        z = half_plane_points
        d2u = ce.arctan_hessian(z)
        h = 1e-5
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1.0
            fd = (ce.arctan_gradient(z + h * e) - ce.arctan_gradient(z - h * e)) / (2 * h)
            assert np.allclose(d2u[:, :, j], fd, atol=1e-6)

    def test_ball_domain_validated(self):
        with pytest.raises(InputError):
            ce.ArctanSolution(ball_center=(0.3, 0.0), ball_radius=0.4)
        sol = ce.ArctanSolution(ball_center=(1.5, 0.0), ball_radius=0.4)
        assert sol.ball_radius == 0.4


class TestTraceCheck:
    def test_harmonic_case(self):
        z = np.array([[1.0, 0.3]])
        tr = ce.trace_check_radial(lambda t: t, lambda t: np.ones_like(t), z)
        assert tr < 1e-14

    def test_quartic_random_points(self, half_plane_points):
        tr = ce.trace_check_radial(lambda t: t ** 3, lambda t: 3 * t ** 2,
                                   half_plane_points)
        assert tr < 1e-12

    def test_smoothed_cantor_fd_second_derivative(self, half_plane_points):
        prof = CantorProfile(8)
        fp = lambda t: t + prof.h(t)
        tr = ce.trace_check_radial(fp, ce.fd_second_derivative(fp), half_plane_points)
        assert tr < 1e-10

    def test_random_smooth_profiles(self, rng, half_plane_points):
        # the zero trace is structural: any radial C^2 profile works
        for _ in range(5):
            a, b = rng.uniform(0.2, 2.0, 2)
            fp = lambda t: a * t + b * t ** 3
            fs = lambda t: a + 3 * b * t ** 2
            assert ce.trace_check_radial(fp, fs, half_plane_points) < 1e-12

    def test_half_plane_enforced(self):
        with pytest.raises(InputError):
            ce.trace_check_radial(lambda t: t, lambda t: np.ones_like(t),
                                  np.array([[-1.0, 0.2]]))


class TestCantorStress:
    def test_point_on_unit_circle(self):
        # coefficient 1/|z| + h(1/|z|) = 1 + h(1) = 2 at z = (1, 0)
        v = ce.cantor_stress(np.array([1.0, 0.0]), 8)
        assert np.allclose(v, [0.0, 2.0], atol=1e-12)

    def test_point_at_radius_two(self):
        # coefficient 1/2 + h(1/2) = 1: V = (0, 1).  (Plugging into
        # F'(t) = t + h(t): |Du| = 1/2, unit direction z_perp/|z|.)
        v = ce.cantor_stress(np.array([2.0, 0.0]), 8)
        assert np.allclose(v, [0.0, 1.0], atol=1e-12)

    def test_decay_along_axis(self):
        radii = np.array([5.0, 50.0, 500.0, 5000.0])
        pts = np.stack([radii, np.zeros_like(radii)], axis=1)
        mags = np.linalg.norm(ce.cantor_stress(pts, 8), axis=1)
        assert np.all(np.diff(mags) < 0.0)
        assert mags[-1] < 1e-2

    def test_left_half_plane_rejected(self):
        with pytest.raises(InputError):
            ce.cantor_stress(np.array([-1.0, 0.0]), 6)

    def test_tangential_structure(self, half_plane_points):
        v = ce.cantor_stress(half_plane_points, 10)
        radial_component = np.sum(v * half_plane_points, axis=1)
        assert np.max(np.abs(radial_component)) < 1e-12


class TestWeakDivergence:
    def test_harmonic_stream_exact(self):
        res = ce.weak_divergence_residual(ce.smooth_control_field, n_bumps=8, seed=3)
        assert res < 1e-9

    def test_cantor_level12_below_threshold(self):
        res = ce.weak_divergence_residual(ce.cantor_stress_field(12),
                                          n_bumps=8, seed=3)
        assert res <= 1e-3

    def test_quadrature_refinement_decreases_residual(self):
        field = ce.cantor_stress_field(8)
        coarse = ce.weak_divergence_residual(field, n_bumps=4, seed=5,
                                             max_depth=3, tol_cell=1e-6)
        fine = ce.weak_divergence_residual(field, n_bumps=4, seed=5,
                                           max_depth=9, tol_cell=1e-12)
        assert fine < coarse

    def test_divergent_field_flagged(self):
        # V = x has weak divergence 2: the residual stays away from zero
        res = ce.weak_divergence_residual(lambda z: np.asarray(z, float),
                                          n_bumps=8, seed=3)
        assert res > 1e-2


@pytest.fixture(scope="module")
def table():
    return ce.sobolev_blowup_diagnostic(range(3, 9), n_grid=384)


class TestBlowupDiagnostic:
    def test_control_column_constant(self, table):
        vals = {row.control_w11 for row in table}
        assert len(vals) == 1

    def test_w11_saturates_at_total_variation(self, table):
        # monotone h_L(1/r) telescopes along rays: the W^{1,1} quotient is
        # bounded uniformly in the level (it cannot witness the Cantor part)
        w11 = np.array([row.w11_quotient for row in table])
        assert w11.max() / w11.min() < 1.1
        assert np.all(w11 > table[0].control_w11)

    def test_sup_quotient_grows_while_resolved(self, table):
        # the max slope (3/2)^L is visible while the grid step resolves the
        # level-L ramps (ramp width 3^-L above ~2 grid steps), then saturates
        sup = np.array([row.sup_quotient for row in table])
        assert sup[2] > sup[0]
        delta = 2.0 * 0.4 / 384
        for i, row in enumerate(table):
            if 3.0 ** -row.level >= 2.0 * delta:
                ratio = sup[i] / 1.5 ** row.level
                assert 0.5 <= ratio <= 1.3, f"level {row.level}: ratio {ratio}"

    def test_l15_quotient_exceeds_smooth_baseline(self, table):
        rows_l15 = np.array([row.l15_quotient for row in table])
        assert np.all(np.diff(rows_l15[:3]) > 0.0)  # grows in the resolved regime

    def test_levels_must_increase(self):
        with pytest.raises(InputError):
            ce.sobolev_blowup_diagnostic([4, 4, 5])
