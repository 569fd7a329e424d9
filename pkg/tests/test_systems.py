import numpy as np
import pytest

import clawbench as cb
from clawbench.errors import HyperbolicityError
from clawbench.fields import PiecewiseConstantField
from clawbench.systems import (
    averaged_eigen_monotonicity,
    averaged_matrix,
    eigen_at,
    front_tracking_2x2,
    gradient_eigenvalue,
    hugoniot_curve,
    oriented_eigenvector,
    scan_rarefaction_free_systems,
    solve_riemann_2x2,
)
from clawbench.wavefronts import SHOCK, FrontSnapshot, FrontState, Trajectory


class TestAveragedMatrix:
    def test_coincidence_is_jacobian(self):
        ps = cb.p_system_power(2.0)
        u = np.array([1.2, 0.1])
        am = averaged_matrix(ps, u, u)
        assert np.allclose(am.matrix, ps.jacobian(u), atol=1e-14)

    def test_power_law_entry_and_eigenvalues(self):
        # p(w) = w^-2 between w = 1 and w = 2: the lower-left entry is the
        # difference quotient -3/4 and the eigenvalues are -/+ sqrt(3)/2.
        ps = cb.p_system_power(2.0)
        am = averaged_matrix(ps, np.array([1.0, 0.4]), np.array([2.0, -0.7]))
        assert am.matrix[0, 0] == 0.0 and am.matrix[0, 1] == -1.0
        assert am.matrix[1, 0] == pytest.approx(-0.75, abs=1e-13)
        assert am.eigenvalues == pytest.approx([-np.sqrt(3) / 2, np.sqrt(3) / 2],
                                               abs=1e-13)

    def test_linear_pressure(self):
        lin = cb.p_system(lambda w: -w, lambda w: -1.0 + 0.0 * w,
                          ((0.1, -2.0), (3.0, 2.0)))
        am = averaged_matrix(lin, np.array([0.5, 0.1]), np.array([2.0, -1.0]))
        assert np.allclose(am.matrix, [[0.0, -1.0], [-1.0, 0.0]])
        assert am.eigenvalues == pytest.approx([-1.0, 1.0])

    def test_symmetry_exact(self):
        ps = cb.p_system_power(2.0)
        rng = np.random.default_rng(17)
        for _ in range(25):
            u = rng.uniform([0.6, -0.5], [2.0, 0.5])
            v = rng.uniform([0.6, -0.5], [2.0, 0.5])
            a1 = averaged_matrix(ps, u, v)
            a2 = averaged_matrix(ps, v, u)
            assert np.array_equal(a1.matrix, a2.matrix)

    def test_quadrature_convergence(self):
        ps = cb.p_system_power(2.0)
        rng = np.random.default_rng(18)
        for _ in range(10):
            u = rng.uniform([0.6, -0.5], [2.0, 0.5])
            v = rng.uniform([0.6, -0.5], [2.0, 0.5])
            a16 = averaged_matrix(ps, u, v, 16).matrix
            a64 = averaged_matrix(ps, u, v, 64).matrix
            assert np.max(np.abs(a16 - a64)) < 1e-12

    def test_eigen_duality(self):
        ps = cb.euler_mass_momentum()
        am = averaged_matrix(ps, np.array([1.0, 0.2]), np.array([1.4, -0.3]))
        assert np.allclose(am.left @ am.right, np.eye(2), atol=1e-12)
        for j in (1, 2):
            res = am.matrix @ am.right_vector(j) - am.eigenvalue(j) * am.right_vector(j)
            assert np.max(np.abs(res)) < 1e-10

    def test_hyperbolicity_error(self):
        deg = cb.p_system(lambda w: 0.0 * w, lambda w: 0.0 * w,
                          ((0.1, -2.0), (3.0, 2.0)))
        with pytest.raises(HyperbolicityError):
            averaged_matrix(deg, np.array([1.0, 0.0]), np.array([1.5, 0.0]))


class TestHugoniotCurve:
    def test_zero_parameter_limit(self):
        ps = cb.p_system_power(2.0)
        pt = hugoniot_curve(ps, np.array([1.0, 0.0]), 1, [0.0])[0]
        lam, _, _ = eigen_at(ps, np.array([1.0, 0.0]))
        assert np.array_equal(pt.u_plus, [1.0, 0.0])
        assert pt.speed == pytest.approx(lam[0])

    def test_lax_point(self):
        ps = cb.p_system_power(2.0)
        u_minus = np.array([1.0, 0.0])
        pt = hugoniot_curve(ps, u_minus, 1, [-0.1])[0]
        assert pt.residual <= 1e-10
        lam_m, _, _ = eigen_at(ps, u_minus)
        lam_p, _, _ = eigen_at(ps, pt.u_plus)
        assert lam_m[0] > pt.speed > lam_p[0]
        assert pt.lax_admissible

    def test_curve_tangency(self):
        # d(speed)/d(eps) at eps = 0 equals half the directional derivative
        # of the eigenvalue along its eigenvector.
        ps = cb.p_system_power(2.0)
        u_minus = np.array([1.0, 0.0])
        for family in (1, 2):
            eps = np.array([-0.02, -0.01, 0.0, 0.01, 0.02])
            pts = hugoniot_curve(ps, u_minus, family, eps)
            speeds = np.array([p.speed for p in pts])
            fd = (speeds[3] - speeds[1]) / 0.02
            target = 0.5 * (gradient_eigenvalue(ps, u_minus, family)
                            @ oriented_eigenvector(ps, u_minus, family))
            assert fd == pytest.approx(target, abs=5e-4)

    def test_residuals_along_grid(self):
        ps = cb.p_system_power(2.0)
        pts = hugoniot_curve(ps, np.array([1.1, 0.05]), 2,
                             np.linspace(-0.2, 0.2, 21))
        assert all(p.residual <= 1e-10 for p in pts)


class TestRiemann2x2:
    def test_trivial(self):
        ps = cb.p_system_power(2.0)
        fan = solve_riemann_2x2(ps, np.array([1.0, 0.0]), np.array([1.0, 0.0]))
        assert fan.waves == ()

    def test_middle_state_consistency(self):
        ps = cb.p_system_power(2.0)
        rng = np.random.default_rng(19)
        for _ in range(10):
            u_l = rng.uniform([0.9, -0.1], [1.1, 0.1])
            u_r = rng.uniform([0.9, -0.1], [1.1, 0.1])
            fan = solve_riemann_2x2(ps, u_l, u_r)
            state = np.asarray(u_l)
            for w in fan.waves:
                assert np.allclose(w.left, state, atol=1e-9)
                state = np.asarray(w.right)
            assert np.allclose(state, u_r, atol=1e-9)
            speeds = [s for pair in fan.speeds() for s in pair]
            assert all(b >= a - 1e-10 for a, b in zip(speeds, speeds[1:]))

    def test_euler_flux(self):
        eu = cb.euler_mass_momentum()
        fan = solve_riemann_2x2(eu, np.array([1.0, 0.0]), np.array([1.1, 0.05]))
        assert len(fan.waves) >= 1


class TestMonotonicity:
    def test_coincidence_derivative_sign(self):
        # With v = u_minus the derivative of the averaged eigenvalue along
        # the curve has the sign of the genuine-nonlinearity product.
        ps = cb.p_system_power(2.0)
        u_minus = np.array([1.0, 0.0])
        rep = averaged_eigen_monotonicity(ps, u_minus, 1, u_minus,
                                          np.linspace(-0.1, 0.1, 21))
        assert rep.sign_changes == 0
        nz = rep.derivative_signs[rep.derivative_signs != 0]
        assert np.all(nz > 0)  # oriented eigenvectors increase the eigenvalue

    def test_empty_grid(self):
        ps = cb.p_system_power(2.0)
        rep = averaged_eigen_monotonicity(ps, np.array([1.0, 0.0]), 1,
                                          np.array([1.05, 0.0]), [0.0])
        assert rep.derivative_signs.size == 0

    def test_inflection_pressure_smoke(self):
        # A pressure with one inflection point (at w = 1) still yields
        # monotone averaged eigenvalues when the curve stays on one side of
        # the non-genuinely-nonlinear line.
        pi = cb.p_system_inflection()
        rep = averaged_eigen_monotonicity(pi, np.array([1.4, 0.0]), 1,
                                          np.array([1.45, 0.02]),
                                          np.linspace(-0.08, 0.08, 17))
        assert rep.sign_changes == 0


class TestFrontTracking2x2:
    def test_small_tv_run_and_scan(self):
        ps = cb.p_system_power(2.0)
        u0 = PiecewiseConstantField([0.0, 0.5],
                                    np.array([[1.0, 0.0], [1.15, 0.07], [1.0, 0.03]]))
        v0 = PiecewiseConstantField([-2.0], np.array([[1.05, 0.02], [1.05, 0.02]]))
        tu = front_tracking_2x2(ps, u0, 0.05, 1.0)
        tv = front_tracking_2x2(ps, v0, 0.05, 1.0)
        rep = scan_rarefaction_free_systems(tu, tv, ps)
        assert rep.rarefaction_count() == 0
        assert rep.total_jumps > 0

    def test_identical_pair_is_compressive_in_own_family(self):
        ps = cb.p_system_power(2.0)
        u0 = PiecewiseConstantField([0.0], np.array([[1.1, 0.0], [1.0, 0.0]]))
        tu = front_tracking_2x2(ps, u0, 0.05, 0.5)
        rep = scan_rarefaction_free_systems(tu, tu, ps)
        assert rep.counts["R"] == 0
        assert rep.counts["L"] > 0

    def test_synthetic_non_lax_jump_detected(self):
        # A reversed Lax shock classifies as a rarefaction shock against a
        # companion state between its two traces.
        ps = cb.p_system_power(2.0)
        u_minus = np.array([1.0, 0.0])
        pt = hugoniot_curve(ps, u_minus, 1, [-0.15])[0]
        fronts = (FrontSnapshot(0.0, pt.u_plus, u_minus, pt.speed, SHOCK, 1),)
        bad = Trajectory((0.0, 1.0),
                         (FrontState(0.0, fronts, pt.u_plus),
                          FrontState(1.0, (FrontSnapshot(pt.speed, pt.u_plus,
                                                         u_minus, pt.speed,
                                                         SHOCK, 1),),
                                     pt.u_plus)))
        v_mid = 0.5 * (pt.u_plus + u_minus)
        v0 = PiecewiseConstantField([-3.0], np.array([v_mid, v_mid]))
        tv = front_tracking_2x2(ps, v0, 0.05, 1.0)
        rep = scan_rarefaction_free_systems(bad, tv, ps)
        assert rep.rarefaction_count() >= 1
