import numpy as np
import pytest

import clawbench as cb
from clawbench.errors import (
    AmbiguousPlacementError,
    NonuniquenessError,
    UnsupportedCoefficientError,
)
from clawbench.fields import MeasureField, PiecewiseConstantField
from clawbench.transport import SmoothBump, weak_form_residual

DELTA = 1e-2


def shock_coefficient(t_max=3.0):
    flux = cb.burgers()
    u0 = PiecewiseConstantField([0.0], [1.0, 0.0])
    traj = cb.front_tracking_evolve(flux, u0, DELTA, t_max)
    return flux, cb.CoefficientField.from_solution(flux, traj)


class TestRiemannLinear:
    def test_growing_atom(self):
        sol = cb.riemann_linear(1.0, 1.0, 1.0, -1.0, 0.0)
        # C_l = -1 and C_r = +1, so the atom mass is 2t at x = 0.
        assert sol.atom_growth_rate == pytest.approx(2.0, abs=1e-15)
        state = sol.field_at(0.75)
        assert state.atoms == ((0.0, 1.5),)

    def test_compatibility_gives_bv_solution(self):
        sol = cb.riemann_linear(1.0, -2.0, 2.0, -1.0, 0.0)
        assert sol.atom_growth_rate == 0.0
        assert sol.field_at(1.0).atoms == ()

    def test_rarefaction_coefficient_needs_choice(self):
        with pytest.raises(NonuniquenessError):
            cb.riemann_linear(1.0, 1.0, -1.0, 1.0, 0.0)

    def test_bv_branch_has_no_atoms(self):
        sol = cb.riemann_linear(1.0, 1.0, -1.0, 1.0, 0.0, fan_atom_mass=0.0)
        state = sol.field_at(1.0)
        assert state.atoms == ()
        assert state.bv.value_at(0.0) == 0.0  # wedge interior

    def test_atom_mass_linear_in_time(self):
        sol = cb.riemann_linear(0.7, -0.3, 2.0, -1.0, 0.5)
        rate = sol.atom_growth_rate
        for t in (0.25, 1.0, 1.75):
            atoms = sol.field_at(t).atoms
            assert atoms[0][1] == pytest.approx(t * rate, abs=1e-15)


class TestSolveLinearCauchy:
    def test_shock_absorbs_box(self):
        # Characteristics at unit speed reach the half-speed shock by t = 2;
        # the atom then carries the whole unit of mass.
        flux, coeff = shock_coefficient()
        psi0 = MeasureField(PiecewiseConstantField([-1.0, 0.0], [0.0, 1.0, 0.0]))
        probes = [0.5, 1.0, 1.5, 2.0, 2.5]
        sol = cb.solve_linear_cauchy(coeff, psi0, 3.0, record_times=probes)
        for t in probes:
            st = sol.state_at(t)
            mass = st.atoms[0][1] if st.atoms else 0.0
            assert mass == pytest.approx(min(0.5 * t, 1.0), abs=1e-12)
            assert st.signed_mass() == pytest.approx(1.0, abs=1e-10)

    def test_against_upwind_finite_volume_oracle(self):
        # Conservative upwind on 10^4 cells at CFL 0.9 with the exact
        # coefficient a = f'(u): total mass matches and the mass that the
        # exact solver stores in the atom concentrates near the shock.
        flux, coeff = shock_coefficient()
        psi0 = MeasureField(PiecewiseConstantField([-1.0, 0.0], [0.0, 1.0, 0.0]))
        sol = cb.solve_linear_cauchy(coeff, psi0, 2.0, record_times=[2.0])

        n = 10 ** 4
        x_lo, x_hi = -2.0, 3.0
        dx = (x_hi - x_lo) / n
        edges = x_lo + dx * np.arange(n + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        psi = np.where((centers > -1.0) & (centers < 0.0), 1.0, 0.0)
        t = 0.0
        dt = 0.9 * dx  # max |a| = 1
        while t < 2.0 - 1e-12:
            step = min(dt, 2.0 - t)
            shock_x = 0.5 * (t + step / 2)
            a_edge = np.where(edges < shock_x, 1.0, 0.0)
            flux_e = np.where(a_edge > 0.0,
                              a_edge * np.concatenate([[0.0], psi]),
                              a_edge * np.concatenate([psi, [0.0]]))
            psi = psi - (step / dx) * (flux_e[1:] - flux_e[:-1])
            t += step
        oracle_total = float(np.sum(psi) * dx)
        oracle_near_shock = float(np.sum(psi[np.abs(centers - 1.0) < 0.1]) * dx)

        st = sol.state_at(2.0)
        assert st.signed_mass() == pytest.approx(oracle_total, abs=1e-6)
        assert st.atoms[0][1] == pytest.approx(oracle_near_shock, abs=0.05)

    def test_constant_coefficient_translates(self):
        flux = cb.burgers()
        u0 = PiecewiseConstantField.constant(0.5)
        traj = cb.front_tracking_evolve(flux, u0, DELTA, 2.0)
        coeff = cb.CoefficientField.from_solution(flux, traj)
        psi0 = MeasureField(PiecewiseConstantField([0.0, 1.0], [0.0, 2.0, 0.0]),
                            ((0.25, -1.0),))
        sol = cb.solve_linear_cauchy(coeff, psi0, 2.0)
        st = sol.states[-1]
        assert st.bv.breakpoints == pytest.approx([1.0, 2.0], abs=1e-10)
        assert st.atoms[0][0] == pytest.approx(1.25, abs=1e-10)
        assert st.atoms[0][1] == -1.0

    def test_zero_data(self):
        flux, coeff = shock_coefficient()
        psi0 = MeasureField(PiecewiseConstantField.constant(0.0))
        sol = cb.solve_linear_cauchy(coeff, psi0, 1.0)
        for st in sol.states:
            assert st.atoms == ()
            assert np.all(st.bv.values == 0.0)

    def test_linearity(self):
        flux, coeff = shock_coefficient()
        a = MeasureField(PiecewiseConstantField([-1.0, 0.0], [0.0, 1.0, 0.0]))
        b = MeasureField(PiecewiseConstantField([-0.7, 0.4], [0.0, -2.0, 0.0]))
        combo = a.scale(1.25).add(b.scale(-0.5))
        s_combo = cb.solve_linear_cauchy(coeff, combo, 1.5)
        s_a = cb.solve_linear_cauchy(coeff, a, 1.5)
        s_b = cb.solve_linear_cauchy(coeff, b, 1.5)
        lhs = s_combo.states[-1]
        rhs = s_a.states[-1].scale(1.25).add(s_b.states[-1].scale(-0.5))
        assert cb.l1_distance(lhs.bv, rhs.bv) <= 1e-12
        assert len(lhs.atoms) == len(rhs.atoms)
        for (xa, ma), (xb, mb) in zip(lhs.atoms, rhs.atoms):
            assert xa == pytest.approx(xb, abs=1e-12)
            assert ma == pytest.approx(mb, abs=1e-12)

    def test_mass_conserved_through_interactions(self):
        flux = cb.burgers()
        u0 = PiecewiseConstantField([-1.0, 0.0], [2.0, 1.0, 0.0])
        traj = cb.front_tracking_evolve(flux, u0, DELTA, 2.0)
        coeff = cb.CoefficientField.from_solution(flux, traj)
        psi0 = MeasureField(PiecewiseConstantField([-2.0, 0.5], [0.0, 0.8, 0.0]))
        sol = cb.solve_linear_cauchy(coeff, psi0, 2.0)
        m0 = sol.states[0].signed_mass()
        for st in sol.states:
            assert st.signed_mass() == pytest.approx(m0, abs=1e-10)

    def test_rejects_two_solution_coefficient(self):
        flux = cb.burgers()
        u0 = PiecewiseConstantField([0.0], [1.0, 0.0])
        traj = cb.front_tracking_evolve(flux, u0, DELTA, 1.0)
        coeff = cb.CoefficientField.from_solution_pair(flux, traj, traj)
        with pytest.raises(UnsupportedCoefficientError):
            cb.solve_linear_cauchy(coeff, MeasureField(
                PiecewiseConstantField.constant(0.0)), 1.0)

    def test_rarefaction_uses_bv_branch(self):
        # Fan coefficient: mass entering the fan spreads without atoms.
        flux = cb.burgers()
        u0 = PiecewiseConstantField([0.0], [0.0, 1.0])
        traj = cb.front_tracking_evolve(flux, u0, 0.05, 2.0)
        coeff = cb.CoefficientField.from_solution(flux, traj)
        psi0 = MeasureField(PiecewiseConstantField([-1.0, -0.2], [0.0, 1.0, 0.0]))
        sol = cb.solve_linear_cauchy(coeff, psi0, 2.0)
        final = sol.states[-1]
        assert final.atoms == ()
        assert final.signed_mass() == pytest.approx(1.0 * 0.8, abs=1e-10)


class TestVolpertProduct:
    def test_atom_on_jump(self):
        flux = cb.burgers()
        u = PiecewiseConstantField([0.0], [0.0, 2.0])
        psi = MeasureField(PiecewiseConstantField.constant(0.0), ((0.0, 1.0),))
        prod = cb.volpert_product(flux.jacobian, u, psi)
        assert prod.atoms[0][1] == pytest.approx(1.0, abs=1e-12)

    def test_continuous_coefficient(self):
        flux = cb.burgers()
        u = PiecewiseConstantField.constant(0.7)
        psi = MeasureField(PiecewiseConstantField([0.0, 1.0], [0.0, 2.0, 0.0]),
                           ((0.5, 3.0),))
        prod = cb.volpert_product(flux.jacobian, u, psi)
        assert prod.bv.value_at(0.5) == pytest.approx(0.7 * 2.0)
        assert prod.atoms[0][1] == pytest.approx(0.7 * 3.0)

    def test_gradient_consistency(self):
        # g = dh/du with h = u^2/2: the jump atom equals h(u+) - h(u-) times
        # the unit trace of psi.
        flux = cb.burgers()
        u = PiecewiseConstantField([0.0], [0.0, 2.0])
        psi = MeasureField(PiecewiseConstantField([-5.0, 5.0], [0.0, 1.0, 0.0]))
        prod = cb.volpert_product(flux.jacobian, u, psi)
        assert prod.atoms[0][1] == pytest.approx(2.0, abs=1e-12)

    def test_near_breakpoint_atom_rejected(self):
        flux = cb.burgers()
        u = PiecewiseConstantField([0.0], [0.0, 2.0])
        psi = MeasureField(PiecewiseConstantField.constant(0.0), ((1e-13, 1.0),))
        with pytest.raises(AmbiguousPlacementError):
            cb.volpert_product(flux.jacobian, u, psi)


class TestWeakFormNonuniqueness:
    def test_two_branches_solve_weakly(self):
        # The stationary rarefaction-shock coefficient admits distinct
        # solutions for different fan atom masses; both satisfy the weak form.
        coeff = cb.CoefficientField.synthetic_static(
            PiecewiseConstantField([0.0], [-1.0, 1.0]))
        rng = np.random.default_rng(21)
        sols = [cb.riemann_linear(1.0, 1.0, -1.0, 1.0, 0.0, fan_atom_mass=phi)
                for phi in (0.0, 1.0)]
        worst = 0.0
        for _ in range(20):
            bump = SmoothBump(t0=float(rng.uniform(0.7, 1.3)),
                              x0=float(rng.uniform(-0.5, 0.5)),
                              st=float(rng.uniform(0.5, 0.65)),
                              sx=float(rng.uniform(0.8, 1.4)))
            for sol in sols:
                worst = max(worst, abs(weak_form_residual(sol.field_at, coeff, bump)))
        assert worst < 1e-6
        assert sols[0].field_at(1.0).atoms != sols[1].field_at(1.0).atoms
