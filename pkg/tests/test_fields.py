import json

import numpy as np
import pytest

import clawbench as cb
from clawbench.envelope import convex_envelope
from clawbench.errors import DivergentIntegralError
from clawbench.fields import MeasureField, PiecewiseConstantField


def dyadic_field(rng, n_breaks, scale=2 ** -10):
    """Breakpoints on a dyadic lattice so the midpoint-rule oracle is exact."""
    bps = np.unique(rng.integers(-2 ** 10, 2 ** 10, n_breaks)) * scale
    vals = rng.uniform(-1.0, 1.0, bps.size + 1)
    vals[0] = vals[-1] = 0.0
    return PiecewiseConstantField(bps, vals)


class TestPiecewiseConstantField:
    def test_dedup_and_ordering(self):
        fld = PiecewiseConstantField([0.0, 1.0], [1.0, 1.0 + 1e-16, 2.0])
        assert fld.breakpoints.size == 1  # first breakpoint was spurious
        with pytest.raises(ValueError):
            PiecewiseConstantField([1.0, 0.0], [1.0, 2.0, 3.0])

    def test_value_lookup_sides(self):
        fld = PiecewiseConstantField([0.0], [1.0, 2.0])
        assert fld.value_at(0.0, "left") == 1.0
        assert fld.value_at(0.0, "right") == 2.0
        assert fld.value_at(-5.0) == 1.0

    def test_json_roundtrip(self):
        fld = PiecewiseConstantField([0.0, 0.5], [0.0, 1.5, 0.0])
        again = PiecewiseConstantField.from_json(json.loads(json.dumps(fld.to_json())))
        assert np.array_equal(again.breakpoints, fld.breakpoints)
        assert np.array_equal(again.values, fld.values)

    def test_json_roundtrip_system(self):
        fld = PiecewiseConstantField([0.0], np.array([[1.0, 2.0], [3.0, 4.0]]))
        again = PiecewiseConstantField.from_json(fld.to_json())
        assert again.dim == 2
        assert np.array_equal(again.values, fld.values)


class TestL1Distance:
    def test_identity(self):
        u = PiecewiseConstantField([0.0, 1.0], [0.0, 1.0, 0.0])
        assert cb.l1_distance(u, u) == 0.0

    def test_unit_box(self):
        u = PiecewiseConstantField([0.0, 1.0], [0.0, 1.0, 0.0])
        v = PiecewiseConstantField.constant(0.0)
        assert cb.l1_distance(u, v) == pytest.approx(1.0, abs=1e-15)

    def test_matches_midpoint_quadrature(self):
        # 2^20 cells over [-2, 2]: dyadic breakpoints land exactly on cell
        # edges, so the midpoint rule is exact for piecewise-constant data.
        rng = np.random.default_rng(1)
        u = dyadic_field(rng, 21)
        v = dyadic_field(rng, 21)
        exact = cb.l1_distance(u, v)
        n = 2 ** 20
        edges = np.linspace(-2.0, 2.0, n + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        quad = float(np.sum(np.abs(u.values_at(mids) - v.values_at(mids)))
                     * (4.0 / n))
        assert exact == pytest.approx(quad, abs=1e-9)

    def test_divergent_farfield(self):
        u = PiecewiseConstantField([0.0], [0.0, 1.0])
        v = PiecewiseConstantField.constant(0.0)
        with pytest.raises(DivergentIntegralError):
            cb.l1_distance(u, v)

    def test_metric_properties(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            u = dyadic_field(rng, 7)
            v = dyadic_field(rng, 7)
            w = dyadic_field(rng, 7)
            duv = cb.l1_distance(u, v)
            assert duv == cb.l1_distance(v, u)
            assert duv <= cb.l1_distance(u, w) + cb.l1_distance(w, v) + 1e-14


class TestTotalVariation:
    def test_constant(self):
        assert cb.total_variation(PiecewiseConstantField.constant(3.0)) == 0.0

    def test_single_jump(self):
        assert cb.total_variation(PiecewiseConstantField([0.0], [0.0, 3.0])) == 3.0

    def test_staircase(self):
        fld = PiecewiseConstantField([0.0, 1.0, 2.0], [0.0, 1.0, 0.0, 1.0])
        assert cb.total_variation(fld) == 3.0

    def test_redundant_breakpoint_invariant(self):
        fld = PiecewiseConstantField([0.0, 1.0], [0.0, 2.0, 0.0])
        refined = PiecewiseConstantField([0.0, 0.5, 1.0], [0.0, 2.0, 2.0, 0.0])
        assert cb.total_variation(fld) == cb.total_variation(refined)


class TestMeasureField:
    def test_atom_ordering_and_mass(self):
        m = MeasureField(PiecewiseConstantField([0.0, 1.0], [0.0, 1.0, 0.0]),
                         ((2.0, -0.5), (1.5, 0.25)))
        assert [a[0] for a in m.atoms] == [1.5, 2.0]
        assert m.mass_norm() == pytest.approx(1.0 + 0.75)

    def test_distinct_atoms_required(self):
        with pytest.raises(ValueError):
            MeasureField(PiecewiseConstantField.constant(0.0),
                         ((1.0, 1.0), (1.0, 2.0)))

    def test_linear_combination(self):
        a = MeasureField(PiecewiseConstantField([0.0], [0.0, 0.0]), ((0.5, 1.0),))
        b = MeasureField(PiecewiseConstantField([1.0], [0.0, 0.0]), ((0.5, 2.0),))
        combo = a.scale(2.0).add(b)
        assert combo.atoms == ((0.5, 4.0),)

    def test_json_roundtrip(self):
        m = MeasureField(PiecewiseConstantField([0.0], [0.0, 0.0]), ((0.5, -1.0),))
        again = MeasureField.from_json(m.to_json())
        assert again.atoms == m.atoms


class TestConvexEnvelope:
    def test_convex_flux_is_its_own_lower_envelope(self):
        env = convex_envelope(cb.burgers(), 0.0, 1.0, "lower", 512)
        us = np.linspace(0.0, 1.0, 200)
        assert np.max(np.abs(env(us) - us ** 2 / 2)) < 1e-5

    def test_linear_flux(self):
        flux = cb.scalar_flux(lambda u: -np.asarray(u, float),
                              lambda u: -np.ones_like(np.asarray(u, float)))
        env = convex_envelope(flux, 0.0, 1.0, "lower", 64)
        assert np.allclose(env.slopes, -1.0)

    def test_cubic_upper_tangency(self):
        # Upper envelope of u^3/3 on [-1, 1]: the chord from u = 1 touches at
        # the root of 2u^3 - 3u^2 + 1, which is u = -1/2.
        roots = np.roots([2.0, -3.0, 0.0, 1.0])
        target = float(roots[np.argmin(np.abs(roots + 0.5))])
        env = convex_envelope(cb.cubic(), -1.0, 1.0, "upper", 10 ** 4)
        interior = env.knots[(env.knots > -0.99) & (env.knots < 0.99)]
        tangency = float(interior[-1])
        assert tangency == pytest.approx(target, abs=1e-3)

    def test_lower_envelope_below_and_idempotent(self):
        flux = cb.cubic()
        env = convex_envelope(flux, -1.0, 1.0, "lower", 512)
        us = np.linspace(-1.0, 1.0, 512)
        assert np.all(env(us) <= np.asarray(flux.value(us)) + 1e-12)
        assert np.all(np.diff(env.slopes) >= -1e-12)
        wrapped = cb.scalar_flux(env, lambda u: np.zeros_like(np.asarray(u, float)))
        env2 = convex_envelope(wrapped, -1.0, 1.0, "lower", 512)
        assert np.max(np.abs(env2(us) - env(us))) < 1e-14

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            convex_envelope(cb.burgers(), 0.0, 1.0, "lower", 1)


class TestFluxFunctions:
    @pytest.mark.parametrize("make", [cb.burgers, cb.cubic, cb.p_system_power,
                                      cb.p_system_inflection, cb.euler_mass_momentum])
    def test_derivative_consistency(self, make):
        from clawbench.fluxes import check_derivative_consistency
        flux = make()
        rng = np.random.default_rng(3)
        assert check_derivative_consistency(flux, rng, n=100) <= 1e-6

    @pytest.mark.parametrize("make", [cb.p_system_power, cb.euler_mass_momentum])
    def test_strict_hyperbolicity_on_box(self, make):
        from clawbench.fluxes import hyperbolicity_discriminant
        flux = make()
        rng = np.random.default_rng(4)
        lo, hi = flux.box
        for _ in range(100):
            u = rng.uniform(np.asarray(lo) + 1e-6, np.asarray(hi) - 1e-6)
            assert hyperbolicity_discriminant(flux, u) > 0.0

    def test_average_speed_examples(self):
        f = cb.burgers()
        assert cb.average_speed(f, 1.0, 0.0) == pytest.approx(0.5, abs=1e-15)
        assert cb.average_speed(f, 0.3, 0.3) == pytest.approx(0.3, abs=1e-15)
        fc = cb.cubic()
        assert cb.average_speed(fc, 1.0, -1.0) == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_average_speed_quadrature_oracle(self):
        # 64-point Gauss-Legendre quadrature of f' along the segment.
        nodes, weights = np.polynomial.legendre.leggauss(64)
        s = 0.5 * (nodes + 1.0)
        w = 0.5 * weights
        rng = np.random.default_rng(5)
        for flux in (cb.burgers(), cb.cubic()):
            for _ in range(25):
                u, v = rng.uniform(-1.5, 1.5, 2)
                quad = float(np.dot(w, flux.jacobian(s * u + (1 - s) * v)))
                assert cb.average_speed(flux, u, v) == pytest.approx(quad, abs=1e-12)

    def test_average_speed_symmetry(self):
        f = cb.cubic()
        rng = np.random.default_rng(6)
        for _ in range(50):
            u, v = rng.uniform(-1.5, 1.5, 2)
            assert cb.average_speed(f, u, v) == cb.average_speed(f, v, u)
