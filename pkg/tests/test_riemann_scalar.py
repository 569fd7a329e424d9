import numpy as np
import pytest

import clawbench as cb
from clawbench.fields import RarefactionFan, Shock


class TestSolveRiemannScalar:
    def test_burgers_shock(self):
        fan = cb.solve_riemann_scalar(cb.burgers(), 1.0, 0.0)
        assert len(fan.waves) == 1
        wave = fan.waves[0]
        assert isinstance(wave, Shock)
        assert wave.speed == pytest.approx(0.5, abs=1e-14)

    def test_burgers_rarefaction(self):
        fan = cb.solve_riemann_scalar(cb.burgers(), 0.0, 1.0)
        assert len(fan.waves) == 1
        wave = fan.waves[0]
        assert isinstance(wave, RarefactionFan)
        assert wave.left == 0.0 and wave.right == 1.0
        assert wave.speed_lo == pytest.approx(0.0, abs=1e-3)
        assert wave.speed_hi == pytest.approx(1.0, abs=1e-3)

    def test_cubic_composite_wave(self):
        # Tangency at the root of 2u^3 - 3u^2 + 1 = 0, i.e. u* = -1/2, so the
        # fan is a shock 1 -> -1/2 at speed 1/4 followed by a rarefaction
        # -1/2 -> -1 spanning speeds [1/4, 1].
        fan = cb.solve_riemann_scalar(cb.cubic(), 1.0, -1.0)
        assert len(fan.waves) == 2
        shock, rare = fan.waves
        assert isinstance(shock, Shock) and isinstance(rare, RarefactionFan)
        assert shock.left == 1.0
        assert shock.right == pytest.approx(-0.5, abs=1e-3)
        assert shock.speed == pytest.approx(0.25, abs=1e-5)
        assert rare.right == -1.0
        assert rare.speed_hi == pytest.approx(1.0, abs=1e-2)

    def test_cubic_against_fine_envelope_oracle(self):
        # Brute-force envelope on a 10^4-point grid reproduces the fan states.
        coarse = cb.solve_riemann_scalar(cb.cubic(), 1.0, -1.0, grid=512)
        fine = cb.solve_riemann_scalar(cb.cubic(), 1.0, -1.0, grid=10 ** 4)
        assert coarse.waves[0].right == pytest.approx(fine.waves[0].right, abs=1e-3)
        assert coarse.waves[0].speed == pytest.approx(fine.waves[0].speed, abs=1e-4)

    def test_empty_fan(self):
        fan = cb.solve_riemann_scalar(cb.burgers(), 0.7, 0.7)
        assert fan.waves == ()

    def test_speeds_weakly_increasing(self):
        rng = np.random.default_rng(8)
        for flux in (cb.burgers(), cb.cubic()):
            for _ in range(50):
                ul, ur = rng.uniform(-1.5, 1.5, 2)
                fan = cb.solve_riemann_scalar(flux, ul, ur)
                speeds = [s for pair in fan.speeds() for s in pair]
                assert all(b >= a - 1e-12 for a, b in zip(speeds, speeds[1:]))
                if fan.waves:
                    assert fan.left_state == pytest.approx(ul)
                    assert fan.right_state == pytest.approx(ur)

    def test_states_chain(self):
        fan = cb.solve_riemann_scalar(cb.cubic(), 1.0, -1.0)
        for a, b in zip(fan.waves, fan.waves[1:]):
            assert a.right == b.left

    def test_value_at_slope(self):
        fan = cb.solve_riemann_scalar(cb.burgers(), 1.0, 0.0)
        assert fan.value_at_slope(0.4) == 1.0
        assert fan.value_at_slope(0.6) == 0.0
        fan2 = cb.solve_riemann_scalar(cb.burgers(), 0.0, 1.0)
        assert fan2.value_at_slope(-0.1) == 0.0
        assert fan2.value_at_slope(1.1) == 1.0
        assert fan2.value_at_slope(0.5) == pytest.approx(0.5, abs=1e-3)
