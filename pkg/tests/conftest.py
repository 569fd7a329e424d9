import numpy as np
import pytest

import clawbench as cb

DELTA = 1e-2
T_MAX = 2.0


def small_tv_field(rng, base, n_jumps=4, levels=6, delta=DELTA, span=1.0):
    """Random piecewise-constant data with values on the delta grid and
    total variation of a few grid levels around a base state."""
    bps = np.sort(rng.uniform(-span, span, n_jumps))
    lv = rng.integers(0, levels + 1, n_jumps + 1)
    lv[0] = lv[-1] = 0
    return cb.PiecewiseConstantField(bps, base + lv * delta)


def perturbed_copy(rng, fld, base, levels=6, delta=DELTA, shift=0.05):
    bps = np.sort(np.asarray(fld.breakpoints) + rng.uniform(-shift, shift,
                                                            fld.breakpoints.size))
    lv = np.round((np.asarray(fld.values) - base) / delta).astype(int)
    lv = lv + rng.integers(-2, 3, lv.size)
    lv[0] = lv[-1] = 0
    vals = base + np.clip(lv, 0, levels) * delta
    return cb.PiecewiseConstantField(bps, vals)


def make_pairs(seed, flux_name, n_pairs, base):
    rng = np.random.default_rng(seed)
    flux = cb.burgers() if flux_name == "burgers" else cb.cubic()
    pairs = []
    for _ in range(n_pairs):
        u0 = small_tv_field(rng, base)
        v0 = perturbed_copy(rng, u0, base)
        tu = cb.front_tracking_evolve(flux, u0, DELTA, T_MAX)
        tv = cb.front_tracking_evolve(flux, v0, DELTA, T_MAX)
        pairs.append((tu, tv))
    return flux, pairs


@pytest.fixture(scope="session")
def burgers_pairs():
    """25 Burgers front-tracking pairs in the small-variation regime."""
    return make_pairs(20240, "burgers", 25, base=0.3)


@pytest.fixture(scope="session")
def cubic_pairs():
    """25 cubic-flux front-tracking pairs in the small-variation regime."""
    return make_pairs(20241, "cubic", 25, base=-0.5)
