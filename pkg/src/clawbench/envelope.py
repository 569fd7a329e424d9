"""Convex and concave envelopes of sampled fluxes via monotone-chain hulls."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFunction:
    """Knots with values; evaluation interpolates linearly between knots."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def __call__(self, u):
        return np.interp(u, self.knots, self.values)

    @property
    def slopes(self):
        return np.diff(self.values) / np.diff(self.knots)


def lower_hull_indices(us, fs):
    """Indices of the lower convex hull of the graph points (us, fs).

    us must be strictly increasing.  Collinear interior points are dropped,
    so consecutive hull slopes are strictly increasing.
    """
    hull = []
    for i in range(len(us)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (us[i1] - us[i0]) * (fs[i] - fs[i0]) - (fs[i1] - fs[i0]) * (us[i] - us[i0])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def envelope_from_samples(us, fs, side):
    """Hull indices for the lower convex or upper concave envelope."""
    if side == "lower":
        return lower_hull_indices(us, fs)
    if side == "upper":
        return lower_hull_indices(us, -np.asarray(fs, dtype=float))
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def convex_envelope(flux, u_lo, u_hi, side="lower", grid=2048):
    """Envelope of a scalar flux on [u_lo, u_hi], sampled on a uniform grid.

    Returns a PiecewiseLinearFunction through the hull vertices; its slopes
    are weakly increasing for the lower envelope and weakly decreasing for
    the upper one.  Tangency points are resolved at grid spacing.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    if not u_lo < u_hi:
        raise ValueError("u_lo must be strictly below u_hi")
    us = np.linspace(u_lo, u_hi, int(grid))
    fs = np.asarray(flux.value(us), dtype=float)
    idx = envelope_from_samples(us, fs, side)
    return PiecewiseLinearFunction(us[idx], fs[idx])
