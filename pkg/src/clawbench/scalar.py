"""Entropy solvers for scalar conservation laws with general flux.

The exact Riemann solution follows the convex/concave envelope of the flux
between the two data values.  Front tracking replaces the flux by its
piecewise-linear interpolation on a uniform value grid of spacing delta;
every Riemann solution is then a finite set of jumps, and the whole
evolution is an exact weak solution of the approximated equation.  Glimm's
scheme samples exact local Riemann solutions with an equidistributed
sequence.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .envelope import envelope_from_samples
from .errors import AmbiguousTrackingError
from .fields import PiecewiseConstantField, RarefactionFan, Shock, WaveFan
from .wavefronts import SHOCK, SLICE, FrontTracker, Trajectory


def solve_riemann_scalar(flux, u_l, u_r, grid=2048):
    """Entropy-exact Riemann fan for scalar data, at envelope-grid resolution.

    For u_l < u_r the waves follow the lower convex envelope of the flux on
    [u_l, u_r]; for u_l > u_r the upper concave envelope on [u_r, u_l].
    Hull chords become shocks, hull arcs that follow the flux become
    rarefaction fans.  Returned wave speeds are weakly increasing.
    """
    u_l = float(u_l)
    u_r = float(u_r)
    if u_l == u_r:
        return WaveFan((), np.array([u_l]), np.array([]))
    us = np.linspace(min(u_l, u_r), max(u_l, u_r), int(grid))
    fs = np.asarray(flux.value(us), dtype=float)
    side = "lower" if u_l < u_r else "upper"
    hull = envelope_from_samples(us, fs, side)
    return _fan_from_hull(us, fs, hull, u_l, u_r)


def _fan_from_hull(us, fs, hull, u_l, u_r):
    """Assemble a WaveFan from hull vertex indices over the sample grid.

    Fan edge speeds are the first and last hull chord slopes, which keeps
    the whole fan's speeds weakly increasing exactly; they approximate the
    characteristic speeds at the fan's end states to grid resolution.
    """
    verts = [us[i] for i in hull]
    slopes = [(fs[hull[k + 1]] - fs[hull[k]]) / (us[hull[k + 1]] - us[hull[k]])
              for k in range(len(hull) - 1)]
    gaps = [hull[k + 1] - hull[k] for k in range(len(hull) - 1)]

    if u_l > u_r:
        # Traverse from u_l down to u_r; upper-envelope slopes then increase.
        verts = verts[::-1]
        slopes = slopes[::-1]
        gaps = gaps[::-1]

    waves = []
    k = 0
    n_edges = len(slopes)
    while k < n_edges:
        if gaps[k] == 1:
            j = k
            while j + 1 < n_edges and gaps[j + 1] == 1:
                j += 1
            waves.append(RarefactionFan(verts[k], verts[j + 1], slopes[k], slopes[j]))
            k = j + 1
        else:
            waves.append(Shock(verts[k], verts[k + 1], slopes[k]))
            k += 1

    hull_states = np.asarray(verts, dtype=float)
    hull_speeds = np.asarray(slopes, dtype=float)
    return WaveFan(tuple(waves), hull_states, hull_speeds)


# -- front tracking --------------------------------------------------------


def snap_to_grid(u0, delta):
    """Round every value of u0 to the nearest multiple of delta."""
    vals = np.round(np.asarray(u0.values, dtype=float) / delta) * delta
    return PiecewiseConstantField(u0.breakpoints, vals)


def _grid_riemann_factory(flux, delta):
    """Riemann solver over the delta value grid, with memoization.

    States are exact grid multiples, so hull vertices are again grid
    multiples and the front set stays closed under interactions.  Hull edges
    joining adjacent grid levels are labeled rarefaction slices; edges that
    skip levels are shocks.
    """
    cache = {}

    def solve(ul, ur):
        ul = float(ul)
        ur = float(ur)
        key = (ul, ur)
        hit = cache.get(key)
        if hit is not None:
            return hit
        lo, hi = (ul, ur) if ul < ur else (ur, ul)
        i_lo = int(round(lo / delta))
        i_hi = int(round(hi / delta))
        us = np.arange(i_lo, i_hi + 1, dtype=float) * delta
        fs = np.asarray(flux.value(us), dtype=float)
        side = "lower" if ul < ur else "upper"
        hull = envelope_from_samples(us, fs, side)
        verts = us[hull]
        slopes = (fs[hull][1:] - fs[hull][:-1]) / (verts[1:] - verts[:-1])
        gaps = np.diff(hull)
        if ul > ur:
            verts = verts[::-1]
            slopes = slopes[::-1]
            gaps = gaps[::-1]
        fronts = [
            (float(verts[k]), float(verts[k + 1]), float(slopes[k]),
             SLICE if gaps[k] == 1 else SHOCK, 1)
            for k in range(len(slopes))
        ]
        cache[key] = fronts
        return fronts

    return solve


def front_tracking_evolve(flux, u0, delta, t_max, front_budget=10 ** 6):
    """Exact evolution of the piecewise-linear-flux approximation.

    Initial values are snapped to the delta grid first, so both solutions of
    a paired run share one grid and the L1 contraction between them is exact.
    Returns a Trajectory with a FrontState per event time.
    """
    snapped = snap_to_grid(u0, delta)
    solver = _grid_riemann_factory(flux, delta)
    tracker = FrontTracker(solver, front_budget=front_budget)
    return tracker.evolve(snapped, t_max)


# -- Glimm random choice ----------------------------------------------------


def van_der_corput(n, base=2):
    """n-th radical-inverse value in (0,1); n starts at 1."""
    v = 0.0
    scale = 1.0 / base
    while n > 0:
        n, digit = divmod(n, base)
        v += digit * scale
        scale /= base
    return v


@dataclass(frozen=True)
class SamplingSequence:
    """Equidistributed sampling positions for the random-choice scheme."""

    kind: str = "van-der-corput"
    seed: int = 0

    def take(self, n):
        if self.kind == "van-der-corput":
            return np.array([van_der_corput(k) for k in range(1, n + 1)])
        if self.kind == "seeded-uniform":
            rng = np.random.default_rng(self.seed)
            return rng.uniform(0.0, 1.0, size=n)
        raise ValueError(f"unknown sampling kind {self.kind!r}")


class TimedField(NamedTuple):
    t: float
    field: PiecewiseConstantField


def glimm_evolve(flux, u0, h, cfl, seq, t_max, pad=1.0, riemann_grid=2048):
    """Random-choice evolution on a uniform grid of width h.

    The time step is cfl * h / max|f'| over the data range; cfl must lie in
    (0, 1/2] so neighboring Riemann fans cannot interact within one step.
    Snapshots (one per time level) are returned as TimedField pairs.
    """
    if not 0.0 < cfl <= 0.5:
        raise ValueError("cfl must lie in (0, 1/2]")
    if h <= 0.0:
        raise ValueError("h must be positive")

    u_min = float(np.min(u0.values))
    u_max = float(np.max(u0.values))
    probe = np.linspace(u_min, u_max, 2049)
    max_speed = float(np.max(np.abs(flux.jacobian(probe)))) if u_max > u_min else \
        abs(float(flux.jacobian(u_min)))

    if u0.breakpoints.size:
        x_lo = float(u0.breakpoints[0]) - pad - max_speed * t_max
        x_hi = float(u0.breakpoints[-1]) + pad + max_speed * t_max
    else:
        x_lo, x_hi = -pad, pad
    n_cells = int(np.ceil((x_hi - x_lo) / h)) + 1
    edges = x_lo + h * np.arange(n_cells + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    u = np.asarray(u0.values_at(centers), dtype=float)

    if max_speed == 0.0:
        steps = 1
        dt = t_max
    else:
        dt = cfl * h / max_speed
        steps = int(np.ceil(t_max / dt - 1e-12))

    samples = seq.take(steps)
    fan_cache = {}

    def fan_for(ul, ur):
        key = (ul, ur)
        fan = fan_cache.get(key)
        if fan is None:
            fan = solve_riemann_scalar(flux, ul, ur, grid=riemann_grid)
            fan_cache[key] = fan
        return fan

    out = [TimedField(0.0, _field_from_cells(edges, u))]
    t = 0.0
    for n in range(steps):
        step_dt = min(dt, t_max - t)
        a_n = samples[n]
        active = np.nonzero(u[:-1] != u[1:])[0]
        if active.size:
            new = u.copy()
            for k in active:
                fan = fan_for(u[k], u[k + 1])
                # Sample points sit at a_n*h past the left edge of each cell.
                xi_left = (a_n - 1.0) * h / step_dt   # cell k relative to edge k+1/2
                xi_right = a_n * h / step_dt          # cell k+1 relative to edge k+1/2
                cand = fan.value_at_slope(xi_left)
                if cand != u[k]:
                    new[k] = cand
                cand = fan.value_at_slope(xi_right)
                if cand != u[k + 1]:
                    new[k + 1] = cand
            u = new
        t += step_dt
        out.append(TimedField(t, _field_from_cells(edges, u)))
    return out


def _field_from_cells(edges, u):
    jumps = np.nonzero(u[:-1] != u[1:])[0]
    bps = edges[jumps + 1]
    vals = np.concatenate([[u[0]], u[jumps + 1]])
    return PiecewiseConstantField(bps, vals)


# -- shock-path extraction ---------------------------------------------------


def track_shock_path(traj, window, rel_threshold=0.5):
    """Polyline through the dominant discontinuity inside a space-time box.

    ``window`` is (t_lo, t_hi, x_lo, x_hi).  A jump is dominant when its
    strength reaches rel_threshold times the largest jump strength seen in
    the window; each sampled time must contain exactly one dominant jump.
    Accepts a front-tracking Trajectory or a list of TimedField snapshots.
    """
    t_lo, t_hi, x_lo, x_hi = window
    levels = _window_levels(traj, t_lo, t_hi)
    if not levels:
        raise AmbiguousTrackingError("window contains no time levels")

    strongest = 0.0
    per_level = []
    for t, jumps in levels:
        inside = [(x, abs(s)) for x, s in jumps if x_lo <= x <= x_hi]
        for _, s in inside:
            strongest = max(strongest, s)
        per_level.append((t, inside))
    if strongest == 0.0:
        raise AmbiguousTrackingError("no discontinuity found in window")

    times = []
    path = []
    for t, inside in per_level:
        dominant = [x for x, s in inside if s >= rel_threshold * strongest]
        if len(dominant) != 1:
            raise AmbiguousTrackingError(
                f"{len(dominant)} dominant jumps at t={t:.6g}; expected exactly one"
            )
        times.append(t)
        path.append(dominant[0])
    return np.asarray(times), np.asarray(path)


def _window_levels(traj, t_lo, t_hi):
    levels = []
    if isinstance(traj, Trajectory):
        for st in traj.states:
            if t_lo - 1e-12 <= st.time <= t_hi + 1e-12:
                levels.append((st.time,
                               [(f.position, _strength(f.right, f.left)) for f in st.fronts]))
    else:
        for t, fld in traj:
            if t_lo - 1e-12 <= t <= t_hi + 1e-12:
                levels.append((t, [(x, _strength(r, l)) for x, l, r in fld.jumps()]))
    return levels


def _strength(a, b):
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.abs(d)) if d.ndim == 0 else float(np.linalg.norm(d))
