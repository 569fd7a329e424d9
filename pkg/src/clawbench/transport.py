"""Linear transport with discontinuous coefficient: d/dt psi + d/dx (a psi) = 0.

The coefficient is a piecewise-constant speed field whose jumps move along
straight lines between interaction times.  Compressive jumps absorb mass
into a Dirac atom that grows linearly in time; undercompressive jumps
transmit mass with the flux-matching factor; rarefaction slices open wedges
filled with the bounded-variation selection (zero).  Everything is exact
within the piecewise-constant world, so conservation checks sit at the
round-off level.
"""

from dataclasses import dataclass

import numpy as np

from .classify import JumpKind, classify_jump
from .errors import (
    AmbiguousPlacementError,
    MassBoundError,
    NonuniquenessError,
    TracingError,
    UnsupportedCoefficientError,
)
from .fields import MeasureField, PiecewiseConstantField, merge_partitions
from .wavefronts import Trajectory

POSITION_ATOL = 1e-12
CONTACT_ATOL = 1e-10


# -- coefficient fields ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Speed coefficient with tagged provenance.

    one-solution: a = f'(u) along a front-tracking trajectory u.
    two-solutions: a = average_speed(u, v) along a trajectory pair.
    synthetic: an explicit static field whose jumps move at given speeds.
    """

    provenance: str
    flux: object = None
    u_traj: Trajectory = None
    v_traj: Trajectory = None
    static: PiecewiseConstantField = None
    static_jump_speeds: tuple = ()

    @classmethod
    def from_solution(cls, flux, traj):
        return cls("one-solution", flux=flux, u_traj=traj)

    @classmethod
    def from_solution_pair(cls, flux, u_traj, v_traj):
        return cls("two-solutions", flux=flux, u_traj=u_traj, v_traj=v_traj)

    @classmethod
    def synthetic_static(cls, fld, jump_speeds=None):
        speeds = tuple(jump_speeds) if jump_speeds is not None \
            else (0.0,) * fld.breakpoints.size
        if len(speeds) != fld.breakpoints.size:
            raise ValueError("need one jump speed per breakpoint")
        return cls("synthetic", static=fld, static_jump_speeds=speeds)

    def speed_field_at(self, t):
        """Coefficient values at time t as a PiecewiseConstantField."""
        if self.provenance == "synthetic":
            bps = self.static.breakpoints + t * np.asarray(self.static_jump_speeds)
            return PiecewiseConstantField(bps, self.static.values)
        if self.provenance == "one-solution":
            u = self.u_traj.field_at(t)
            return PiecewiseConstantField(u.breakpoints, self.flux.jacobian(u.values))
        raise UnsupportedCoefficientError(
            "two-solution coefficients are consumed by the stability module"
        )

    def jump_speeds_at(self, t):
        """(position, propagation speed) of each coefficient jump at time t."""
        if self.provenance == "synthetic":
            bps = self.static.breakpoints + t * np.asarray(self.static_jump_speeds)
            return list(zip(bps.tolist(), self.static_jump_speeds))
        if self.provenance == "one-solution":
            st = self.u_traj.state_at(t)
            return [(f.position, f.speed) for f in st.fronts]
        raise UnsupportedCoefficientError("no jump speeds for this provenance")

    def atom_speed_at(self, t, x):
        """Coefficient seen by an atom at (t, x): on a discontinuity line it
        is the jump speed (the straightline path average), else the local value."""
        for xj, s in self.jump_speeds_at(t):
            if abs(xj - x) <= 1e-9:
                return float(s)
        return float(self.speed_field_at(t).value_at(x))


# -- Riemann problem for the linear equation ---------------------------------


@dataclass(frozen=True)
class LinearRiemannSolution:
    """Solution of the linear Riemann problem at one coefficient jump.

    ``jumps`` lists (line speed, value to the right of that line).  The shock
    case has one line carrying an atom of mass exactly t * atom_growth_rate.
    The rarefaction case has two lines bounding a zero wedge; they carry
    atoms of constant masses -fan_atom_mass and +fan_atom_mass.
    """

    kind: str  # "jump" or "fan"
    psi_left: float
    psi_right: float
    jumps: tuple
    atom_growth_rate: float = 0.0
    atom_speed: float = 0.0
    edge_atoms: tuple = ()

    def field_at(self, t):
        vals = [self.psi_left] + [v for _, v in self.jumps]
        bps = [s * t for s, _ in self.jumps]
        atoms = []
        if self.kind == "jump" and self.atom_growth_rate != 0.0 and t > 0.0:
            atoms.append((self.atom_speed * t, t * self.atom_growth_rate))
        if self.kind == "fan" and t > 0.0:
            atoms.extend((s * t, m) for s, m in self.edge_atoms if m != 0.0)
        if t == 0.0:
            bps = _strictify(bps)
        return MeasureField(PiecewiseConstantField(np.asarray(bps), np.asarray(vals)),
                            tuple(atoms))


def _strictify(bps):
    out = list(bps)
    for i in range(1, len(out)):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    return out


def riemann_linear(psi_left, psi_right, a_minus, a_plus, jump_speed,
                   fan_atom_mass=None):
    """Solve the Riemann problem at one classified coefficient jump.

    Compressive and undercompressive jumps produce the single-line solution
    with an atom growing at rate C_r - C_l, where C = (jump_speed - a) psi on
    each side; the atom vanishes exactly when C_l = C_r.  A rarefaction-shock
    coefficient has a one-parameter family of solutions: the caller must pick
    fan_atom_mass (0 selects the bounded-variation branch), otherwise
    NonuniquenessError is raised.
    """
    cls = classify_jump(a_minus, a_plus, jump_speed)
    if cls.kind is JumpKind.RAREFACTION_SHOCK and not cls.degenerate:
        if fan_atom_mass is None:
            raise NonuniquenessError(
                "rarefaction-shock coefficient: choose fan_atom_mass explicitly"
            )
        phi = float(fan_atom_mass)
        jumps = ((float(a_minus), 0.0), (float(a_plus), float(psi_right)))
        edge_atoms = ((float(a_minus), -phi), (float(a_plus), +phi))
        return LinearRiemannSolution("fan", float(psi_left), float(psi_right),
                                     jumps, 0.0, 0.0, edge_atoms)
    c_left = (jump_speed - a_minus) * psi_left
    c_right = (jump_speed - a_plus) * psi_right
    return LinearRiemannSolution(
        "jump", float(psi_left), float(psi_right),
        ((float(jump_speed), float(psi_right)),),
        float(c_right - c_left), float(jump_speed),
    )


# -- Cauchy evolution along generalized characteristics ----------------------


class _Marker:
    """Moving boundary of the piecewise-constant psi: either a coefficient
    front (with an atom slot) or a plain characteristic breakpoint."""

    __slots__ = ("x", "speed", "is_front", "a_minus", "a_plus", "kind", "mass")

    def __init__(self, x, speed, is_front, a_minus=0.0, a_plus=0.0, kind=None):
        self.x = x
        self.speed = speed
        self.is_front = is_front
        self.a_minus = a_minus
        self.a_plus = a_plus
        self.kind = kind
        self.mass = 0.0


@dataclass(frozen=True, eq=False)
class TransportSolution:
    """Trajectory of measure fields plus the measured mass amplification."""

    times: tuple
    states: tuple
    mass_bound: float
    atom_rows: tuple  # (t, x, mass) per carried atom per recorded time

    def state_at(self, t):
        idx = max(int(np.searchsorted(self.times, t + 1e-12)) - 1, 0)
        return self.states[idx]

    def to_jsonl(self, path):
        import json
        with open(path, "w") as fh:
            for t, st in zip(self.times, self.states):
                fh.write(json.dumps({"t": t, **st.to_json()}) + "\n")

    def atoms_to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,x_atom,mass\n")
            for t, x, m in self.atom_rows:
                fh.write(f"{t!r},{x!r},{m!r}\n")


def solve_linear_cauchy(coefficient, psi0, t_max, mass_bound_limit=10.0,
                        classify_tol=1e-10, event_budget=100000, record_times=()):
    """Forward-track a bounded measure along the characteristics of u.

    The coefficient must have one-solution provenance (a = f'(u) for a
    front-tracking entropy solution u).  Compressive fronts absorb adjacent
    mass into atoms whose growth rate is recomputed whenever a trace changes;
    rarefaction slices open zero-filled wedges (the bounded-variation
    branch); undercompressive fronts transmit with the flux-matching factor.
    Extra snapshot times can be requested through ``record_times``.  Raises
    MassBoundError when the measured amplification of the total mass norm
    exceeds ``mass_bound_limit``.
    """
    if coefficient.provenance == "two-solutions":
        raise UnsupportedCoefficientError(
            "two-solution coefficients are handled by the stability module"
        )
    if coefficient.provenance != "one-solution":
        raise UnsupportedCoefficientError("Cauchy evolution needs a one-solution coefficient")

    flux = coefficient.flux
    traj = coefficient.u_traj
    markers, values, free_atoms = _initial_configuration(flux, traj, psi0, classify_tol)

    times = [0.0]
    states = [_measure_state(markers, values, free_atoms)]
    atom_rows = list(_atom_rows(0.0, markers, free_atoms))
    psi0_norm = _mass_norm(states[0])
    worst = 1.0 if psi0_norm > 0.0 else float("nan")

    def record(t):
        nonlocal worst
        times.append(t)
        state = _measure_state(markers, values, free_atoms)
        states.append(state)
        atom_rows.extend(_atom_rows(t, markers, free_atoms))
        if psi0_norm > 0.0:
            worst = max(worst, _mass_norm(state) / psi0_norm)
            if worst > mass_bound_limit:
                raise MassBoundError(
                    f"mass amplification {worst:.3f} at t={t:.6g} exceeds {mass_bound_limit}"
                )

    edges = {float(t_max)}
    for t in list(traj.times) + [float(t) for t in record_times]:
        if 1e-14 < t < t_max - 1e-14:
            edges.add(float(t))
    t_now = 0.0
    events = 0

    for t_end in sorted(edges):
        while t_now < t_end - 1e-14:
            dt, hit = _next_event(markers, free_atoms, t_end - t_now)
            step = (t_end - t_now) if dt is None else dt
            _apply_rates(markers, values, step)
            _advance(markers, free_atoms, step)
            t_now += step
            if dt is None:
                break
            _process_hit(markers, values, free_atoms, hit)
            events += 1
            if events > event_budget:
                raise TracingError(f"event budget exhausted at t={t_now:.6g}")
            record(t_now)
        if t_end >= t_max - 1e-14:
            break
        # Front interactions rebuild the marker set; plain snapshot times no-op.
        new_state = traj.state_at(t_now + 1e-13)
        _rebuild_fronts(markers, values, free_atoms, new_state, flux, classify_tol)
        record(t_now)

    if times[-1] < t_max - 1e-14 or len(times) == 1:
        record(t_max)
    return TransportSolution(tuple(times), tuple(states), worst, tuple(atom_rows))


def _mass_norm(state):
    total = sum(abs(m) for _, m in state.atoms)
    bv = state.bv
    if bv.breakpoints.size:
        total += float(np.dot(np.diff(bv.breakpoints), np.abs(bv.values[1:-1])))
    return total


def _front_marker(flux, front, classify_tol):
    am = float(flux.jacobian(front.left))
    ap = float(flux.jacobian(front.right))
    cls = classify_jump(am, ap, front.speed, tol=classify_tol)
    return _Marker(front.position, front.speed, True, am, ap, cls.kind)


def _initial_configuration(flux, traj, psi0, classify_tol):
    fronts = sorted((_front_marker(flux, f, classify_tol) for f in traj.states[0].fronts),
                    key=lambda m: (m.x, m.speed))

    # Weave psi0 breakpoints around the fronts; a breakpoint landing on a
    # front (within tolerance) is carried by the front's traces instead.
    markers = []
    values = [float(psi0.bv.values[0])]
    bps = psi0.bv.breakpoints
    bvals = psi0.bv.values
    bj = 0
    for m in fronts:
        while bj < bps.size and bps[bj] < m.x - POSITION_ATOL:
            markers.append(_Marker(float(bps[bj]), 0.0, False))
            values.append(float(bvals[bj + 1]))
            bj += 1
        while bj < bps.size and abs(bps[bj] - m.x) <= POSITION_ATOL:
            bj += 1
        markers.append(m)
        values.append(float(bvals[bj]))
    while bj < bps.size:
        markers.append(_Marker(float(bps[bj]), 0.0, False))
        values.append(float(bvals[bj + 1]))
        bj += 1

    u_field = traj.states[0].to_field()
    for m in markers:
        if not m.is_front:
            m.speed = float(flux.jacobian(u_field.value_at(m.x)))

    free_atoms = []
    for x, mass in psi0.atoms:
        host = next((m for m in markers
                     if m.is_front and abs(m.x - x) <= POSITION_ATOL), None)
        if host is not None:
            host.mass += float(mass)
        else:
            free_atoms.append([float(x), float(mass),
                               float(flux.jacobian(u_field.value_at(x)))])

    _nucleate(markers, values, [i for i, m in enumerate(markers) if m.is_front])
    return markers, values, free_atoms


def _transmit(trace, a_from, a_to, lam):
    if abs(a_to - lam) <= CONTACT_ATOL:
        return trace
    return trace * (a_from - lam) / (a_to - lam)


def _nucleate(markers, values, front_indices):
    """Insert the streams emitted by freshly created fronts.

    A side emits when its characteristics move away from the front there:
    rarefaction slices emit the zero (bounded-variation) branch on both
    sides, slow undercompressive fronts emit the transmitted trace to the
    right, fast ones to the left.  Compressive fronts absorb and emit
    nothing.  Indices are processed right to left so insertions stay valid.
    """
    for i in sorted(front_indices, reverse=True):
        m = markers[i]
        if not m.is_front:
            continue
        lam = m.speed
        if m.a_plus > lam + CONTACT_ATOL:
            val = 0.0 if m.kind is JumpKind.RAREFACTION_SHOCK \
                else _transmit(values[i], m.a_minus, m.a_plus, lam)
            if val != values[i + 1]:
                markers.insert(i + 1, _Marker(m.x, m.a_plus, False))
                values.insert(i + 1, val)
        if m.a_minus < lam - CONTACT_ATOL:
            val = 0.0 if m.kind is JumpKind.RAREFACTION_SHOCK \
                else _transmit(values[i + 1], m.a_plus, m.a_minus, lam)
            if val != values[i]:
                markers.insert(i, _Marker(m.x, m.a_minus, False))
                values.insert(i + 1, val)


def _next_event(markers, free_atoms, horizon):
    """Earliest breakpoint-front or atom-front hit within the horizon."""
    cands = []
    for i, m in enumerate(markers):
        if m.is_front:
            continue
        if i > 0 and markers[i - 1].is_front:
            f = markers[i - 1]
            closing = f.speed - m.speed
            gap = m.x - f.x
            if closing > 1e-14 and gap > POSITION_ATOL:
                cands.append((gap / closing, m.x, ("bp", i, i - 1)))
        if i + 1 < len(markers) and markers[i + 1].is_front:
            f = markers[i + 1]
            closing = m.speed - f.speed
            gap = f.x - m.x
            if closing > 1e-14 and gap > POSITION_ATOL:
                cands.append((gap / closing, m.x, ("bp", i, i + 1)))
    for ai, (x, _, speed) in enumerate(free_atoms):
        for j, f in enumerate(markers):
            if not f.is_front:
                continue
            gap = abs(f.x - x)
            closing = (speed - f.speed) if f.x >= x else (f.speed - speed)
            if closing > 1e-14 and gap > POSITION_ATOL:
                cands.append((gap / closing, x, ("atom", ai, j)))
    cands = [c for c in cands if c[0] <= horizon + 1e-14]
    if not cands:
        return None, None
    cands.sort(key=lambda c: (c[0], c[1]))
    return cands[0][0], cands[0][2]


def _apply_rates(markers, values, dt):
    for i, m in enumerate(markers):
        if m.is_front:
            c_left = (m.speed - m.a_minus) * values[i]
            c_right = (m.speed - m.a_plus) * values[i + 1]
            m.mass += (c_right - c_left) * dt


def _advance(markers, free_atoms, dt):
    for m in markers:
        m.x += m.speed * dt
    for a in free_atoms:
        a[0] += a[2] * dt


def _process_hit(markers, values, free_atoms, hit):
    kind, i, j = hit
    if kind == "atom":
        x, mass, speed = free_atoms.pop(i)
        f = markers[j]
        if f.kind is JumpKind.SLOW_UNDERCOMPRESSIVE and speed > f.speed:
            free_atoms.append([f.x, mass, f.a_plus])
        elif f.kind is JumpKind.FAST_UNDERCOMPRESSIVE and speed < f.speed:
            free_atoms.append([f.x, mass, f.a_minus])
        else:
            f.mass += mass
        return

    f = markers[j]
    if j == i + 1:
        # Breakpoint absorbed from the left: drop it and the old left trace.
        del markers[i]
        del values[i + 1]
        fi = i
        if f.a_plus > f.speed + CONTACT_ATOL and f.kind is not JumpKind.RAREFACTION_SHOCK:
            val = _transmit(values[fi], f.a_minus, f.a_plus, f.speed)
            if val != values[fi + 1]:
                markers.insert(fi + 1, _Marker(f.x, f.a_plus, False))
                values.insert(fi + 1, val)
    else:
        # Absorbed from the right: drop the breakpoint and the old right trace.
        del markers[i]
        del values[i]
        fi = i - 1
        if f.a_minus < f.speed - CONTACT_ATOL and f.kind is not JumpKind.RAREFACTION_SHOCK:
            val = _transmit(values[fi + 1], f.a_plus, f.a_minus, f.speed)
            if val != values[fi]:
                markers.insert(fi, _Marker(f.x, f.a_minus, False))
                values.insert(fi + 1, val)


def _rebuild_fronts(markers, values, free_atoms, new_state, flux, classify_tol):
    """Match surviving fronts, merge the dead group, nucleate the newborn."""
    new_fronts = list(new_state.fronts)
    used = [False] * len(new_fronts)
    dead = []
    for i, m in enumerate(markers):
        if not m.is_front:
            continue
        for k, f in enumerate(new_fronts):
            if not used[k] and abs(f.position - m.x) <= 1e-9 \
                    and abs(f.speed - m.speed) <= 1e-9:
                used[k] = True
                break
        else:
            dead.append(i)
    born = [k for k in range(len(new_fronts)) if not used[k]]
    if not dead and not born:
        return
    if not dead:
        raise TracingError("front appeared without an interaction")

    lo, hi = min(dead), max(dead)
    for i in range(lo, hi + 1):
        if not markers[i].is_front:
            raise TracingError(
                f"breakpoint trapped between colliding fronts near x={markers[i].x:.6g}"
            )
    x_c = markers[lo].x
    merged_mass = sum(markers[i].mass for i in range(lo, hi + 1))
    del markers[lo:hi + 1]
    del values[lo + 1:hi + 1]

    newborn = [
        _front_marker(flux, new_fronts[k], classify_tol)
        for k in sorted(born, key=lambda k: new_fronts[k].speed)
    ]
    for nm in newborn:
        nm.x = x_c

    if not newborn:
        # Pure cancellation: the psi jump survives as a contact line, and any
        # accumulated mass rides along it as a free atom.
        speed = float(flux.jacobian(new_state.to_field().value_at(x_c)))
        markers.insert(lo, _Marker(x_c, speed, False))
        if merged_mass != 0.0:
            free_atoms.append([x_c, merged_mass, speed])
        return

    for offset, nm in enumerate(newborn):
        markers.insert(lo + offset, nm)
        if offset > 0:
            values.insert(lo + offset, values[lo])  # provisional gap value

    absorbers = [nm for nm in newborn if nm.kind is JumpKind.COMPRESSIVE]
    if absorbers:
        absorbers[0].mass += merged_mass
    elif merged_mass != 0.0:
        free_atoms.append([x_c, merged_mass, newborn[0].a_minus])

    _fill_gaps(markers, values, lo, lo + len(newborn) - 1)
    _nucleate(markers, values, list(range(lo, lo + len(newborn))))


def _fill_gaps(markers, values, lo, hi):
    """Values between co-born fronts: emitted streams or the zero branch.

    At most one flank of each gap can emit (speeds are ordered), so a single
    left-to-right pass suffices; squeezed gaps copy the nearest trace.
    """
    for i in range(lo, hi):
        m = markers[i]
        nxt = markers[i + 1]
        if m.kind is JumpKind.RAREFACTION_SHOCK:
            values[i + 1] = 0.0
        elif m.a_plus > m.speed + CONTACT_ATOL:
            values[i + 1] = _transmit(values[i], m.a_minus, m.a_plus, m.speed)
        elif nxt.kind is JumpKind.RAREFACTION_SHOCK:
            values[i + 1] = 0.0
        elif nxt.a_minus < nxt.speed - CONTACT_ATOL:
            values[i + 1] = _transmit(values[i + 2], nxt.a_plus, nxt.a_minus, nxt.speed)
        else:
            values[i + 1] = values[i]


def _measure_state(markers, values, free_atoms):
    bps = _strictify([m.x for m in markers])
    atoms = {}
    for m in markers:
        if m.is_front and m.mass != 0.0:
            atoms[m.x] = atoms.get(m.x, 0.0) + m.mass
    for x, mass, _ in free_atoms:
        atoms[x] = atoms.get(x, 0.0) + mass
    return MeasureField(PiecewiseConstantField(np.asarray(bps), np.asarray(values)),
                        tuple(sorted(atoms.items())))


def _atom_rows(t, markers, free_atoms):
    for m in markers:
        if m.is_front and m.mass != 0.0:
            yield (t, m.x, m.mass)
    for x, mass, _ in free_atoms:
        if mass != 0.0:
            yield (t, x, mass)


# -- Volpert products ---------------------------------------------------------


def volpert_product(g, u, psi, quad_order=32):
    """Product measure of a derivative evaluator g against u and psi.

    On continuity intervals of u the density is g(u) psi.  Each jump of u
    contributes an atom: the straightline path integral of g(path) d(path)
    scaled by the symmetric BV trace of psi, plus the plain parameter
    average of g applied to any psi atom placed exactly on the jump.  Atoms
    within 1e-12 of a breakpoint without being exactly on it raise
    AmbiguousPlacementError rather than being snapped.
    """
    nodes, weights = np.polynomial.legendre.leggauss(int(quad_order))
    s = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    scalar = u.dim == 1

    atom_map = {}
    for x, mass in psi.atoms:
        on_jump = u.breakpoints.size and bool(np.any(u.breakpoints == x))
        near = u.breakpoints.size and bool(np.any(np.abs(u.breakpoints - x) <= 1e-12))
        if near and not on_jump:
            raise AmbiguousPlacementError(
                f"atom at x={x!r} sits within 1e-12 of a breakpoint of u; "
                "place it exactly on the breakpoint to declare coincidence"
            )
        atom_map[x] = mass

    xs, u_vals, psi_vals = merge_partitions(u, psi.bv)
    if scalar:
        dens = np.asarray([float(g(uv)) * pv for uv, pv in zip(u_vals, psi_vals)])
    else:
        dens = np.asarray([np.asarray(g(uv), dtype=float) @ np.asarray(pv, dtype=float)
                           for uv, pv in zip(u_vals, psi_vals)])
    density = PiecewiseConstantField(xs, dens)

    atoms = []
    for x, ul, ur in u.jumps():
        trace = 0.5 * (np.asarray(psi.bv.value_at(x, "left"), dtype=float)
                       + np.asarray(psi.bv.value_at(x, "right"), dtype=float))
        du = np.asarray(ur, dtype=float) - np.asarray(ul, dtype=float)
        if scalar:
            g_path = np.array([float(g(ul + si * du)) for si in s])
            mass = float(np.dot(w, g_path)) * float(du) * float(trace)
            if x in atom_map:
                mass += float(np.dot(w, g_path)) * float(atom_map.pop(x))
            if mass != 0.0:
                atoms.append((float(x), mass))
        else:
            if float(np.max(np.abs(trace))) > 0.0:
                raise NotImplementedError(
                    "vector-valued traces at coefficient jumps are not supported"
                )
            if x in atom_map:
                avg = np.zeros((2, 2))
                for si, wi in zip(s, w):
                    avg += wi * np.asarray(g(np.asarray(ul) + si * du), dtype=float)
                mass = avg @ np.asarray(atom_map.pop(x), dtype=float)
                if np.any(np.abs(mass) > 0.0):
                    atoms.append((float(x), mass))

    for x, m0 in atom_map.items():
        if scalar:
            val = float(g(u.value_at(x))) * float(m0)
        else:
            val = np.asarray(g(u.value_at(x)), dtype=float) @ np.asarray(m0, dtype=float)
        atoms.append((float(x), val))

    atoms.sort(key=lambda a: a[0])
    return MeasureField(density, tuple(atoms))


# -- weak-form residuals -------------------------------------------------------


@dataclass(frozen=True)
class SmoothBump:
    """Compactly supported C-infinity test function on a space-time box."""

    t0: float
    x0: float
    st: float
    sx: float

    @staticmethod
    def _b(r):
        r = np.asarray(r, dtype=float)
        q = 1.0 - r * r
        safe = np.where(q > 0.0, q, 1.0)
        return np.where(q > 0.0, np.exp(1.0 - 1.0 / safe), 0.0)

    @staticmethod
    def _db(r):
        r = np.asarray(r, dtype=float)
        q = 1.0 - r * r
        safe = np.where(q > 0.0, q, 1.0)
        return np.where(q > 0.0, np.exp(1.0 - 1.0 / safe) * (-2.0 * r / (safe * safe)), 0.0)

    def value(self, t, x):
        return self._b((t - self.t0) / self.st) * self._b((x - self.x0) / self.sx)

    def dt(self, t, x):
        return self._db((t - self.t0) / self.st) / self.st * self._b((x - self.x0) / self.sx)

    def dx(self, t, x):
        return self._b((t - self.t0) / self.st) * self._db((x - self.x0) / self.sx) / self.sx


def weak_form_residual(psi_at, coefficient, test, n_time=80, gauss_order=10,
                       x_cells=40):
    """Residual of the weak form against one compactly supported test function.

    psi_at(t) must return a MeasureField.  The integrand pairs d/dt of the
    test function with psi and d/dx with the flux measure a psi, whose atom
    coefficient is the jump speed on discontinuity lines.  The x-integral is
    exact per constant piece (composite Gauss); zero for weak solutions up to
    quadrature error.
    """
    nodes, weights = np.polynomial.legendre.leggauss(int(gauss_order))
    t_lo, t_hi = test.t0 - test.st, test.t0 + test.st
    x_lo, x_hi = test.x0 - test.sx, test.x0 + test.sx

    total = 0.0
    t_edges = np.linspace(t_lo, t_hi, int(n_time) + 1)
    max_cell = (x_hi - x_lo) / x_cells
    for ta, tb in zip(t_edges[:-1], t_edges[1:]):
        mid, half = 0.5 * (ta + tb), 0.5 * (tb - ta)
        for tn, tw in zip(nodes, weights):
            t = mid + half * tn
            psi = psi_at(t)
            coeff_field = coefficient.speed_field_at(t)
            cuts = np.union1d(psi.bv.breakpoints, coeff_field.breakpoints)
            cuts = np.concatenate([[x_lo], cuts[(cuts > x_lo) & (cuts < x_hi)], [x_hi]])
            inner = 0.0
            for xa, xb in zip(cuts[:-1], cuts[1:]):
                pv = float(psi.bv.value_at(0.5 * (xa + xb)))
                if pv == 0.0:
                    continue
                av = float(coeff_field.value_at(0.5 * (xa + xb)))
                n_sub = max(1, int(np.ceil((xb - xa) / max_cell)))
                sub = np.linspace(xa, xb, n_sub + 1)
                xm = 0.5 * (sub[:-1] + sub[1:])
                xh = 0.5 * (sub[1:] - sub[:-1])
                for xn, xw in zip(nodes, weights):
                    xs = xm + xh * xn
                    inner += float(np.sum(xh * xw * (test.dt(t, xs) + av * test.dx(t, xs)))) * pv
            for x_at, mass in psi.atoms:
                if x_lo < x_at < x_hi:
                    a_at = coefficient.atom_speed_at(t, x_at)
                    inner += float(mass) * float(test.dt(t, x_at) + a_at * test.dx(t, x_at))
            total += half * tw * inner
    return total
