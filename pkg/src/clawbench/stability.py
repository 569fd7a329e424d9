"""Sharp L1 stability machinery: decay terms, characteristic fluxes, weights.

The decay ledger accumulates the quadratic term (over compressive jumps of
the averaged speed) and the cubic term (over undercompressive jumps plus the
absolutely continuous part of the coefficient variation, approximated by the
front-tracking rarefaction slices).  The characteristic flux and dominance
audits check the sign structure that drives the weighted-norm decay for 2x2
systems, and the weight evolution realizes a concrete decreasing weighted
norm for scalar coefficient pairs.
"""

from dataclasses import dataclass, field

import numpy as np

from .classify import JumpKind, JumpRecord, classify_jump
from .errors import (
    IllConditionedBasisError,
    InvalidWeightError,
    WeightBudgetError,
)
from .fields import PiecewiseConstantField, l1_distance, merge_partitions
from .fluxes import average_speed
from .systems import averaged_matrix
from .wavefronts import SHOCK, SLICE

# -- decay ledger -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DecayLedger:
    """Running L1 norm and decay integrals along a trajectory pair.

    ``quadratic`` and ``cubic`` are the cumulative decay terms driven by
    compressive and undercompressive jumps respectively; ``stability_ratio``
    tracks (l1 + quadratic + cubic) / l1(0).  ``interval_items`` itemizes the
    per-interval rates by jump record.
    """

    times: np.ndarray
    l1: np.ndarray
    quadratic: np.ndarray
    cubic: np.ndarray
    stability_ratio: np.ndarray
    interval_items: tuple
    trivial: bool = False

    @property
    def final_ratio(self):
        return float(self.stability_ratio[-1]) if not self.trivial else float("nan")

    def monotone_terms(self):
        return bool(np.all(np.diff(self.quadratic) >= -1e-15)
                    and np.all(np.diff(self.cubic) >= -1e-15))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,l1,D2,D3,K\n")
            for row in zip(self.times, self.l1, self.quadratic, self.cubic,
                           self.stability_ratio):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _pair_jump_items(u_state, v_state, flux):
    """Rates of the decay terms from one merged front configuration.

    Returns (records, quad_rate, cubic_rate): shock fronts of either solution
    feed the compressive or undercompressive sums with the left trace of
    psi = v - u; rarefaction slices approximate the absolutely continuous
    coefficient variation and feed the integral term of the cubic sum.
    """
    u_field = u_state.to_field()
    v_field = v_state.to_field()
    t = u_state.time
    quad = 0.0
    cub = 0.0
    records = []

    for state, other_state, from_u in ((u_state, v_state, True),
                                       (v_state, u_state, False)):
        other = other_state.to_field()
        own = u_field if from_u else v_field
        for f in state.fronts:
            x = f.position
            twin = next((g for g in other_state.fronts
                         if abs(g.position - x) <= 1e-11), None)
            if twin is not None and not from_u:
                continue  # coincident pair handled from the u side
            if twin is not None and abs(twin.speed - f.speed) > 1e-11:
                continue  # transversal crossing instant
            if twin is not None:
                o_minus, o_plus = float(twin.left), float(twin.right)
            else:
                o_minus = o_plus = float(other.value_at(x))
            if from_u:
                a_minus = average_speed(flux, float(f.left), o_minus)
                a_plus = average_speed(flux, float(f.right), o_plus)
                psi_minus = o_minus - float(f.left)
                u_trace = float(f.left)
            else:
                a_minus = average_speed(flux, o_minus, float(f.left))
                a_plus = average_speed(flux, o_plus, float(f.right))
                psi_minus = float(f.left) - o_minus
                u_trace = o_minus
            if f.kind == SLICE:
                # Continuous part: |a - f'(u)| |psi| against the slice's share
                # of the coefficient variation.
                rate = abs(a_minus - float(flux.jacobian(u_trace))) * abs(psi_minus) \
                    * abs(a_plus - a_minus)
                cub += rate
                continue
            cls = classify_jump(a_minus, a_plus, f.speed)
            rec = JumpRecord(t, x, a_minus, a_plus, f.speed, 1, cls)
            if cls.kind is JumpKind.COMPRESSIVE:
                rate = abs(f.speed - a_minus) * abs(psi_minus)
                quad += rate
            elif cls.kind in (JumpKind.SLOW_UNDERCOMPRESSIVE,
                              JumpKind.FAST_UNDERCOMPRESSIVE):
                rate = abs(a_minus - f.speed) * abs(a_plus - a_minus) * abs(psi_minus)
                cub += rate
            else:
                rate = 0.0
            records.append((rec, rate))
    return records, quad, cub


def decay_terms_scalar(u_traj, v_traj, flux, t_max):
    """Decay ledger for psi = v - u along a front-tracking pair.

    Both decay terms are running time integrals accumulated with
    per-interval rates evaluated at interval midpoints of the merged event
    partition; they are nondecreasing by construction.  A zero initial
    distance yields the trivial ledger.
    """
    t_all = sorted({t for t in (set(u_traj.times) | set(v_traj.times) | {t_max})
                    if t <= t_max + 1e-12})
    l1_0 = l1_distance(u_traj.field_at(0.0), v_traj.field_at(0.0))
    trivial = l1_0 == 0.0

    times = [0.0]
    l1s = [l1_0]
    quads = [0.0]
    cubs = [0.0]
    items = []
    for a, b in zip(t_all[:-1], t_all[1:]):
        if b - a <= 1e-13:
            continue
        mid = 0.5 * (a + b)
        recs, qr, cr = _pair_jump_items(u_traj.state_at(mid), v_traj.state_at(mid), flux)
        dt = b - a
        times.append(b)
        l1s.append(l1_distance(u_traj.field_at(b), v_traj.field_at(b)))
        quads.append(quads[-1] + qr * dt)
        cubs.append(cubs[-1] + cr * dt)
        items.append(((a, b), recs))

    times = np.asarray(times)
    l1s = np.asarray(l1s)
    quads = np.asarray(quads)
    cubs = np.asarray(cubs)
    if trivial:
        ratio = np.full_like(times, np.nan)
    else:
        ratio = (l1s + quads + cubs) / l1_0
    return DecayLedger(times, l1s, quads, cubs, ratio, tuple(items), trivial)


# -- characteristic components and fluxes -------------------------------------


def characteristic_components(psi, basis, det_tol=1e-10):
    """Components of a state in an eigenbasis (columns of ``basis.right``).

    The duals are the inverse rows, so reconstruction is exact to solver
    accuracy.  Raises IllConditionedBasisError when the basis determinant is
    below tolerance.
    """
    right = basis.right if hasattr(basis, "right") else np.asarray(basis, dtype=float)
    det = np.linalg.det(right)
    if abs(det) <= det_tol:
        raise IllConditionedBasisError(f"basis determinant {det:.3e} below {det_tol}")
    return np.linalg.solve(right, np.asarray(psi, dtype=float))


@dataclass(frozen=True, eq=False)
class CharacteristicData:
    """One-sided eigen-data and traces of psi at a single jump.

    Arrays are indexed by family - 1.  ``beta_minus[j]`` and ``beta_plus[j]``
    recompute exactly as (speed - lambda_minus[j]) |alpha_minus[j]| and
    (lambda_plus[j] - speed) |alpha_plus[j]|.
    """

    family: int
    jump_speed: float
    lambda_minus: np.ndarray
    lambda_plus: np.ndarray
    alpha_minus: np.ndarray
    alpha_plus: np.ndarray
    classification: object
    matrix_jump_norm: float = 0.0
    eigvec_jump_norm: float = 0.0

    @classmethod
    def at_averaged_jump(cls, flux, u_minus, u_plus, jump_speed, v_state, family,
                         quad_order=16):
        """Construct the data at a shock (u_minus, u_plus) seen against v.

        The one-sided matrices are the averaged matrices between each trace
        and v; psi traces are v - u on each side, whose components satisfy
        the linear jump relation exactly by the averaged-matrix identity.
        """
        u_minus = np.asarray(u_minus, dtype=float)
        u_plus = np.asarray(u_plus, dtype=float)
        v_state = np.asarray(v_state, dtype=float)
        am = averaged_matrix(flux, u_minus, v_state, quad_order)
        ap = averaged_matrix(flux, u_plus, v_state, quad_order)
        alpha_m = characteristic_components(v_state - u_minus, am)
        alpha_p = characteristic_components(v_state - u_plus, ap)
        cls_i = classify_jump(am.eigenvalue(family), ap.eigenvalue(family), jump_speed)
        return cls(
            family=family,
            jump_speed=float(jump_speed),
            lambda_minus=am.eigenvalues.copy(),
            lambda_plus=ap.eigenvalues.copy(),
            alpha_minus=alpha_m,
            alpha_plus=alpha_p,
            classification=cls_i,
            matrix_jump_norm=float(np.linalg.norm(ap.matrix - am.matrix)),
            eigvec_jump_norm=float(np.linalg.norm(
                ap.right_vector(family) - am.right_vector(family))),
        )


@dataclass(frozen=True)
class FluxAudit:
    beta_minus: np.ndarray
    beta_plus: np.ndarray
    margins: np.ndarray  # per (family, side); >= 0 means the lemma sign holds
    passed: bool

    @property
    def worst_margin(self):
        return float(np.min(self.margins))


def characteristic_flux(data, tol=0.0):
    """Characteristic fluxes at a jump plus the sign-pattern audit.

    For transverse families the flux signs are fixed by which side of the
    jump the family's characteristics travel on; for the jump's own family
    the pattern encodes its classification: compressive jumps have both
    fluxes nonpositive, rarefaction shocks both nonnegative, and the
    undercompressive kinds one of each.
    """
    n = data.alpha_minus.size
    beta_m = np.array([(data.jump_speed - data.lambda_minus[j]) * abs(data.alpha_minus[j])
                       for j in range(n)])
    beta_p = np.array([(data.lambda_plus[j] - data.jump_speed) * abs(data.alpha_plus[j])
                       for j in range(n)])
    i = data.family - 1
    margins = np.zeros((n, 2))
    for j in range(n):
        if j < i:
            margins[j] = (beta_m[j], -beta_p[j])
        elif j > i:
            margins[j] = (-beta_m[j], beta_p[j])
        else:
            kind = data.classification.kind
            if kind is JumpKind.COMPRESSIVE:
                margins[j] = (-beta_m[j], -beta_p[j])
            elif kind is JumpKind.RAREFACTION_SHOCK:
                margins[j] = (beta_m[j], beta_p[j])
            elif kind is JumpKind.SLOW_UNDERCOMPRESSIVE:
                margins[j] = (-beta_m[j], beta_p[j])
            else:
                margins[j] = (beta_m[j], -beta_p[j])
    return FluxAudit(beta_m, beta_p, margins, bool(np.all(margins >= -tol)))


@dataclass(frozen=True)
class DominanceReport:
    dominant: np.ndarray          # per-family flags
    sign_margins: np.ndarray      # min |alpha| where the component lemma applies
    sign_consistent: np.ndarray   # per-family outcome of the lemma (dominant only)

    def audit_passed(self, margin=1e-8):
        check = self.dominant & (self.sign_margins > margin)
        return bool(np.all(self.sign_consistent[check]))


def dominance_test(data, kappa):
    """Dominant-family flags and the component-sign lemma audit.

    A family j is dominant when kappa |beta_j^-| covers the eigenvector jump
    times |beta_i^-| plus the matrix jump times the total flux.  For
    dominant transverse families the component sign must be preserved across
    the jump; for the jump's own family it is preserved at compressive and
    rarefaction jumps and flipped at undercompressive ones.
    """
    if kappa < 0.0:
        raise ValueError("kappa must be nonnegative")
    audit = characteristic_flux(data)
    beta_m = np.abs(audit.beta_minus)
    i = data.family - 1
    rhs = data.eigvec_jump_norm * beta_m[i] + data.matrix_jump_norm * float(np.sum(beta_m))
    dominant = kappa * beta_m >= rhs

    n = beta_m.size
    consistent = np.zeros(n, dtype=bool)
    margins = np.zeros(n)
    for j in range(n):
        sm = np.sign(data.alpha_minus[j])
        sp = np.sign(data.alpha_plus[j])
        margins[j] = min(abs(data.alpha_minus[j]), abs(data.alpha_plus[j]))
        if j != i:
            consistent[j] = sm == sp
        else:
            kind = data.classification.kind
            if kind in (JumpKind.COMPRESSIVE, JumpKind.RAREFACTION_SHOCK):
                consistent[j] = sm == sp
            else:
                consistent[j] = sm == -sp
    return DominanceReport(dominant, margins, consistent)


# -- weighted norms ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightField:
    """Per-family piecewise-constant weights with global bounds."""

    fields: tuple
    w_min: float
    w_max: float

    def __post_init__(self):
        if not 0.0 < self.w_min <= self.w_max:
            raise InvalidWeightError("need 0 < w_min <= w_max")
        for fld in self.fields:
            vals = np.asarray(fld.values, dtype=float)
            if np.any(vals < self.w_min - 1e-12) or np.any(vals > self.w_max + 1e-12):
                raise InvalidWeightError("weight values leave the declared bounds")

    @classmethod
    def uniform(cls, families=1, w_min=0.5, w_max=2.0, value=1.0):
        return cls(tuple(PiecewiseConstantField.constant(value)
                         for _ in range(families)), w_min, w_max)


def weighted_norm(component_fields, weight):
    """Exact integral of sum_j |alpha_j(x)| w_j(x) over the line.

    ``component_fields`` holds one scalar field per family; components must
    vanish at infinity.  The result is sandwiched between w_min and w_max
    times the plain L1 norm.
    """
    fields = list(component_fields)
    if len(fields) != len(weight.fields):
        raise ValueError("one component field per weight family required")
    total = 0.0
    for alpha, w in zip(fields, weight.fields):
        if abs(float(np.asarray(alpha.values[0]))) > 1e-12 \
                or abs(float(np.asarray(alpha.values[-1]))) > 1e-12:
            raise InvalidWeightError("component fields must vanish at infinity")
        xs, av, wv = merge_partitions(alpha, w)
        if xs.size > 1:
            total += float(np.dot(np.diff(xs), np.abs(av[1:-1]) * wv[1:-1]))
    return total


# -- weight evolution for scalar coefficient pairs -----------------------------


class _WMarker:
    __slots__ = ("x", "speed", "is_front", "a_minus", "a_plus", "kind", "strength",
                 "source")

    def __init__(self, x, speed, is_front, a_minus=0.0, a_plus=0.0, kind=None,
                 strength=0.0, source=None):
        self.x = x
        self.speed = speed
        self.is_front = is_front
        self.a_minus = a_minus
        self.a_plus = a_plus
        self.kind = kind
        self.strength = strength
        self.source = source


@dataclass(frozen=True, eq=False)
class WeightEvolution:
    times: np.ndarray
    weight_fields: tuple
    weighted_norms: np.ndarray
    max_increase: float
    clamp_events: int
    bounds: tuple

    def weight_at(self, t):
        idx = max(int(np.searchsorted(self.times, t + 1e-12)) - 1, 0)
        return self.weight_fields[idx]


def evolve_weights(coefficient, psi_traj=None, params=None):
    """Evolve multiplicative weights along a two-solution scalar coefficient.

    Weights start at one, ride the characteristics of the averaged speed, and
    are multiplied by (1 - bump * strength) whenever they cross an
    undercompressive shock of the coefficient, which makes each crossing's
    weighted flux contribution nonpositive (the transmitted flux balances the
    incoming one exactly, so shrinking the downstream weight can only help).
    Rarefaction slices are transparent: the skeleton keeps shock fronts only,
    which bounds the event count and costs the audit an O(delta) slack.

    Returns the weight trajectory and the decay audit of the weighted norm of
    psi = v - u at event times.
    """
    if coefficient.provenance != "two-solutions":
        raise InvalidWeightError("weight evolution needs a two-solution coefficient")
    params = dict(params or {})
    w_min = float(params.get("w_min", 0.25))
    w_max = float(params.get("w_max", 2.0))
    bump = float(params.get("bump", 0.1))
    if not (w_min <= 1.0 <= w_max):
        raise InvalidWeightError("bounds must straddle the initial weight 1")

    flux = coefficient.flux
    u_traj = coefficient.u_traj
    v_traj = coefficient.v_traj
    t_max = min(u_traj.times[-1], v_traj.times[-1])

    tv_coeff = _coefficient_tv(flux, u_traj, v_traj, 0.0)
    if bump <= 0.0 or bump * tv_coeff >= (w_max - w_min) / w_max:
        # A coefficient with no variation at all is trivially admissible.
        raise InvalidWeightError(
            f"bump * TV(coefficient) = {bump * tv_coeff:.3f} outside "
            f"(0, {(w_max - w_min) / w_max:.3f})"
        )

    markers = _skeleton(flux, u_traj, v_traj, 0.0)
    values = [1.0] * (len(markers) + 1)
    clamps = [0]

    def emit(front, trace):
        if front.kind is JumpKind.RAREFACTION_SHOCK:
            return trace
        w = trace * (1.0 - bump * front.strength)
        if w < w_min:
            clamps[0] += 1
            w = w_min
            if _crossing_flux_positive(front, trace, w):
                raise WeightBudgetError("clamped weight cannot keep the flux nonpositive")
        return w

    _w_nucleate(markers, values, range(len(markers)), emit)

    times = [0.0]
    snapshots = [_weight_field(markers, values)]
    norms = [_weighted_l1(u_traj, v_traj, 0.0, snapshots[-1])]

    slab_edges = sorted({t for t in (set(u_traj.times) | set(v_traj.times) | {t_max})
                         if 1e-14 < t <= t_max + 1e-12})
    t_now = 0.0
    for t_end in slab_edges:
        while t_now < t_end - 1e-14:
            dt, hit = _w_next_event(markers, t_end - t_now)
            step = (t_end - t_now) if dt is None else dt
            for m in markers:
                m.x += m.speed * step
            t_now += step
            if dt is None:
                break
            _w_process(markers, values, hit, emit, flux, u_traj, v_traj, t_now)
            times.append(t_now)
            snapshots.append(_weight_field(markers, values))
            norms.append(_weighted_l1(u_traj, v_traj, t_now, snapshots[-1]))
        if t_now >= t_max - 1e-12:
            break
        _w_rebuild(markers, values, flux, u_traj, v_traj, t_now, emit)
        times.append(t_now)
        snapshots.append(_weight_field(markers, values))
        norms.append(_weighted_l1(u_traj, v_traj, t_now, snapshots[-1]))

    if times[-1] < t_max - 1e-12:
        for m in markers:
            m.x += m.speed * (t_max - times[-1])
        times.append(t_max)
        snapshots.append(_weight_field(markers, values))
        norms.append(_weighted_l1(u_traj, v_traj, t_max, snapshots[-1]))

    norms_arr = np.asarray(norms)
    increases = np.diff(norms_arr)
    max_inc = float(np.max(increases)) if increases.size else 0.0
    return WeightEvolution(np.asarray(times), tuple(snapshots), norms_arr,
                           max_inc, clamps[0], (w_min, w_max))


def _crossing_flux_positive(front, w_in, w_out, tol=1e-12):
    scale = abs(front.a_minus - front.speed) + abs(front.a_plus - front.speed)
    return scale * (w_out - w_in) > tol * max(1.0, scale)


def _coefficient_tv(flux, u_traj, v_traj, t):
    u = u_traj.field_at(t)
    v = v_traj.field_at(t)
    xs, uv, vv = merge_partitions(u, v)
    a = np.array([average_speed(flux, float(a_), float(b_)) for a_, b_ in zip(uv, vv)])
    return float(np.sum(np.abs(np.diff(a)))) if a.size > 1 else 0.0


def _skeleton(flux, u_traj, v_traj, t):
    """Shock fronts of both solutions with their averaged-speed traces."""
    u_state = u_traj.state_at(t)
    v_state = v_traj.state_at(t)
    u_field = u_state.to_field()
    v_field = v_state.to_field()
    markers = []
    for state, other, from_u in ((u_state, v_field, True), (v_state, u_field, False)):
        for f in state.fronts:
            if f.kind != SHOCK:
                continue
            o = float(other.value_at(f.position))
            if from_u:
                am = average_speed(flux, float(f.left), o)
                ap = average_speed(flux, float(f.right), o)
            else:
                am = average_speed(flux, o, float(f.left))
                ap = average_speed(flux, o, float(f.right))
            cls = classify_jump(am, ap, f.speed)
            markers.append(_WMarker(f.position, f.speed, True, am, ap, cls.kind,
                                    abs(ap - am), ("u" if from_u else "v", f.speed)))
    markers.sort(key=lambda m: (m.x, m.speed))
    return markers


def _w_nucleate(markers, values, indices, emit):
    for i in sorted(indices, reverse=True):
        m = markers[i]
        if not m.is_front:
            continue
        if m.a_plus > m.speed + 1e-12:
            val = emit(m, values[i])
            if val != values[i + 1]:
                markers.insert(i + 1, _WMarker(m.x, m.a_plus, False))
                values.insert(i + 1, val)
        if m.a_minus < m.speed - 1e-12:
            val = emit(m, values[i + 1])
            if val != values[i]:
                markers.insert(i, _WMarker(m.x, m.a_minus, False))
                values.insert(i + 1, val)


def _w_next_event(markers, horizon):
    cands = []
    for i, m in enumerate(markers):
        for j in (i - 1, i + 1):
            if not (0 <= j < len(markers)):
                continue
            f = markers[j]
            if m.is_front and f.is_front and j == i + 1:
                closing = m.speed - f.speed
                gap = f.x - m.x
                if closing > 1e-14 and gap > 1e-12:
                    cands.append((gap / closing, m.x, ("cross", i, j)))
            elif not m.is_front and f.is_front:
                closing = (m.speed - f.speed) if j > i else (f.speed - m.speed)
                gap = (f.x - m.x) if j > i else (m.x - f.x)
                if closing > 1e-14 and gap > 1e-12:
                    cands.append((gap / closing, m.x, ("bp", i, j)))
    cands = [c for c in cands if c[0] <= horizon + 1e-14]
    if not cands:
        return None, None
    cands.sort(key=lambda c: (c[0], c[1]))
    return cands[0][0], cands[0][2]


def _w_process(markers, values, hit, emit, flux, u_traj, v_traj, t):
    kind, i, j = hit
    if kind == "bp":
        f = markers[j]
        if j == i + 1:
            del markers[i]
            del values[i + 1]
            fi = i
            if f.a_plus > f.speed + 1e-12:
                val = emit(f, values[fi])
                if val != values[fi + 1]:
                    markers.insert(fi + 1, _WMarker(f.x, f.a_plus, False))
                    values.insert(fi + 1, val)
        else:
            del markers[i]
            del values[i]
            fi = i - 1
            if f.a_minus < f.speed - 1e-12:
                val = emit(f, values[fi + 1])
                if val != values[fi]:
                    markers.insert(fi, _WMarker(f.x, f.a_minus, False))
                    values.insert(fi + 1, val)
        return
    # Two skeleton fronts cross: drop the squeezed value, swap, and refresh
    # their traces from the current solution fields.
    del values[j]
    markers[i], markers[j] = markers[j], markers[i]
    values.insert(j, values[i])
    _refresh_traces(markers, (i, j), flux, u_traj, v_traj, t)
    _w_nucleate(markers, values, (i, j), emit)


def _refresh_traces(markers, indices, flux, u_traj, v_traj, t):
    u_field = u_traj.field_at(t + 1e-13)
    v_field = v_traj.field_at(t + 1e-13)
    for idx in indices:
        m = markers[idx]
        if not m.is_front:
            continue
        side, _ = m.source
        eps = 1e-10
        if side == "u":
            ul = float(u_field.value_at(m.x - eps))
            ur = float(u_field.value_at(m.x + eps))
            o = float(v_field.value_at(m.x))
            m.a_minus = average_speed(flux, ul, o)
            m.a_plus = average_speed(flux, ur, o)
        else:
            vl = float(v_field.value_at(m.x - eps))
            vr = float(v_field.value_at(m.x + eps))
            o = float(u_field.value_at(m.x))
            m.a_minus = average_speed(flux, o, vl)
            m.a_plus = average_speed(flux, o, vr)
        m.kind = classify_jump(m.a_minus, m.a_plus, m.speed).kind
        m.strength = abs(m.a_plus - m.a_minus)


def _w_rebuild(markers, values, flux, u_traj, v_traj, t, emit):
    """Refresh the skeleton after a solution interaction.

    Weights are passive, so a front whose underlying solution fronts merged
    simply turns into a plain breakpoint riding the local characteristic;
    newborn fronts are inserted where they appear and nucleate streams.
    """
    new_sk = _skeleton(flux, u_traj, v_traj, t + 1e-13)
    unmatched = list(range(len(new_sk)))
    for m in markers:
        if not m.is_front:
            continue
        hit = None
        for k in unmatched:
            f = new_sk[k]
            if abs(f.x - m.x) <= 1e-9 and abs(f.speed - m.speed) <= 1e-9 \
                    and f.source[0] == m.source[0]:
                hit = k
                break
        if hit is not None:
            f = new_sk[hit]
            unmatched.remove(hit)
            m.a_minus, m.a_plus = f.a_minus, f.a_plus
            m.kind, m.strength = f.kind, f.strength
        else:
            m.is_front = False

    newborn = []
    for k in unmatched:
        f = new_sk[k]
        pos = 0
        while pos < len(markers) and (markers[pos].x < f.x - 1e-12
                                      or (abs(markers[pos].x - f.x) <= 1e-12
                                          and markers[pos].speed <= f.speed)):
            pos += 1
        markers.insert(pos, f)
        values.insert(pos + 1, values[pos])
        newborn.append(f)

    u_field = u_traj.field_at(t + 1e-13)
    v_field = v_traj.field_at(t + 1e-13)
    for m in markers:
        if not m.is_front:
            m.speed = average_speed(flux, float(u_field.value_at(m.x)),
                                    float(v_field.value_at(m.x)))
    _w_nucleate(markers, values,
                [i for i, m in enumerate(markers) if m in newborn], emit)


def _weight_field(markers, values):
    if not markers:
        return PiecewiseConstantField.constant(values[0])
    bps = []
    last = -np.inf
    for m in markers:
        x = m.x if m.x > last else np.nextafter(last, np.inf)
        bps.append(x)
        last = x
    return PiecewiseConstantField(np.asarray(bps), np.asarray(values))


def _weighted_l1(u_traj, v_traj, t, w_field):
    u = u_traj.field_at(t)
    v = v_traj.field_at(t)
    xs, uv, vv = merge_partitions(u, v)
    psi = PiecewiseConstantField(xs, vv - uv) if xs.size else \
        PiecewiseConstantField(np.empty(0), vv - uv)
    xs2, pv, wv = merge_partitions(psi, w_field)
    if xs2.size <= 1:
        return 0.0
    return float(np.dot(np.diff(xs2), np.abs(pv[1:-1]) * wv[1:-1]))
