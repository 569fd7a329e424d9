"""Four-way classification of coefficient jumps and trajectory scans.

A jump of a piecewise-constant speed coefficient carries one-sided speeds
(a_minus, a_plus) and moves at jump_speed.  It is compressive when
characteristics impinge from both sides, slow/fast undercompressive when
they cross it, and a rarefaction shock when they emanate from it.  The
boundary inclusions follow the closed inequalities for the compressive and
rarefaction cases; ties where all three speeds coincide report compressive.
Margins below tolerance only set the degenerate flag, they never reclassify.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .envelope import envelope_from_samples
from .errors import DegenerateStateError, EntropyViolationError
from .fluxes import average_speed
from .wavefronts import SHOCK

DEFAULT_TOL = 1e-9


class JumpKind(Enum):
    COMPRESSIVE = "L"
    SLOW_UNDERCOMPRESSIVE = "S"
    FAST_UNDERCOMPRESSIVE = "F"
    RAREFACTION_SHOCK = "R"


@dataclass(frozen=True)
class Classification:
    kind: JumpKind
    degenerate: bool
    margin: float

    @property
    def code(self):
        return self.kind.value


@dataclass(frozen=True)
class JumpRecord:
    """One classified coefficient jump at a space-time point."""

    time: float
    position: float
    left_speed: float
    right_speed: float
    jump_speed: float
    family: int
    classification: Classification


def classify_jump(a_minus, a_plus, jump_speed, tol=DEFAULT_TOL):
    """Classify one coefficient jump; exactly one kind for every input.

    Compressive requires a_minus >= jump_speed >= a_plus, rarefaction the
    reversed sandwich; the undercompressive kinds take the strict outside.
    The margin is the distance to the nearest competing region.
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    am = float(a_minus)
    ap = float(a_plus)
    lam = float(jump_speed)
    if am >= lam >= ap:
        margin = min(am - lam, lam - ap)
        kind = JumpKind.COMPRESSIVE
    elif am <= lam <= ap:
        margin = min(lam - am, ap - lam)
        kind = JumpKind.RAREFACTION_SHOCK
    elif lam < min(am, ap):
        margin = min(am, ap) - lam
        kind = JumpKind.SLOW_UNDERCOMPRESSIVE
    else:
        margin = lam - max(am, ap)
        kind = JumpKind.FAST_UNDERCOMPRESSIVE
    return Classification(kind, margin < tol, margin)


def is_entropy_admissible(flux, u_minus, u_plus, samples=257, tol=1e-10):
    """Chord condition: the flux graph sits on the admissible side of the chord."""
    um = float(u_minus)
    up = float(u_plus)
    if um == up:
        return True
    us = np.linspace(min(um, up), max(um, up), samples)
    chord = flux.value(um) + (flux.value(up) - flux.value(um)) * (us - um) / (up - um)
    fs = np.asarray(flux.value(us), dtype=float)
    scale = max(1.0, float(np.max(np.abs(fs))))
    if um > up:
        return bool(np.all(fs <= chord + tol * scale))
    return bool(np.all(fs >= chord - tol * scale))


def classify_from_states(u_minus, u_plus, v, flux, tol=DEFAULT_TOL):
    """Classify the averaged-speed jump at a discontinuity from its states.

    The discontinuity (u_minus, u_plus) must be entropy admissible; v is the
    (locally constant) value of the companion solution.  The kind is decided
    purely from the sign of the product
        (u_minus - v) * (u_plus - u_minus) * (a_plus - a_minus)
    split by whether v separates the two states; it agrees with the direct
    sandwich classification away from degenerate configurations.
    """
    um, up, vv = float(u_minus), float(u_plus), float(v)
    if not is_entropy_admissible(flux, um, up):
        raise EntropyViolationError(f"({um}, {up}) violates the chord condition")
    if min(abs(vv - um), abs(vv - up)) < 1e-12:
        raise DegenerateStateError("v coincides with a trace of the discontinuity")

    a_minus = average_speed(flux, um, vv)
    a_plus = average_speed(flux, up, vv)
    sign_product = (um - vv) * (up - um) * (a_plus - a_minus)
    same_side = (um - vv) * (up - vv) > 0.0

    scale = max(abs(um - vv), abs(up - vv)) * abs(up - um) * max(abs(a_plus - a_minus), 1e-300)
    degenerate = abs(sign_product) < tol * max(scale, 1.0) * 1e-3 or abs(a_plus - a_minus) < tol

    if same_side:
        kind = JumpKind.SLOW_UNDERCOMPRESSIVE if sign_product <= 0.0 \
            else JumpKind.FAST_UNDERCOMPRESSIVE
    else:
        kind = JumpKind.COMPRESSIVE if sign_product >= 0.0 else JumpKind.RAREFACTION_SHOCK
    return Classification(kind, degenerate, abs(sign_product))


@dataclass(frozen=True)
class ScanReport:
    """Kind counts over a trajectory pair plus the worst rarefaction margin."""

    counts: dict
    worst_rarefaction_margin: float
    rarefaction_records: tuple
    total_jumps: int

    def rarefaction_count(self, margin_above=DEFAULT_TOL):
        return sum(1 for r in self.rarefaction_records
                   if r.classification.margin > margin_above)

    def to_json(self):
        return {
            "counts": dict(self.counts),
            "worst_margin": self.worst_rarefaction_margin,
            "locations": [
                {"t": r.time, "x": r.position, "margin": r.classification.margin}
                for r in self.rarefaction_records
            ],
        }


def coefficient_jumps_at(u_state, v_state, flux, family=1):
    """Averaged-speed jump records induced by shock fronts of u and v.

    u_state and v_state are FrontStates at a common time.  Rarefaction
    slices approximate the continuous part of the coefficient and are not
    classified here.  When fronts of u and v coincide in position and speed
    (the u = v diagnostic), the jump takes traces from both; transversal
    coincidences are skipped as instantaneous.
    """
    records = []
    t = u_state.time
    v_field = v_state.to_field()
    u_field = u_state.to_field()

    v_positions = [(f.position, f) for f in v_state.fronts]

    def v_front_near(x):
        for xv, fv in v_positions:
            if abs(xv - x) <= 1e-11:
                return fv
        return None

    for f in u_state.fronts:
        if f.kind != SHOCK:
            continue
        twin = v_front_near(f.position)
        if twin is not None:
            if abs(twin.speed - f.speed) > 1e-11:
                continue  # transversal crossing instant
            vm, vp = float(twin.left), float(twin.right)
        else:
            vm = vp = float(v_field.value_at(f.position))
        a_minus = average_speed(flux, float(f.left), vm)
        a_plus = average_speed(flux, float(f.right), vp)
        records.append(JumpRecord(t, f.position, a_minus, a_plus, f.speed, family,
                                  classify_jump(a_minus, a_plus, f.speed)))

    for f in v_state.fronts:
        if f.kind != SHOCK:
            continue
        if any(abs(g.position - f.position) <= 1e-11 for g in u_state.fronts):
            continue  # handled (or skipped) above from the u side
        uloc = float(u_field.value_at(f.position))
        a_minus = average_speed(flux, uloc, float(f.left))
        a_plus = average_speed(flux, uloc, float(f.right))
        records.append(JumpRecord(t, f.position, a_minus, a_plus, f.speed, family,
                                  classify_jump(a_minus, a_plus, f.speed)))
    records.sort(key=lambda r: r.position)
    return records


def scan_rarefaction_free(u_traj, v_traj, flux, tol=DEFAULT_TOL):
    """Classify every shock-induced coefficient jump along a trajectory pair.

    Both trajectories are resampled to the union of their event times; the
    classification is evaluated at interval midpoints, where front positions
    are unambiguous.  Entropy trajectories must report zero rarefaction
    shocks with margin above tol.
    """
    t_all = sorted(set(u_traj.times) | set(v_traj.times))
    sample_times = [0.5 * (a + b) for a, b in zip(t_all[:-1], t_all[1:]) if b - a > 1e-12]
    counts = {"L": 0, "S": 0, "F": 0, "R": 0, "degenerate": 0}
    rarefactions = []
    total = 0
    for t in sample_times:
        us = u_traj.state_at(t)
        vs = v_traj.state_at(t)
        for rec in coefficient_jumps_at(us, vs, flux):
            total += 1
            scaled_tol = tol * max(1.0, abs(rec.left_speed), abs(rec.right_speed),
                                   abs(rec.jump_speed))
            cls = rec.classification
            if cls.degenerate or cls.margin <= scaled_tol:
                counts["degenerate"] += 1
            counts[cls.code] += 1
            if cls.kind is JumpKind.RAREFACTION_SHOCK and cls.margin > scaled_tol:
                rarefactions.append(rec)
    worst = max((r.classification.margin for r in rarefactions), default=0.0)
    return ScanReport(counts, worst, tuple(rarefactions), total)
