"""Piecewise-constant fields, measure-valued fields, and wave fans.

A field takes the constant value ``values[i]`` on the open interval
``(breakpoints[i-1], breakpoints[i])``, with the two end values extending to
-inf and +inf.  All integrals are computed exactly on the induced partition,
so comparisons elsewhere in the suite sit at round-off level instead of
quadrature level.  Fields are immutable after construction and can be shared
freely between threads.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentIntegralError

# Adjacent values closer than this are merged at construction (double noise floor).
DEDUP_ATOL = 1e-14
# Far-field values may differ by at most this before an integral counts as divergent.
FARFIELD_ATOL = 1e-12


def _state_norm(delta):
    """Euclidean norm of a state difference, component-wise for systems."""
    arr = np.asarray(delta, dtype=float)
    if arr.ndim == 0:
        return abs(float(arr))
    return float(np.linalg.norm(arr))


@dataclass(frozen=True, eq=False)
class PiecewiseConstantField:
    """Sorted breakpoints with one more value than breakpoints.

    ``values`` has shape (M+1,) for scalar fields and (M+1, 2) for two-state
    systems.  Construction validates strict ordering and drops breakpoints
    whose flanking values agree to ``DEDUP_ATOL``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bps = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        vals = np.asarray(self.values, dtype=float)
        if bps.size == 0:
            bps = np.empty(0, dtype=float)
        if vals.ndim == 0:
            vals = vals.reshape(1)
        if vals.shape[0] != bps.size + 1:
            raise ValueError(
                f"need {bps.size + 1} values for {bps.size} breakpoints, got {vals.shape[0]}"
            )
        if bps.size > 1 and not np.all(np.diff(bps) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        bps, vals = _dedup(bps, vals)
        bps.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value, dim=1):
        if dim == 1:
            return cls(np.empty(0), np.asarray([float(value)]))
        return cls(np.empty(0), np.asarray([value], dtype=float))

    @property
    def dim(self):
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    @property
    def left_value(self):
        return self.values[0]

    @property
    def right_value(self):
        return self.values[-1]

    def value_at(self, x, side="right"):
        """Value at x; ``side`` picks the trace when x is a breakpoint."""
        if side == "left":
            idx = int(np.searchsorted(self.breakpoints, x, side="left"))
        else:
            idx = int(np.searchsorted(self.breakpoints, x, side="right"))
        return self.values[idx]

    def values_at(self, xs):
        """Vectorized right-limit lookup."""
        idx = np.searchsorted(self.breakpoints, np.asarray(xs, dtype=float), side="right")
        return self.values[idx]

    def jumps(self):
        """List of (x, left value, right value) at actual discontinuities."""
        out = []
        for i, x in enumerate(self.breakpoints):
            out.append((float(x), self.values[i], self.values[i + 1]))
        return out

    def translate(self, dx):
        return PiecewiseConstantField(self.breakpoints + dx, self.values)

    def to_json(self):
        vals = self.values.reshape(-1, 1) if self.values.ndim == 1 else self.values
        return {"breakpoints": self.breakpoints.tolist(), "values": vals.tolist()}

    @classmethod
    def from_json(cls, obj):
        vals = np.asarray(obj["values"], dtype=float)
        if vals.ndim == 2 and vals.shape[1] == 1:
            vals = vals[:, 0]
        return cls(np.asarray(obj["breakpoints"], dtype=float), vals)


def _dedup(bps, vals):
    """Remove breakpoints whose two sides agree within DEDUP_ATOL."""
    if bps.size == 0:
        return bps.copy(), vals.copy()
    keep = []
    for i in range(bps.size):
        if _state_norm(vals[i + 1] - vals[i]) > DEDUP_ATOL:
            keep.append(i)
    if len(keep) == bps.size:
        return bps.copy(), vals.copy()
    new_bps = bps[keep]
    new_vals = np.concatenate(
        [vals[:1], vals[[i + 1 for i in keep]]] if keep else [vals[:1]], axis=0
    )
    return new_bps, new_vals


def merge_partitions(u, v):
    """Merged breakpoints plus per-interval values of u and v.

    Returns (xs, u_vals, v_vals) where xs has K points and the value arrays
    have K+1 rows, one per interval of the merged partition.
    """
    xs = np.union1d(u.breakpoints, v.breakpoints)
    if xs.size == 0:
        return xs, u.values[:1], v.values[:1]
    probes = np.concatenate([[xs[0] - 1.0], 0.5 * (xs[:-1] + xs[1:]), [xs[-1] + 1.0]])
    return xs, u.values_at(probes), v.values_at(probes)


def l1_distance(u, v):
    """Exact integral of |u - v| over the line.

    Both fields must share their far-field values (within FARFIELD_ATOL),
    otherwise the integral diverges and DivergentIntegralError is raised.
    """
    if u.dim != v.dim:
        raise ValueError("fields have different state dimensions")
    if (
        _state_norm(u.left_value - v.left_value) > FARFIELD_ATOL
        or _state_norm(u.right_value - v.right_value) > FARFIELD_ATOL
    ):
        raise DivergentIntegralError("far-field values differ; |u - v| is not integrable")
    xs, uv, vv = merge_partitions(u, v)
    if xs.size == 0:
        return 0.0
    diff = uv - vv
    if diff.ndim == 1:
        mags = np.abs(diff)
    else:
        mags = np.linalg.norm(diff, axis=1)
    lengths = np.diff(xs)
    # End intervals carry equal far fields and contribute nothing.
    return float(np.dot(lengths, mags[1:-1])) if xs.size > 1 else 0.0


def total_variation(u):
    """Sum of jump magnitudes (Euclidean norm per jump for systems)."""
    if u.breakpoints.size == 0:
        return 0.0
    diff = np.diff(u.values, axis=0)
    if diff.ndim == 1:
        return float(np.sum(np.abs(diff)))
    return float(np.sum(np.linalg.norm(diff, axis=1)))


def integral_minus_farfield(u, farfield=None):
    """Exact integral of (u - farfield); farfield defaults to the left value."""
    far = u.left_value if farfield is None else farfield
    if _state_norm(u.right_value - far) > FARFIELD_ATOL:
        raise DivergentIntegralError("right far field differs from the reference value")
    if u.breakpoints.size == 0:
        return 0.0 if u.dim == 1 else np.zeros(u.dim)
    lengths = np.diff(u.breakpoints)
    inner = u.values[1:-1]
    if u.dim == 1:
        return float(np.dot(lengths, inner - far))
    return (lengths[:, None] * (inner - far)).sum(axis=0)


@dataclass(frozen=True, eq=False)
class MeasureField:
    """A bounded-variation part plus a finite list of Dirac atoms.

    ``atoms`` is a tuple of (location, mass); masses are scalars for dim-1
    fields and length-2 arrays for systems.  Atom locations must be distinct.
    The mass norm is only finite when the BV part has zero far fields; the
    constructor allows nonzero far fields (Riemann data), but ``mass_norm``
    then raises.
    """

    bv: PiecewiseConstantField
    atoms: tuple = ()

    def __post_init__(self):
        cleaned = []
        for x, m in self.atoms:
            if _state_norm(m) > 0.0:
                cleaned.append((float(x), float(m) if np.ndim(m) == 0 else np.asarray(m, float)))
        cleaned.sort(key=lambda a: a[0])
        for (x0, _), (x1, _) in zip(cleaned, cleaned[1:]):
            if x1 - x0 <= 0.0:
                raise ValueError("atom locations must be distinct")
        object.__setattr__(self, "atoms", tuple(cleaned))

    @property
    def dim(self):
        return self.bv.dim

    def mass_norm(self):
        """Total mass norm: integral of |bv| plus the atom mass magnitudes."""
        zero = np.zeros(self.dim) if self.dim > 1 else 0.0
        if (
            _state_norm(self.bv.left_value - zero) > FARFIELD_ATOL
            or _state_norm(self.bv.right_value - zero) > FARFIELD_ATOL
        ):
            raise DivergentIntegralError("BV part has nonzero far field; mass norm diverges")
        bv_part = l1_distance(self.bv, PiecewiseConstantField.constant(0.0, self.dim)
                              if self.dim == 1 else
                              PiecewiseConstantField(np.empty(0), np.zeros((1, self.dim))))
        return bv_part + sum(_state_norm(m) for _, m in self.atoms)

    def signed_mass(self):
        """Integral of the field plus the sum of atom masses (scalar fields)."""
        if self.dim != 1:
            raise ValueError("signed mass is defined for scalar fields only")
        return float(integral_minus_farfield(self.bv, 0.0)) + sum(m for _, m in self.atoms)

    def scale(self, factor):
        return MeasureField(
            PiecewiseConstantField(self.bv.breakpoints, self.bv.values * factor),
            tuple((x, m * factor) for x, m in self.atoms),
        )

    def add(self, other):
        xs, a, b = merge_partitions(self.bv, other.bv)
        bv = PiecewiseConstantField(xs, a + b)
        masses = {}
        for x, m in self.atoms + other.atoms:
            masses[x] = masses.get(x, 0.0) + m
        return MeasureField(bv, tuple(masses.items()))

    def to_json(self):
        return {
            "bv": self.bv.to_json(),
            "atoms": [
                {"x": x, "mass": [m] if np.ndim(m) == 0 else list(np.asarray(m))}
                for x, m in self.atoms
            ],
        }

    @classmethod
    def from_json(cls, obj):
        atoms = []
        for a in obj.get("atoms", []):
            mass = a["mass"]
            atoms.append((a["x"], mass[0] if len(mass) == 1 else np.asarray(mass, float)))
        return cls(PiecewiseConstantField.from_json(obj["bv"]), tuple(atoms))


@dataclass(frozen=True)
class Shock:
    left: object
    right: object
    speed: float


@dataclass(frozen=True)
class RarefactionFan:
    left: object
    right: object
    speed_lo: float
    speed_hi: float


@dataclass(frozen=True, eq=False)
class WaveFan:
    """Ordered waves of a Riemann solution, speeds weakly increasing.

    Scalar fans built from an envelope also carry the sampled hull
    (``hull_states`` between ``hull_speeds``) so the self-similar solution
    can be evaluated at any slope x/t.
    """

    waves: tuple
    hull_states: np.ndarray = field(default=None, repr=False)
    hull_speeds: np.ndarray = field(default=None, repr=False)

    @property
    def left_state(self):
        return self.waves[0].left if self.waves else None

    @property
    def right_state(self):
        return self.waves[-1].right if self.waves else None

    def speeds(self):
        out = []
        for w in self.waves:
            if isinstance(w, Shock):
                out.append((w.speed, w.speed))
            else:
                out.append((w.speed_lo, w.speed_hi))
        return out

    def value_at_slope(self, xi):
        """Self-similar scalar solution u(x/t); requires hull data."""
        if self.hull_states is None:
            raise ValueError("fan carries no hull sampling")
        idx = int(np.searchsorted(self.hull_speeds, xi, side="left"))
        return float(self.hull_states[idx])

    def to_json(self):
        waves = []
        for w in self.waves:
            if isinstance(w, Shock):
                waves.append({"type": "shock", "left": _state_list(w.left),
                              "right": _state_list(w.right), "speed": w.speed})
            else:
                waves.append({"type": "fan", "left": _state_list(w.left),
                              "right": _state_list(w.right),
                              "speed_lo": w.speed_lo, "speed_hi": w.speed_hi})
        return {"waves": waves}


def _state_list(s):
    return [float(s)] if np.ndim(s) == 0 else list(np.asarray(s, dtype=float))


def field_to_json_line(t, fld):
    return json.dumps({"t": t, **fld.to_json()})
