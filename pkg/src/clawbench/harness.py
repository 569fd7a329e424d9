"""Scenario configuration, experiment runners, and the suite orchestrator.

Scenario files are versioned JSON; unknown keys are rejected and numeric
parameters validated before anything runs.  Every runner is deterministic
given (file, seed): all randomness flows from the scenario seed through
named child generators, and CSV artifacts are byte-identical across reruns.
"""

import json
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dlm, scalar, stability, systems, transport
from .classify import scan_rarefaction_free
from .errors import ClawbenchError, ScenarioError
from .fields import PiecewiseConstantField, MeasureField, l1_distance, total_variation
from .fluxes import burgers, cubic, euler_mass_momentum, p_system_power

SCHEMA_VERSION = 1

KINDS = (
    "riemann",
    "front-tracking",
    "glimm",
    "linear-transport",
    "classification-scan",
    "stability-ledger",
    "monotonicity",
    "dlm",
    "superposition",
)

_TOP_KEYS = {"schema_version", "name", "kind", "seed", "flux", "initial_data",
             "initial_pair", "psi0", "params"}


def rng_for(seed, label):
    """Named child generator of the scenario seed."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF,
                                zlib.crc32(label.encode())])
    )


def scenario_schema():
    """Machine-readable description of the scenario format."""
    return {
        "schema_version": SCHEMA_VERSION,
        "top_level_keys": sorted(_TOP_KEYS),
        "kinds": list(KINDS),
        "flux": {"type": ["burgers", "cubic", "p-system", "euler"],
                 "gamma": "optional float (p-system, euler)"},
        "initial_data": {"breakpoints": "[float]", "values": "[float] or [[float,...]]"},
        "params": {
            "riemann": {"u_left": "float", "u_right": "float", "grid": "int >= 2"},
            "front-tracking": {"delta": "float > 0", "t_max": "float > 0"},
            "glimm": {"h": "float > 0", "cfl": "float in (0, 0.5]",
                      "t_max": "float > 0", "sampling": "van-der-corput|seeded-uniform",
                      "shock_path_check": {"speed": "float", "tolerance_cells": "float"}},
            "linear-transport": {"mode": "cauchy|nonuniqueness", "delta": "float > 0",
                                 "t_max": "float > 0", "phi_values": "[float]"},
            "classification-scan": {"delta": "float > 0", "t_max": "float > 0",
                                    "tol": "float >= 0",
                                    "expect_rarefactions": "int (negative controls)"},
            "stability-ledger": {"delta": "float > 0", "t_max": "float > 0",
                                 "k_slack_factor": "float (default 5)"},
            "monotonicity": {"n_samples": "int", "radius": "float",
                             "eps_extent": "float", "n_eps": "int"},
            "dlm": {"n_jumps": "int", "quad_order": "int"},
            "superposition": {"eps": "float < 0"},
        },
        "exit_codes": {"0": "all assertions passed", "1": "assertion failure",
                       "2": "usage or configuration error"},
    }


@dataclass
class RunReport:
    """Outcome of one scenario: assertion verdicts plus measured constants."""

    scenario: dict
    assertions: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    wall_time_s: float = 0.0
    error: str = ""

    @property
    def passed(self):
        return not self.error and all(a["passed"] for a in self.assertions)

    def add_assertion(self, name, passed, detail=""):
        self.assertions.append({"name": name, "passed": bool(passed), "detail": detail})

    def to_json(self):
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "assertions": self.assertions,
            "measured": self.measured,
            "artifacts": self.artifacts,
            "wall_time_s": self.wall_time_s,
            "error": self.error,
        }


# -- validation ----------------------------------------------------------------


def _fail(path, message):
    raise ScenarioError(f"{path}: {message}")


def _require(cond, path, message):
    if not cond:
        _fail(path, message)


def _check_keys(obj, allowed, path):
    unknown = set(obj) - set(allowed)
    if unknown:
        _fail(path, f"unknown keys {sorted(unknown)}")


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario file ({exc})") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") \
            from exc
    validate_scenario(obj, str(path))
    return obj


def validate_scenario(obj, where="scenario"):
    _require(isinstance(obj, dict), where, "scenario must be a JSON object")
    _check_keys(obj, _TOP_KEYS, where)
    _require(obj.get("schema_version") == SCHEMA_VERSION, f"{where}.schema_version",
             f"must be {SCHEMA_VERSION}")
    _require(isinstance(obj.get("name"), str) and obj["name"], f"{where}.name",
             "must be a nonempty string")
    kind = obj.get("kind")
    _require(kind in KINDS, f"{where}.kind", f"must be one of {list(KINDS)}")
    seed = obj.get("seed", 0)
    _require(isinstance(seed, int), f"{where}.seed", "must be an integer")
    params = obj.get("params", {})
    _require(isinstance(params, dict), f"{where}.params", "must be an object")
    _VALIDATORS[kind](obj, params, where)
    return obj


def _positive(params, key, path, default=None):
    val = params.get(key, default)
    _require(val is not None, f"{path}.{key}", "is required")
    _require(isinstance(val, (int, float)) and val > 0, f"{path}.{key}",
             "must be a positive number")
    return float(val)


def _validate_flux(obj, where, dims=(1,)):
    flux = obj.get("flux")
    _require(isinstance(flux, dict), f"{where}.flux", "is required")
    _check_keys(flux, {"type", "gamma", "kappa"}, f"{where}.flux")
    kind = flux.get("type")
    table = {"burgers": 1, "cubic": 1, "p-system": 2, "euler": 2}
    _require(kind in table, f"{where}.flux.type", f"must be one of {sorted(table)}")
    _require(table[kind] in dims, f"{where}.flux.type",
             f"{kind} has dimension {table[kind]}, expected {dims}")
    return flux


def _validate_field_spec(obj, key, where, required=True):
    spec = obj.get(key)
    if spec is None:
        _require(not required, f"{where}.{key}", "is required")
        return None
    _require(isinstance(spec, dict), f"{where}.{key}", "must be an object")
    _check_keys(spec, {"breakpoints", "values"}, f"{where}.{key}")
    _require(isinstance(spec.get("breakpoints"), list), f"{where}.{key}.breakpoints",
             "must be a list")
    _require(isinstance(spec.get("values"), list), f"{where}.{key}.values",
             "must be a list")
    _require(len(spec["values"]) == len(spec["breakpoints"]) + 1, f"{where}.{key}",
             "needs one more value than breakpoints")
    return spec


def _v_riemann(obj, params, where):
    _validate_flux(obj, where)
    _check_keys(params, {"u_left", "u_right", "grid"}, f"{where}.params")
    for key in ("u_left", "u_right"):
        _require(isinstance(params.get(key), (int, float)), f"{where}.params.{key}",
                 "is required and numeric")
    grid = params.get("grid", 2048)
    _require(isinstance(grid, int) and grid >= 2, f"{where}.params.grid",
             "must be an integer >= 2")


def _v_front_tracking(obj, params, where):
    _validate_flux(obj, where)
    _validate_field_spec(obj, "initial_data", where)
    _check_keys(params, {"delta", "t_max", "front_budget"}, f"{where}.params")
    _positive(params, "delta", f"{where}.params")
    _positive(params, "t_max", f"{where}.params")


def _v_glimm(obj, params, where):
    _validate_flux(obj, where)
    _validate_field_spec(obj, "initial_data", where)
    _check_keys(params, {"h", "cfl", "t_max", "sampling", "shock_path_check"},
                f"{where}.params")
    _positive(params, "h", f"{where}.params")
    cfl = params.get("cfl")
    _require(isinstance(cfl, (int, float)) and 0.0 < cfl <= 0.5, f"{where}.params.cfl",
             "must lie in (0, 0.5]")
    _positive(params, "t_max", f"{where}.params")
    sampling = params.get("sampling", "van-der-corput")
    _require(sampling in ("van-der-corput", "seeded-uniform"),
             f"{where}.params.sampling", "must be van-der-corput or seeded-uniform")
    check = params.get("shock_path_check")
    if check is not None:
        _check_keys(check, {"speed", "tolerance_cells", "window"},
                    f"{where}.params.shock_path_check")


def _v_linear_transport(obj, params, where):
    mode = params.get("mode", "cauchy")
    _require(mode in ("cauchy", "nonuniqueness"), f"{where}.params.mode",
             "must be cauchy or nonuniqueness")
    if mode == "cauchy":
        _validate_flux(obj, where)
        _validate_field_spec(obj, "initial_data", where)
        _validate_field_spec(obj, "psi0", where)
        _check_keys(params, {"mode", "delta", "t_max"}, f"{where}.params")
        _positive(params, "delta", f"{where}.params")
        _positive(params, "t_max", f"{where}.params")
    else:
        _check_keys(params, {"mode", "a_minus", "a_plus", "jump_speed", "phi_values",
                             "n_tests", "t_max"}, f"{where}.params")
        phi = params.get("phi_values", [0.0, 1.0])
        _require(isinstance(phi, list) and len(phi) >= 2, f"{where}.params.phi_values",
                 "needs at least two values")


def _v_pair(obj, params, where, extra=()):
    _validate_flux(obj, where)
    pair = obj.get("initial_pair")
    _require(isinstance(pair, dict), f"{where}.initial_pair", "is required")
    _check_keys(pair, {"u", "v"}, f"{where}.initial_pair")
    for key in ("u", "v"):
        _validate_field_spec(pair, key, f"{where}.initial_pair")
    _check_keys(params, set(extra) | {"delta", "t_max"}, f"{where}.params")
    _positive(params, "delta", f"{where}.params")
    _positive(params, "t_max", f"{where}.params")


def _v_classification(obj, params, where):
    _v_pair(obj, params, where, extra={"tol", "expect_rarefactions", "inject"})


def _v_stability(obj, params, where):
    _v_pair(obj, params, where, extra={"k_slack_factor"})


def _v_monotonicity(obj, params, where):
    _validate_flux(obj, where, dims=(2,))
    _check_keys(params, {"n_samples", "radius", "eps_extent", "n_eps", "margin"},
                f"{where}.params")
    n = params.get("n_samples", 100)
    _require(isinstance(n, int) and n > 0, f"{where}.params.n_samples",
             "must be a positive integer")


def _v_dlm(obj, params, where):
    _check_keys(params, {"n_jumps", "quad_order"}, f"{where}.params")


def _v_superposition(obj, params, where):
    _check_keys(params, {"eps"}, f"{where}.params")


_VALIDATORS = {
    "riemann": _v_riemann,
    "front-tracking": _v_front_tracking,
    "glimm": _v_glimm,
    "linear-transport": _v_linear_transport,
    "classification-scan": _v_classification,
    "stability-ledger": _v_stability,
    "monotonicity": _v_monotonicity,
    "dlm": _v_dlm,
    "superposition": _v_superposition,
}


# -- shared builders -----------------------------------------------------------


def _build_flux(spec):
    kind = spec["type"]
    if kind == "burgers":
        return burgers()
    if kind == "cubic":
        return cubic()
    if kind == "p-system":
        return p_system_power(spec.get("gamma", 2.0))
    return euler_mass_momentum(spec.get("gamma", 1.4), spec.get("kappa", 1.0))


def _build_field(spec):
    vals = np.asarray(spec["values"], dtype=float)
    if vals.ndim == 2 and vals.shape[1] == 1:
        vals = vals[:, 0]
    return PiecewiseConstantField(np.asarray(spec["breakpoints"], dtype=float), vals)


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- runners --------------------------------------------------------------------


def window_integral(fld, x_lo, x_hi):
    """Exact integral of a scalar field over a finite window."""
    edges = np.concatenate([[x_lo], fld.breakpoints[
        (fld.breakpoints > x_lo) & (fld.breakpoints < x_hi)], [x_hi]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = fld.values_at(mids)
    return float(np.dot(np.diff(edges), vals))


def _windowed_conservation_drift(flux, traj, t_max):
    """Drift of the windowed integral against the exact boundary flux balance.

    On a window enclosing every front, d/dt of the integral equals
    f(far left) - f(far right) exactly, which also covers Riemann-type data
    with unequal far fields.
    """
    state0 = traj.states[0]
    fld0 = state0.to_field()
    positions = [f.position for f in state0.fronts] or [0.0]
    speeds = [abs(f.speed) for f in state0.fronts] or [0.0]
    margin = 1.0 + max(speeds) * t_max
    x_lo = min(positions) - margin
    x_hi = max(positions) + margin
    flux_balance = float(flux.value(fld0.left_value)) - float(flux.value(fld0.right_value))
    m0 = window_integral(fld0, x_lo, x_hi)
    drift = 0.0
    for st in traj.states:
        expected = m0 + st.time * flux_balance
        drift = max(drift, abs(window_integral(st.to_field(), x_lo, x_hi) - expected))
    return drift


def _run_riemann(obj, report, out):
    flux = _build_flux(obj["flux"])
    p = obj["params"]
    fan = scalar.solve_riemann_scalar(flux, p["u_left"], p["u_right"],
                                      p.get("grid", 2048))
    speeds = [s for pair in fan.speeds() for s in pair]
    monotone = all(b >= a - 1e-12 for a, b in zip(speeds, speeds[1:]))
    report.add_assertion("wave speeds weakly increasing", monotone)
    from .classify import is_entropy_admissible
    shocks_ok = all(is_entropy_admissible(flux, w.left, w.right)
                    for w in fan.waves if hasattr(w, "speed"))
    report.add_assertion("shocks entropy admissible", shocks_ok)
    report.measured["n_waves"] = len(fan.waves)
    art = out / "fan.json"
    _write_json(art, fan.to_json())
    report.artifacts.append(str(art))


def _run_front_tracking(obj, report, out):
    flux = _build_flux(obj["flux"])
    p = obj["params"]
    u0 = _build_field(obj["initial_data"])
    traj = scalar.front_tracking_evolve(flux, u0, p["delta"], p["t_max"],
                                        int(p.get("front_budget", 10 ** 6)))
    snapped = scalar.snap_to_grid(u0, p["delta"])
    tv0 = total_variation(snapped)
    tv_ok = all(total_variation(st.to_field()) <= tv0 + 1e-10 for st in traj.states)
    report.add_assertion("total variation nonincreasing", tv_ok)
    cons = _windowed_conservation_drift(flux, traj, p["t_max"])
    report.add_assertion("conservation to 1e-10", cons <= 1e-10, f"drift {cons:.2e}")
    lo, hi = float(np.min(snapped.values)), float(np.max(snapped.values))
    bound_ok = all(lo - 1e-12 <= float(np.min(st.to_field().values))
                   and float(np.max(st.to_field().values)) <= hi + 1e-12
                   for st in traj.states)
    report.add_assertion("maximum principle", bound_ok)
    report.measured["events"] = len(traj.times) - 2
    report.measured["final_fronts"] = len(traj.final.fronts)
    csv = out / "trajectory.csv"
    traj.to_csv(csv)
    jsonl = out / "trajectory.jsonl"
    traj.to_jsonl(jsonl)
    report.artifacts.extend([str(csv), str(jsonl)])


def _run_glimm(obj, report, out):
    flux = _build_flux(obj["flux"])
    p = obj["params"]
    u0 = _build_field(obj["initial_data"])
    seq = scalar.SamplingSequence(p.get("sampling", "van-der-corput"),
                                  obj.get("seed", 0))
    snaps = scalar.glimm_evolve(flux, u0, p["h"], p["cfl"], seq, p["t_max"])
    lo, hi = float(np.min(u0.values)), float(np.max(u0.values))
    bound_ok = all(lo - 1e-12 <= float(np.min(f.values)) <= float(np.max(f.values))
                   <= hi + 1e-12 for _, f in snaps)
    report.add_assertion("maximum principle", bound_ok)
    check = p.get("shock_path_check")
    if check is not None:
        w = check.get("window", [0.0, p["t_max"], -10.0, 10.0])
        ts, ys = scalar.track_shock_path(snaps, tuple(w))
        dev = float(np.max(np.abs(ys - check["speed"] * ts)))
        tol = check.get("tolerance_cells", 5.0) * p["h"]
        report.add_assertion("shock path within tolerance", dev <= tol,
                             f"max deviation {dev:.4f} vs {tol:.4f}")
        report.measured["shock_path_deviation"] = dev
    csv = out / "snapshots.csv"
    with open(csv, "w") as fh:
        fh.write("t,x,u\n")
        for t, fld in snaps:
            for x, _, right in fld.jumps():
                fh.write(f"{t!r},{x!r},{float(right)!r}\n")
    report.artifacts.append(str(csv))


def _run_linear_transport(obj, report, out):
    p = obj["params"]
    if p.get("mode", "cauchy") == "cauchy":
        flux = _build_flux(obj["flux"])
        u0 = _build_field(obj["initial_data"])
        psi0 = MeasureField(_build_field(obj["psi0"]))
        traj = scalar.front_tracking_evolve(flux, u0, p["delta"], p["t_max"])
        coeff = transport.CoefficientField.from_solution(flux, traj)
        sol = transport.solve_linear_cauchy(coeff, psi0, p["t_max"])
        drift = max(abs(st.signed_mass() - sol.states[0].signed_mass())
                    for st in sol.states)
        report.add_assertion("signed mass conserved to 1e-10", drift <= 1e-10,
                             f"drift {drift:.2e}")
        report.add_assertion("mass amplification bounded",
                             not np.isfinite(sol.mass_bound) or sol.mass_bound <= 10.0,
                             f"K = {sol.mass_bound}")
        report.measured["mass_bound"] = sol.mass_bound
        jsonl = out / "psi.jsonl"
        sol.to_jsonl(jsonl)
        csv = out / "atoms.csv"
        sol.atoms_to_csv(csv)
        report.artifacts.extend([str(jsonl), str(csv)])
        return

    rng = rng_for(obj.get("seed", 0), "nonuniqueness")
    a_minus = p.get("a_minus", -1.0)
    a_plus = p.get("a_plus", 1.0)
    jump_speed = p.get("jump_speed", 0.0)
    t_max = p.get("t_max", 2.0)
    phis = p.get("phi_values", [0.0, 1.0])
    n_tests = int(p.get("n_tests", 20))
    coeff = transport.CoefficientField.synthetic_static(
        PiecewiseConstantField([0.0], [a_minus, a_plus]), [jump_speed])
    sols = [transport.riemann_linear(1.0, 1.0, a_minus, a_plus, jump_speed,
                                     fan_atom_mass=phi) for phi in phis]
    worst = 0.0
    for k in range(n_tests):
        bump = transport.SmoothBump(
            t0=float(rng.uniform(0.35 * t_max, 0.65 * t_max)),
            x0=float(rng.uniform(-0.5, 0.5)),
            st=float(rng.uniform(0.25, 0.32) * t_max),
            sx=float(rng.uniform(0.8, 1.4)),
        )
        for sol in sols:
            worst = max(worst, abs(transport.weak_form_residual(sol.field_at, coeff, bump)))
    report.add_assertion("weak-form residuals below 1e-6", worst < 1e-6,
                         f"worst {worst:.2e}")
    distinct = any(s.field_at(1.0).atoms != sols[0].field_at(1.0).atoms for s in sols[1:])
    report.add_assertion("solutions distinct", distinct)
    report.measured["worst_residual"] = worst
    arts = []
    for phi, sol in zip(phis, sols):
        path = out / f"solution_phi_{phi}.jsonl"
        with open(path, "w") as fh:
            for t in np.linspace(0.0, t_max, 21):
                fh.write(json.dumps({"t": float(t), **sol.field_at(float(t)).to_json()})
                         + "\n")
        arts.append(str(path))
    _write_json(out / "residuals.json", {"worst_residual": worst,
                                         "phi_values": list(phis)})
    report.artifacts.extend(arts + [str(out / "residuals.json")])


def _run_classification_scan(obj, report, out):
    flux = _build_flux(obj["flux"])
    p = obj["params"]
    u0 = _build_field(obj["initial_pair"]["u"])
    v0 = _build_field(obj["initial_pair"]["v"])
    tu = scalar.front_tracking_evolve(flux, u0, p["delta"], p["t_max"])
    tv = scalar.front_tracking_evolve(flux, v0, p["delta"], p["t_max"])
    rep = scan_rarefaction_free(tu, tv, flux, p.get("tol", 1e-9))
    expected = int(p.get("expect_rarefactions", 0))
    count = rep.rarefaction_count(p.get("tol", 1e-9))
    if expected == 0:
        report.add_assertion("zero rarefaction shocks", count == 0, f"found {count}")
    else:
        report.add_assertion("negative control detects rarefaction shocks",
                             count >= expected, f"found {count}")
    report.measured["counts"] = dict(rep.counts)
    report.measured["worst_margin"] = rep.worst_rarefaction_margin
    art = out / "scan.json"
    _write_json(art, rep.to_json())
    report.artifacts.append(str(art))


def _run_stability_ledger(obj, report, out):
    flux = _build_flux(obj["flux"])
    p = obj["params"]
    u0 = _build_field(obj["initial_pair"]["u"])
    v0 = _build_field(obj["initial_pair"]["v"])
    delta = p["delta"]
    tu = scalar.front_tracking_evolve(flux, u0, delta, p["t_max"])
    tv = scalar.front_tracking_evolve(flux, v0, delta, p["t_max"])
    ledger = stability.decay_terms_scalar(tu, tv, flux, p["t_max"])
    slack = p.get("k_slack_factor", 5.0)
    if ledger.trivial:
        report.add_assertion("trivial ledger (zero initial distance)", True)
    else:
        k = float(np.nanmax(ledger.stability_ratio))
        report.add_assertion("stability ratio bounded", k <= 1.0 + slack * delta,
                             f"K = {k:.5f} vs {1.0 + slack * delta}")
        report.measured["K"] = k
    report.add_assertion("decay terms nondecreasing", ledger.monotone_terms())
    d0 = ledger.l1[0]
    contraction = bool(np.all(ledger.l1 <= d0 * (1 + 1e-8) + slack * delta))
    report.add_assertion("L1 contraction with front-tracking slack", contraction)
    art = out / "ledger.csv"
    ledger.to_csv(art)
    report.artifacts.append(str(art))


def _run_monotonicity(obj, report, out):
    flux = _build_flux(obj["flux"])
    p = obj["params"]
    rng = rng_for(obj.get("seed", 0), "monotonicity")
    n = int(p.get("n_samples", 100))
    radius = float(p.get("radius", 0.3))
    extent = float(p.get("eps_extent", 0.15))
    n_eps = int(p.get("n_eps", 41))
    margin = float(p.get("margin", 1e-8))
    eps_grid = np.linspace(-extent, extent, n_eps)
    sign_changes = 0
    lax_violations = 0
    for _ in range(n):
        u_minus = np.array([rng.uniform(0.9, 1.1), rng.uniform(-0.1, 0.1)])
        angle = rng.uniform(0, 2 * np.pi)
        r = radius * np.sqrt(rng.uniform(0.0, 1.0))
        v = u_minus + r * np.array([np.cos(angle), np.sin(angle)])
        family = int(rng.integers(1, 3))
        rep = systems.averaged_eigen_monotonicity(flux, u_minus, family, v,
                                                  eps_grid, margin=margin)
        sign_changes += rep.sign_changes
        lax_violations += rep.lax_ordering_violations
    report.add_assertion("averaged eigenvalue monotone along shock curves",
                         sign_changes == 0, f"{sign_changes} sign changes")
    report.add_assertion("Lax ordering of averaged eigenvalues",
                         lax_violations == 0, f"{lax_violations} violations")
    report.measured["samples"] = n
    art = out / "monotonicity.json"
    _write_json(art, {"sign_changes": sign_changes, "lax_violations": lax_violations,
                      "samples": n})
    report.artifacts.append(str(art))


def _run_dlm(obj, report, out):
    p = obj["params"]
    rng = rng_for(obj.get("seed", 0), "dlm")
    n_jumps = int(p.get("n_jumps", 20))
    quad = int(p.get("quad_order", 32))
    flux = p_system_power(2.0)
    paths = [dlm.PathFamily.straightline(),
             dlm.PathFamily.bezier_bulge([0.05, 0.03]),
             dlm.PathFamily.bezier_bulge([-0.04, 0.06]),
             dlm.PathFamily.bezier_bulge([0.02, -0.05])]
    worst_indep = 0.0
    worst_rh = 0.0
    for _ in range(n_jumps):
        um = np.array([rng.uniform(0.8, 1.4), rng.uniform(-0.3, 0.3)])
        up = np.array([rng.uniform(0.8, 1.4), rng.uniform(-0.3, 0.3)])
        exact = np.asarray(flux.value(up)) - np.asarray(flux.value(um))
        speed = rng.uniform(-1.0, 1.0)
        rh = -speed * (up - um) + exact
        for path in paths:
            val = dlm.path_integral(flux.jacobian, path, um, up, quad)
            worst_indep = max(worst_indep, float(np.max(np.abs(val - exact))))
            res = dlm.generalized_hugoniot_residual(flux.jacobian, path, um, up,
                                                    speed, quad)
            worst_rh = max(worst_rh, float(np.max(np.abs(res - rh))))
    report.add_assertion("gradient path independence to 1e-10", worst_indep <= 1e-10,
                         f"worst {worst_indep:.2e}")
    report.add_assertion("conservative generalized jump relation matches classical",
                         worst_rh <= 1e-10, f"worst {worst_rh:.2e}")

    g = lambda w: np.array([[w[1], 0.0], [0.0, 0.0]])
    um = np.array([0.0, 0.0])
    up = np.array([1.0, 1.0])
    straight = dlm.path_integral(g, dlm.PathFamily.straightline(), um, up, quad)
    curved = dlm.path_integral(
        g, dlm.PathFamily.from_callables(lambda s, a, b: np.array([s * s, s]),
                                         lambda s, a, b: np.array([2 * s, 1.0])),
        um, up, quad)
    gap = float(np.max(np.abs(straight - curved)))
    report.add_assertion("non-gradient path dependence at least 0.1", gap >= 0.1,
                         f"gap {gap:.4f}")
    report.measured.update({"path_independence": worst_indep,
                            "path_dependence_gap": gap})
    art = out / "dlm.json"
    _write_json(art, report.measured)
    report.artifacts.append(str(art))


def _run_superposition(obj, report, out):
    p = obj["params"]
    eps = float(p.get("eps", -0.25))
    flux = p_system_power(2.0)
    rep_c = dlm.superposition_check_conservative(flux, np.array([1.0, 0.0]), eps=eps)
    report.add_assertion("conservative composite residual below 1e-12",
                         rep_c.composite_residual <= 1e-12,
                         f"{rep_c.composite_residual:.2e}")
    ms = dlm.model_system()
    rep_n = dlm.superposition_check_nonconservative(
        ms, dlm.PathFamily.straightline(), np.array([0.0, 0.0]), eps=eps)
    report.add_assertion("nonconservative pairwise residuals below 1e-10",
                         max(rep_n.pairwise_residuals) <= 1e-10)
    report.add_assertion("nonconservative composite residual above 1e-4",
                         rep_n.composite_residual > 1e-4,
                         f"{rep_n.composite_residual:.4f}")
    report.measured.update({
        "conservative_composite": rep_c.composite_residual,
        "nonconservative_composite": rep_n.composite_residual,
    })
    art = out / "superposition.json"
    _write_json(art, report.measured)
    report.artifacts.append(str(art))


_RUNNERS = {
    "riemann": _run_riemann,
    "front-tracking": _run_front_tracking,
    "glimm": _run_glimm,
    "linear-transport": _run_linear_transport,
    "classification-scan": _run_classification_scan,
    "stability-ledger": _run_stability_ledger,
    "monotonicity": _run_monotonicity,
    "dlm": _run_dlm,
    "superposition": _run_superposition,
}


def run(scenario_path, out_dir=None, seed=None):
    """Execute one scenario file and return its report."""
    obj = load_scenario(scenario_path)
    if seed is not None:
        obj["seed"] = int(seed)
    out = Path(out_dir) if out_dir is not None else \
        Path(scenario_path).resolve().parent / f"{obj['name']}-out"
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(scenario=obj)
    start = time.perf_counter()
    try:
        _RUNNERS[obj["kind"]](obj, report, out)
    except ClawbenchError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
    report.wall_time_s = time.perf_counter() - start
    _write_json(out / "report.json", report.to_json())
    return report


def _suite_entry(args):
    path, out_root, seed = args
    try:
        report = run(path, Path(out_root) / Path(path).stem, seed)
        return {"path": str(path), "name": report.scenario["name"],
                "passed": report.passed, "report": report.to_json()}
    except ScenarioError as exc:
        return {"path": str(path), "name": Path(path).stem, "passed": False,
                "report": {"error": str(exc)}}


def suite(manifest_path, jobs=1, out_dir=None, seed=None):
    """Run every scenario in a manifest; missing files count as failures.

    Results are ordered by scenario name regardless of parallelism, so the
    aggregate report is stable.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"{manifest_path}: cannot load manifest ({exc})") from exc
    if not isinstance(manifest, dict) or "scenarios" not in manifest:
        raise ScenarioError(f"{manifest_path}: manifest needs a 'scenarios' list")
    paths = [manifest_path.parent / p for p in manifest["scenarios"]]
    out_root = Path(out_dir) if out_dir is not None else \
        manifest_path.resolve().parent / "suite-out"
    out_root.mkdir(parents=True, exist_ok=True)

    entries = []
    todo = []
    for p in paths:
        if not p.exists():
            entries.append({"path": str(p), "name": p.stem, "passed": False,
                            "report": {"error": "scenario file not found"}})
        else:
            todo.append((str(p), str(out_root), seed))
    if jobs <= 1:
        entries.extend(_suite_entry(args) for args in todo)
    else:
        with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
            entries.extend(pool.map(_suite_entry, todo))
    entries.sort(key=lambda e: e["name"])
    aggregate = {"passed": all(e["passed"] for e in entries), "results": entries}
    _write_json(out_root / "suite.json", aggregate)
    return aggregate
