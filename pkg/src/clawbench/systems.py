"""2x2 system machinery: averaged matrices, Hugoniot curves, front tracking.

The averaged matrix of a flux between two states is the Gauss-Legendre
quadrature of the Jacobian along the straight segment; its eigenstructure is
computed analytically from the quadratic formula.  Hugoniot loci are found
by Newton continuation on the jump conditions, rarefaction branches by
integrating the eigenvector field, and the front-tracking driver resolves
interactions with full local Riemann solves.
"""

from dataclasses import dataclass

import numpy as np

from .classify import classify_jump
from .errors import ContinuationError, HyperbolicityError
from .fields import RarefactionFan, Shock, WaveFan
from .wavefronts import SHOCK, SLICE, FrontTracker

_GL_CACHE = {}


def _gauss_nodes(order):
    got = _GL_CACHE.get(order)
    if got is None:
        nodes, weights = np.polynomial.legendre.leggauss(int(order))
        got = (0.5 * (nodes + 1.0), 0.5 * weights)
        _GL_CACHE[order] = got
    return got


@dataclass(frozen=True, eq=False)
class AveragedMatrix:
    """Segment average of the flux Jacobian with its analytic eigendata.

    eigenvalues[0] < eigenvalues[1]; right eigenvectors are unit columns of
    ``right``; ``left`` holds the dual rows with left[i] . right[:, j] =
    delta_ij.  Symmetric in the two endpoint states by construction.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray

    def eigenvalue(self, family):
        return float(self.eigenvalues[family - 1])

    def right_vector(self, family):
        return self.right[:, family - 1]

    def left_vector(self, family):
        return self.left[family - 1]


def eigen_2x2(a, gap_tol=1e-10):
    """Analytic eigendecomposition of a real 2x2 matrix with real spectrum."""
    a = np.asarray(a, dtype=float)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr - 4.0 * det
    if disc <= gap_tol * gap_tol:
        raise HyperbolicityError(
            f"eigenvalue discriminant {disc:.3e} too small for strict hyperbolicity",
            discriminant=disc,
        )
    root = np.sqrt(disc)
    lam = np.array([0.5 * (tr - root), 0.5 * (tr + root)])
    cols = []
    for lv in lam:
        c1 = np.array([a[0, 1], lv - a[0, 0]])
        c2 = np.array([lv - a[1, 1], a[1, 0]])
        col = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        n = np.linalg.norm(col)
        if n == 0.0:
            raise HyperbolicityError("zero eigenvector", discriminant=disc)
        cols.append(col / n)
    right = np.column_stack(cols)
    left = np.linalg.inv(right)
    return lam, right, left


def averaged_matrix(flux, u, v, quad_order=16):
    """Average of Df along the segment [u, v] with analytic eigendata.

    The segment is canonically oriented (lexicographically smaller endpoint
    first) so the result is bitwise symmetric in (u, v).  Raises
    HyperbolicityError if the averaged matrix has complex or nearly equal
    eigenvalues.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    a, b = (u, v) if tuple(u) <= tuple(v) else (v, u)
    s, w = _gauss_nodes(quad_order)
    acc = np.zeros((2, 2))
    d = b - a
    for si, wi in zip(s, w):
        acc += wi * np.asarray(flux.jacobian(a + si * d), dtype=float)
    lam, right, left = eigen_2x2(acc)
    return AveragedMatrix(acc, lam, right, left)


def eigen_at(flux, u):
    """Eigendata of Df(u) itself (coincidence case of the segment average)."""
    return eigen_2x2(np.asarray(flux.jacobian(u), dtype=float))


def gradient_eigenvalue(flux, u, family, h=1e-6):
    """Central-difference gradient of the chosen eigenvalue of Df."""
    grad = np.zeros(2)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        lp, _, _ = eigen_at(flux, np.asarray(u) + e)
        lm, _, _ = eigen_at(flux, np.asarray(u) - e)
        grad[j] = (lp[family - 1] - lm[family - 1]) / (2.0 * h)
    return grad


def oriented_eigenvector(flux, u, family):
    """Right eigenvector oriented so the eigenvalue grows along it."""
    lam, right, _ = eigen_at(flux, u)
    r = right[:, family - 1]
    if gradient_eigenvalue(flux, u, family) @ r < 0.0:
        r = -r
    return r


@dataclass(frozen=True)
class HugoniotPoint:
    """One point of the shock locus through u_minus."""

    u_plus: np.ndarray
    speed: float
    epsilon: float
    lax_admissible: bool
    residual: float


def _rh_residual(flux, u_minus, u_plus, speed):
    return -speed * (u_plus - u_minus) + np.asarray(flux.value(u_plus)) \
        - np.asarray(flux.value(u_minus))


def hugoniot_curve(flux, u_minus, family, eps_grid, newton_tol=1e-13,
                   max_iter=60):
    """Shock locus through u_minus parameterized by the eigen-projection.

    For each epsilon the jump conditions are solved by Newton continuation
    seeded from the previous point; the extra equation pins the projection
    of u_plus - u_minus onto the oriented eigenvector to epsilon.  Points
    carry the Lax flag lambda_i(u_minus) > speed > lambda_i(u_plus).
    """
    u_minus = np.asarray(u_minus, dtype=float)
    r0 = oriented_eigenvector(flux, u_minus, family)
    lam0, _, _ = eigen_at(flux, u_minus)
    points = []
    for eps in eps_grid:
        eps = float(eps)
        if eps == 0.0:
            points.append(HugoniotPoint(u_minus.copy(), float(lam0[family - 1]),
                                        0.0, False, 0.0))
            continue
        seed = points[-1] if points and abs(points[-1].epsilon) < abs(eps) \
            and points[-1].epsilon * eps > 0.0 else None
        u = seed.u_plus.copy() if seed is not None else u_minus + eps * r0
        lam = seed.speed if seed is not None else float(lam0[family - 1])
        ok = False
        for _ in range(max_iter):
            res = _rh_residual(flux, u_minus, u, lam)
            proj = r0 @ (u - u_minus) - eps
            rhs = np.array([res[0], res[1], proj])
            if np.linalg.norm(rhs) < newton_tol:
                ok = True
                break
            jac = np.zeros((3, 3))
            jac[:2, :2] = np.asarray(flux.jacobian(u), dtype=float) - lam * np.eye(2)
            jac[:2, 2] = -(u - u_minus)
            jac[2, :2] = r0
            try:
                step = np.linalg.solve(jac, rhs)
            except np.linalg.LinAlgError as exc:
                raise ContinuationError(f"singular Newton system at eps={eps}") from exc
            u = u - step[:2]
            lam = lam - step[2]
        if not ok:
            raise ContinuationError(f"Newton failed to converge at eps={eps}")
        if not flux.contains(u):
            raise ContinuationError(f"Hugoniot point left the admissible box at eps={eps}")
        lam_minus, _, _ = eigen_at(flux, u_minus)
        lam_plus, _, _ = eigen_at(flux, u)
        lax = lam_minus[family - 1] > lam > lam_plus[family - 1]
        res = float(np.linalg.norm(_rh_residual(flux, u_minus, u, lam)))
        points.append(HugoniotPoint(u, float(lam), eps, bool(lax), res))
    return points


def integral_curve(flux, u0, family, eps, step=0.02):
    """Integrate the oriented eigenvector field from u0 over parameter eps.

    The orientation is fixed by the eigenvalue gradient at u0 and then
    carried by sign continuity, which keeps each RK4 stage at a single
    eigendecomposition.
    """
    n = max(4, int(np.ceil(abs(eps) / step)))
    h = eps / n
    u = np.asarray(u0, dtype=float).copy()
    ref = oriented_eigenvector(flux, u, family)

    def direction(state, prev):
        _, right, _ = eigen_at(flux, state)
        r = right[:, family - 1]
        return r if r @ prev >= 0.0 else -r

    for _ in range(n):
        k1 = direction(u, ref)
        k2 = direction(u + 0.5 * h * k1, k1)
        k3 = direction(u + 0.5 * h * k2, k2)
        k4 = direction(u + h * k3, k3)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        ref = k4
    return u


def wave_curve_state(flux, u0, family, eps):
    """Composite wave curve: shock branch for eps < 0, rarefaction above."""
    if eps == 0.0:
        return np.asarray(u0, dtype=float).copy()
    if eps < 0.0:
        return hugoniot_curve(flux, u0, family, [eps])[0].u_plus
    return integral_curve(flux, u0, family, eps)


def solve_riemann_2x2(flux, u_l, u_r, tol=1e-11, max_iter=40):
    """Two-wave Riemann fan by Newton on the composed wave-curve map."""
    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    if np.allclose(u_l, u_r, atol=1e-14):
        return WaveFan(())
    eps = np.array([
        (u_r - u_l) @ oriented_eigenvector(flux, u_l, 1),
        (u_r - u_l) @ oriented_eigenvector(flux, u_l, 2),
    ])
    h = 1e-7
    for _ in range(max_iter):
        mid = wave_curve_state(flux, u_l, 1, eps[0])
        out = wave_curve_state(flux, mid, 2, eps[1])
        res = out - u_r
        if np.linalg.norm(res) < tol:
            break
        jac = np.zeros((2, 2))
        for j in range(2):
            de = np.zeros(2)
            de[j] = h
            mid_p = wave_curve_state(flux, u_l, 1, eps[0] + de[0])
            out_p = wave_curve_state(flux, mid_p, 2, eps[1] + de[1])
            jac[:, j] = (out_p - out) / h
        try:
            eps = eps - np.linalg.solve(jac, res)
        except np.linalg.LinAlgError as exc:
            raise ContinuationError("singular wave-curve Jacobian") from exc
    else:
        raise ContinuationError("Riemann middle-state Newton did not converge")

    waves = []
    state = u_l
    for family, e in ((1, eps[0]), (2, eps[1])):
        if abs(e) < 1e-13:
            continue
        nxt = wave_curve_state(flux, state, family, e)
        if e < 0.0:
            pt = hugoniot_curve(flux, state, family, [e])[0]
            waves.append(Shock(state.copy(), nxt, pt.speed))
        else:
            lam_a, _, _ = eigen_at(flux, state)
            lam_b, _, _ = eigen_at(flux, nxt)
            waves.append(RarefactionFan(state.copy(), nxt,
                                        float(lam_a[family - 1]),
                                        float(lam_b[family - 1])))
        state = nxt
    return WaveFan(tuple(waves))


def _riemann_fronts_2x2(flux, delta):
    """Front list factory for the 2x2 tracker: fans sliced to width delta."""

    def solve(ul, ur):
        fan = solve_riemann_2x2(flux, ul, ur)
        fronts = []
        for w in fan.waves:
            family = _wave_family(flux, w)
            if isinstance(w, Shock):
                fronts.append((np.asarray(w.left), np.asarray(w.right), w.speed,
                               SHOCK, family))
            else:
                span = w.speed_hi - w.speed_lo
                n = max(1, int(np.ceil(span / delta)))
                states = [np.asarray(w.left)]
                for k in range(1, n + 1):
                    eps_k = (w.speed_hi - w.speed_lo) * k / n
                    states.append(integral_curve(flux, w.left, family, eps_k))
                lams = []
                for st in states:
                    ev, _, _ = eigen_at(flux, st)
                    lams.append(float(ev[family - 1]))
                for k in range(n):
                    fronts.append((states[k], states[k + 1],
                                   0.5 * (lams[k] + lams[k + 1]), SLICE, family))
        return fronts

    return solve


def _wave_family(flux, wave):
    mid = 0.5 * (np.asarray(wave.left) + np.asarray(wave.right))
    lam, _, _ = eigen_at(flux, mid)
    speed = wave.speed if isinstance(wave, Shock) else 0.5 * (wave.speed_lo + wave.speed_hi)
    return 1 if abs(speed - lam[0]) <= abs(speed - lam[1]) else 2


def front_tracking_2x2(flux, u0, delta, t_max, front_budget=20000,
                       event_budget=20000):
    """Front tracking for small-TV 2x2 data: fans sliced, interactions exact."""
    tracker = FrontTracker(_riemann_fronts_2x2(flux, delta),
                           front_budget=front_budget, event_budget=event_budget)
    return tracker.evolve(u0, t_max)


# -- averaged-eigenvalue monotonicity ----------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    epsilons: np.ndarray
    averaged_eigenvalues: np.ndarray
    derivative_signs: np.ndarray
    sign_changes: int
    lax_ordering_violations: int

    def monotone(self, margin=1e-8):
        return self.sign_changes == 0


def averaged_eigen_monotonicity(flux, u_minus, family, v, eps_grid,
                                quad_order=16, margin=1e-8):
    """Averaged eigenvalue along the shock locus, with sign diagnostics.

    Tabulates the chosen eigenvalue of the averaged matrix between the
    Hugoniot point u_plus(eps) and the fixed state v, reports the sign
    pattern of its finite-difference derivative, and counts violations of
    the Lax-shock ordering (averaged eigenvalue at u_minus above the one at
    u_plus for admissible eps < 0).
    """
    pts = hugoniot_curve(flux, np.asarray(u_minus, dtype=float), family, eps_grid)
    lams = np.array([
        averaged_matrix(flux, p.u_plus, v, quad_order).eigenvalue(family)
        for p in pts
    ])
    eps = np.array([p.epsilon for p in pts])
    order = np.argsort(eps)
    eps_sorted = eps[order]
    lam_sorted = lams[order]
    diffs = np.diff(lam_sorted)
    signs = np.sign(np.where(np.abs(diffs) > margin, diffs, 0.0))
    nonzero = signs[signs != 0.0]
    sign_changes = int(np.sum(nonzero[1:] != nonzero[:-1])) if nonzero.size else 0

    lam_at_minus = averaged_matrix(flux, np.asarray(u_minus, dtype=float), v,
                                   quad_order).eigenvalue(family)
    violations = 0
    for p, lv in zip(pts, lams):
        if p.epsilon < 0.0 and p.lax_admissible:
            if not lam_at_minus > lv - margin:
                violations += 1
    return MonotonicityReport(eps_sorted, lam_sorted, signs, sign_changes, violations)


# -- rarefaction-free scan for systems ---------------------------------------


def scan_rarefaction_free_systems(u_traj, v_traj, flux, tol=1e-9, quad_order=16):
    """Classify averaged-matrix jumps at the shock fronts of both solutions.

    At every sampled time (midpoints of the merged event partition) each
    shock front of u or v induces a jump of the averaged matrix; its family-j
    signature (one-sided averaged eigenvalues against the front speed) is
    classified for j = 1, 2.  Entropy trajectories must report zero
    rarefaction shocks with margin above tol.
    """
    from .classify import JumpKind, ScanReport

    t_all = sorted(set(u_traj.times) | set(v_traj.times))
    samples = [0.5 * (a + b) for a, b in zip(t_all[:-1], t_all[1:]) if b - a > 1e-12]
    counts = {"L": 0, "S": 0, "F": 0, "R": 0, "degenerate": 0}
    rarefactions = []
    total = 0
    from .classify import JumpRecord

    for t in samples:
        u_state = u_traj.state_at(t)
        v_state = v_traj.state_at(t)
        for state, other_state, primary in ((u_state, v_state, True),
                                            (v_state, u_state, False)):
            other_field = other_state.to_field()
            for f in state.fronts:
                if f.kind != SHOCK:
                    continue
                twin = next((g for g in other_state.fronts
                             if abs(g.position - f.position) <= 1e-11), None)
                if twin is not None:
                    if not primary:
                        continue  # coincident pairs are handled from the u side
                    if abs(twin.speed - f.speed) > 1e-11:
                        continue  # transversal crossing instant
                    w_minus = np.asarray(twin.left, dtype=float)
                    w_plus = np.asarray(twin.right, dtype=float)
                else:
                    w_minus = w_plus = np.asarray(other_field.value_at(f.position),
                                                  dtype=float)
                try:
                    am = averaged_matrix(flux, np.asarray(f.left), w_minus, quad_order)
                    ap = averaged_matrix(flux, np.asarray(f.right), w_plus, quad_order)
                except HyperbolicityError:
                    continue
                for j in (1, 2):
                    total += 1
                    cls = classify_jump(am.eigenvalue(j), ap.eigenvalue(j), f.speed)
                    scaled = tol * max(1.0, abs(am.eigenvalue(j)), abs(ap.eigenvalue(j)),
                                       abs(f.speed))
                    if cls.degenerate or cls.margin <= scaled:
                        counts["degenerate"] += 1
                    counts[cls.code] += 1
                    if cls.kind is JumpKind.RAREFACTION_SHOCK and cls.margin > scaled:
                        rarefactions.append(JumpRecord(t, f.position, am.eigenvalue(j),
                                                       ap.eigenvalue(j), f.speed, j, cls))
    worst = max((r.classification.margin for r in rarefactions), default=0.0)
    return ScanReport(counts, worst, tuple(rarefactions), total)


def hugoniot_to_csv(points, path):
    with open(path, "w") as fh:
        fh.write("epsilon,u1,u2,speed,lax\n")
        for p in points:
            fh.write(f"{p.epsilon!r},{p.u_plus[0]!r},{p.u_plus[1]!r},"
                     f"{p.speed!r},{int(p.lax_admissible)}\n")
