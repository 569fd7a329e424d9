"""Path families, nonconservative products, and generalized jump relations.

A path family connects two states through the unit interval; the
nonconservative product of a matrix field against a BV function is a measure
whose atoms are path integrals at the jumps.  For gradient integrands the
atoms telescope to potential differences independently of the path; the
non-gradient witness below shows genuine path dependence.  Generalized jump
relations replace the classical ones for nonconservative systems, and the
superposition of two jumps with a common speed fails to satisfy the
composite relation, which is the structural obstruction probed here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContinuationError, PathRangeError, SetupError
from .fields import MeasureField, PiecewiseConstantField, RarefactionFan, Shock, WaveFan

_GL_CACHE = {}


def _gauss01(order):
    got = _GL_CACHE.get(order)
    if got is None:
        nodes, weights = np.polynomial.legendre.leggauss(int(order))
        got = (0.5 * (nodes + 1.0), 0.5 * weights)
        _GL_CACHE[order] = got
    return got


@dataclass(frozen=True)
class PathFamily:
    """Connecting paths s in [0,1] -> state, Lipschitz in the endpoints."""

    kind: str
    point: object = None       # point(s, u_minus, u_plus) -> state
    tangent: object = None     # d/ds of point, same signature

    @classmethod
    def straightline(cls):
        def point(s, um, up):
            um = np.asarray(um, dtype=float)
            up = np.asarray(up, dtype=float)
            return um + np.multiply.outer(np.asarray(s, dtype=float), up - um) \
                if np.ndim(s) else um + s * (up - um)

        def tangent(s, um, up):
            um = np.asarray(um, dtype=float)
            up = np.asarray(up, dtype=float)
            return up - um

        return cls("straightline", point, tangent)

    @classmethod
    def bezier_bulge(cls, offset):
        """Quadratic Bezier with control point midway plus a fixed offset."""
        offset = np.asarray(offset, dtype=float)

        def control(um, up):
            return 0.5 * (np.asarray(um, dtype=float) + np.asarray(up, dtype=float)) \
                + offset

        def point(s, um, up):
            um = np.asarray(um, dtype=float)
            up = np.asarray(up, dtype=float)
            c = control(um, up)
            return (1 - s) ** 2 * um + 2 * s * (1 - s) * c + s ** 2 * up

        def tangent(s, um, up):
            um = np.asarray(um, dtype=float)
            up = np.asarray(up, dtype=float)
            c = control(um, up)
            return 2 * (1 - s) * (c - um) + 2 * s * (up - c)

        return cls(f"bezier({offset.tolist()})", point, tangent)

    @classmethod
    def from_callables(cls, point, tangent=None, name="user"):
        if tangent is None:
            h = 1e-7

            def tangent(s, um, up):
                lo = max(s - h, 0.0)
                hi = min(s + h, 1.0)
                return (np.asarray(point(hi, um, up), dtype=float)
                        - np.asarray(point(lo, um, up), dtype=float)) / (hi - lo)

        return cls(name, point, tangent)

    def endpoints_ok(self, um, up, tol=1e-12):
        p0 = np.asarray(self.point(0.0, um, up), dtype=float)
        p1 = np.asarray(self.point(1.0, um, up), dtype=float)
        return (np.max(np.abs(p0 - np.asarray(um, dtype=float))) <= tol
                and np.max(np.abs(p1 - np.asarray(up, dtype=float))) <= tol)

    def sampled_tv(self, um, up, samples=257):
        ss = np.linspace(0.0, 1.0, samples)
        pts = np.asarray([self.point(s, um, up) for s in ss], dtype=float)
        d = np.diff(pts, axis=0)
        if d.ndim == 1:
            return float(np.sum(np.abs(d)))
        return float(np.sum(np.linalg.norm(d, axis=1)))


def path_integral(g, path, u_minus, u_plus, quad_order=32, box=None):
    """Gauss-Legendre quadrature of g(path) dpath along the connecting path."""
    s, w = _gauss01(quad_order)
    um = np.asarray(u_minus, dtype=float)
    up = np.asarray(u_plus, dtype=float)
    scalar = um.ndim == 0
    acc = 0.0 if scalar else np.zeros(um.shape)
    for si, wi in zip(s, w):
        p = np.asarray(path.point(float(si), um, up), dtype=float)
        if box is not None:
            lo, hi = box
            if np.any(p < np.asarray(lo) - 1e-9) or np.any(p > np.asarray(hi) + 1e-9):
                raise PathRangeError(f"path leaves the admissible box at s={si:.3f}")
        dp = np.asarray(path.tangent(float(si), um, up), dtype=float)
        gv = np.asarray(g(p), dtype=float)
        acc = acc + wi * (gv * dp if scalar else gv @ dp)
    return acc


def nc_product(g, u, path, quad_order=32, box=None):
    """Nonconservative product measure of g against a piecewise-constant u.

    The continuity part vanishes (u is flat between jumps); each jump
    contributes the path integral of g(path) dpath as an atom.  For g equal
    to a gradient the atom is the potential difference for any valid path.
    """
    zeros = np.zeros_like(np.asarray(u.values[0], dtype=float))
    density = PiecewiseConstantField(
        np.empty(0), np.asarray([zeros]) if u.dim > 1 else np.asarray([0.0])
    )
    atoms = []
    for x, ul, ur in u.jumps():
        mass = path_integral(g, path, ul, ur, quad_order, box)
        if np.any(np.abs(np.atleast_1d(mass)) > 0.0):
            atoms.append((float(x), mass if u.dim > 1 else float(mass)))
    return MeasureField(density, tuple(atoms))


def generalized_hugoniot_residual(a_eval, path, u_minus, u_plus, speed,
                                  quad_order=32, box=None):
    """Residual of the generalized jump relation at one discontinuity.

    Zero for admissible jumps; for a conservative field (a_eval = Df) and any
    valid path this reduces to the classical jump-condition residual.
    """
    um = np.asarray(u_minus, dtype=float)
    up = np.asarray(u_plus, dtype=float)
    integral = path_integral(a_eval, path, um, up, quad_order, box)
    return -speed * (up - um) + integral


# -- the fixed nonconservative witness system ---------------------------------


@dataclass(frozen=True)
class NonconservativeSystem:
    """Quasilinear 2x2 system d/dt u + A(u) d/dx u = 0 given by A alone."""

    matrix: object
    box: tuple
    name: str = "model"

    def __call__(self, u):
        return self.matrix(u)


def model_system(box=((-0.6, -0.6), (0.6, 0.6))):
    """Symmetric, strictly hyperbolic, genuinely nonlinear witness system.

    A(u) = [[u2, 1], [1, u2]] has eigenvalues u2 -/+ 1 (constant gap 2) and
    constant eigenvector directions; its first row is not a gradient, so
    straightline products are path dependent and superposition fails.
    """

    def matrix(u):
        u = np.asarray(u, dtype=float)
        return np.array([[u[1], 1.0], [1.0, u[1]]])

    return NonconservativeSystem(matrix, (np.asarray(box[0], dtype=float),
                                          np.asarray(box[1], dtype=float)))


def _nc_eigen(a_eval, u):
    a = np.asarray(a_eval(u), dtype=float)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr - 4.0 * det
    if disc <= 1e-20:
        raise ContinuationError("witness system lost strict hyperbolicity")
    root = np.sqrt(disc)
    lam = np.array([0.5 * (tr - root), 0.5 * (tr + root)])
    cols = []
    for lv in lam:
        c1 = np.array([a[0, 1], lv - a[0, 0]])
        c2 = np.array([lv - a[1, 1], a[1, 0]])
        col = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        cols.append(col / np.linalg.norm(col))
    return lam, np.column_stack(cols)


def _nc_oriented(a_eval, u, family, h=1e-6):
    lam, right = _nc_eigen(a_eval, u)
    r = right[:, family - 1]
    grad = np.zeros(2)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        lp, _ = _nc_eigen(a_eval, np.asarray(u) + e)
        lm, _ = _nc_eigen(a_eval, np.asarray(u) - e)
        grad[j] = (lp[family - 1] - lm[family - 1]) / (2 * h)
    return r if grad @ r >= 0.0 else -r


def nc_shock_point(a_eval, path, u_minus, family, eps, quad_order=32,
                   newton_tol=1e-12, max_iter=60):
    """One point of the generalized shock locus through u_minus."""
    um = np.asarray(u_minus, dtype=float)
    r0 = _nc_oriented(a_eval, um, family)
    lam0, _ = _nc_eigen(a_eval, um)
    u = um + eps * r0
    lam = float(lam0[family - 1])
    h = 1e-7
    for _ in range(max_iter):
        res = generalized_hugoniot_residual(a_eval, path, um, u, lam, quad_order)
        proj = r0 @ (u - um) - eps
        rhs = np.array([res[0], res[1], proj])
        if np.linalg.norm(rhs) < newton_tol:
            break
        jac = np.zeros((3, 3))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            rp = generalized_hugoniot_residual(a_eval, path, um, u + e, lam, quad_order)
            jac[:2, j] = (rp - res) / h
            jac[2, j] = r0[j]
        jac[:2, 2] = -(u - um)
        try:
            step = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError as exc:
            raise ContinuationError("singular Newton system on the shock locus") from exc
        u = u - step[:2]
        lam = lam - step[2]
    else:
        raise ContinuationError(f"generalized shock Newton diverged at eps={eps}")
    return u, lam


def _nc_integral_curve(a_eval, u0, family, eps, step=0.02):
    n = max(4, int(np.ceil(abs(eps) / step)))
    h = eps / n
    u = np.asarray(u0, dtype=float).copy()
    ref = _nc_oriented(a_eval, u, family)

    def direction(state, prev):
        _, right = _nc_eigen(a_eval, state)
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


def _nc_wave_state(a_eval, path, u0, family, eps, quad_order):
    if eps == 0.0:
        return np.asarray(u0, dtype=float).copy()
    if eps < 0.0:
        return nc_shock_point(a_eval, path, u0, family, eps, quad_order)[0]
    return _nc_integral_curve(a_eval, u0, family, eps)


def solve_nc_riemann(a_eval, path, u_l, u_r, quad_order=32, tol=1e-10,
                     max_iter=40):
    """Two-wave Riemann fan in the generalized (path-dependent) sense.

    Shock branches solve the generalized jump relation, rarefaction branches
    follow integral curves; each shock satisfies the Lax inequalities.
    """
    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    if np.allclose(u_l, u_r, atol=1e-14):
        return WaveFan(())
    eps = np.array([
        (u_r - u_l) @ _nc_oriented(a_eval, u_l, 1),
        (u_r - u_l) @ _nc_oriented(a_eval, u_l, 2),
    ])
    h = 1e-7
    for _ in range(max_iter):
        mid = _nc_wave_state(a_eval, path, u_l, 1, eps[0], quad_order)
        out = _nc_wave_state(a_eval, path, mid, 2, eps[1], quad_order)
        res = out - u_r
        if np.linalg.norm(res) < tol:
            break
        jac = np.zeros((2, 2))
        for j in range(2):
            de = np.zeros(2)
            de[j] = h
            mid_p = _nc_wave_state(a_eval, path, u_l, 1, eps[0] + de[0], quad_order)
            out_p = _nc_wave_state(a_eval, path, mid_p, 2, eps[1] + de[1], quad_order)
            jac[:, j] = (out_p - out) / h
        try:
            eps = eps - np.linalg.solve(jac, res)
        except np.linalg.LinAlgError as exc:
            raise ContinuationError("singular wave-curve Jacobian") from exc
    else:
        raise ContinuationError("nonconservative Riemann Newton did not converge")

    waves = []
    state = u_l
    for family, e in ((1, eps[0]), (2, eps[1])):
        if abs(e) < 1e-12:
            continue
        nxt = _nc_wave_state(a_eval, path, state, family, e, quad_order)
        if e < 0.0:
            _, lam = nc_shock_point(a_eval, path, state, family, e, quad_order)
            waves.append(Shock(state.copy(), nxt, float(lam)))
        else:
            la, _ = _nc_eigen(a_eval, state)
            lb, _ = _nc_eigen(a_eval, nxt)
            waves.append(RarefactionFan(state.copy(), nxt, float(la[family - 1]),
                                        float(lb[family - 1])))
        state = nxt
    return WaveFan(tuple(waves))


# -- superposition probe -------------------------------------------------------


@dataclass(frozen=True)
class SuperpositionReport:
    u_left: np.ndarray
    u_middle: np.ndarray
    u_right: np.ndarray
    speed: float
    pairwise_residuals: tuple
    composite_residual: float


def _conservative_second_state(flux, u_m, speed, seed_dir, newton_tol=1e-13,
                               max_iter=80):
    """Nontrivial solution of the jump relation from u_m at a fixed speed."""
    u = np.asarray(u_m, dtype=float) + seed_dir
    for _ in range(max_iter):
        res = -speed * (u - u_m) + np.asarray(flux.value(u)) - np.asarray(flux.value(u_m))
        if np.linalg.norm(res) < newton_tol:
            break
        jac = np.asarray(flux.jacobian(u), dtype=float) - speed * np.eye(2)
        try:
            u = u - np.linalg.solve(jac, res)
        except np.linalg.LinAlgError as exc:
            raise SetupError("singular Jacobian while building the triple") from exc
    else:
        raise SetupError("could not solve the second jump relation")
    if np.linalg.norm(u - u_m) < 1e-6:
        raise SetupError("second state collapsed to the middle state")
    return u


def superposition_check_conservative(flux, u_l, family=1, eps=-0.2,
                                     quad_order=32):
    """Two same-speed conservative jumps compose exactly (telescoping).

    Builds u_m on the shock locus of u_l, then u_r from u_m at the same
    speed, and evaluates the composite jump relation; the residual is the sum
    of the two pairwise residuals, hence round-off.
    """
    from .systems import hugoniot_curve, oriented_eigenvector

    u_l = np.asarray(u_l, dtype=float)
    pt = hugoniot_curve(flux, u_l, family, [eps])[0]
    u_m, speed = pt.u_plus, pt.speed
    seed = 0.5 * abs(eps) * oriented_eigenvector(flux, u_m, family) \
        + np.array([0.0, 1e-3])
    u_r = _conservative_second_state(flux, u_m, speed, seed)
    r1 = -speed * (u_m - u_l) + np.asarray(flux.value(u_m)) - np.asarray(flux.value(u_l))
    r2 = -speed * (u_r - u_m) + np.asarray(flux.value(u_r)) - np.asarray(flux.value(u_m))
    r13 = -speed * (u_r - u_l) + np.asarray(flux.value(u_r)) - np.asarray(flux.value(u_l))
    return SuperpositionReport(u_l, u_m, u_r, float(speed),
                               (float(np.linalg.norm(r1)), float(np.linalg.norm(r2))),
                               float(np.linalg.norm(r13)))


def superposition_check_nonconservative(a_eval, path, u_l, family=1, eps=-0.25,
                                        quad_order=32, newton_tol=1e-12):
    """Same-speed generalized jumps whose composition fails to close.

    The middle state sits on the generalized shock locus of u_l.  A second
    jump from u_m at the same speed is found on the other family's locus
    (its root lies where the other family's midpoint eigenvalue matches the
    speed, which may sit well outside the small-data ball; the relation is
    purely algebraic, so that excursion is harmless).  Pairwise residuals
    vanish to Newton tolerance while the composite residual stays bounded
    away from zero: the witness of the failing superposition property.
    """
    u_l = np.asarray(u_l, dtype=float)
    u_m, speed = nc_shock_point(a_eval, path, u_l, family, eps, quad_order)

    other = 2 if family == 1 else 1
    r_dir = _nc_oriented(a_eval, u_m, other)

    def speed_gap(a):
        mid = u_m + 0.5 * a * r_dir
        lam, _ = _nc_eigen(a_eval, mid)
        return lam[other - 1] - speed

    a_lo, a_hi = -12.0, 12.0
    grid = np.linspace(a_lo, a_hi, 97)
    vals = [speed_gap(a) for a in grid]
    bracket = None
    for (a0, v0), (a1, v1) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if abs(a0) > 0.3 and v0 * v1 <= 0.0:
            bracket = (a0, a1)
            break
    if bracket is None:
        raise SetupError("no same-speed root on the other family's locus")
    a0, a1 = bracket
    for _ in range(80):
        am = 0.5 * (a0 + a1)
        if speed_gap(a0) * speed_gap(am) <= 0.0:
            a1 = am
        else:
            a0 = am
    u = u_m + 0.5 * (a0 + a1) * r_dir

    h = 1e-7
    for _ in range(80):
        res = generalized_hugoniot_residual(a_eval, path, u_m, u, speed, quad_order)
        if np.linalg.norm(res) < newton_tol:
            break
        jac = np.zeros((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            rp = generalized_hugoniot_residual(a_eval, path, u_m, u + e, speed, quad_order)
            jac[:, j] = (rp - res) / h
        try:
            u = u - np.linalg.solve(jac, res)
        except np.linalg.LinAlgError as exc:
            raise SetupError("singular Jacobian while building the nc triple") from exc
    else:
        raise SetupError("could not solve the second generalized jump relation")
    if np.linalg.norm(u - u_m) < 1e-6 or np.linalg.norm(u - u_l) < 1e-6:
        raise SetupError("nonconservative triple degenerated")

    r1 = generalized_hugoniot_residual(a_eval, path, u_l, u_m, speed, quad_order)
    r2 = generalized_hugoniot_residual(a_eval, path, u_m, u, speed, quad_order)
    r13 = generalized_hugoniot_residual(a_eval, path, u_l, u, speed, quad_order)
    return SuperpositionReport(u_l, u_m, u, float(speed),
                               (float(np.linalg.norm(r1)), float(np.linalg.norm(r2))),
                               float(np.linalg.norm(r13)))
