"""Flux functions for scalar laws and 2x2 systems, plus averaged speeds.

Scalar evaluators accept and return numpy arrays.  System evaluators map a
length-2 state to a length-2 flux and a 2x2 Jacobian.  Every flux carries an
admissible box; solvers stay inside it.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class FluxFunction:
    """Closed-form flux with derivatives and convexity metadata."""

    dim: int
    value: Callable
    jacobian: Callable
    box: tuple
    second_derivative: Callable | None = None
    convexity: str = "unknown"
    name: str = ""

    def __call__(self, u):
        return self.value(u)

    def derivative(self, u):
        """Scalar characteristic speed f'(u)."""
        if self.dim != 1:
            raise ValueError("derivative() is for scalar fluxes; use jacobian()")
        return self.jacobian(u)

    def contains(self, u):
        lo, hi = self.box
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= lo - 1e-12) and np.all(u <= hi + 1e-12))


def burgers(box=(-4.0, 4.0)):
    return FluxFunction(
        dim=1,
        value=lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
        jacobian=lambda u: np.asarray(u, dtype=float),
        second_derivative=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        box=(float(box[0]), float(box[1])),
        convexity="convex",
        name="burgers",
    )


def cubic(box=(-2.0, 2.0)):
    """f(u) = u^3/3: one inflection point, the standard nonconvex probe."""
    return FluxFunction(
        dim=1,
        value=lambda u: np.asarray(u, dtype=float) ** 3 / 3.0,
        jacobian=lambda u: np.asarray(u, dtype=float) ** 2,
        second_derivative=lambda u: 2.0 * np.asarray(u, dtype=float),
        box=(float(box[0]), float(box[1])),
        convexity="nonconvex",
        name="cubic",
    )


def scalar_flux(value, derivative, second_derivative=None, box=(-4.0, 4.0),
                convexity="unknown", name="custom"):
    return FluxFunction(1, value, derivative, (float(box[0]), float(box[1])),
                        second_derivative, convexity, name)


def p_system(pressure, dpressure, box, name="p-system"):
    """Lagrangian gas dynamics: d/dt w = d/dx v, d/dt v = -d/dx p(w).

    State u = (w, v) with specific volume w and velocity v; requires p' < 0
    on the box so both characteristic speeds are real.
    """

    def value(u):
        u = np.asarray(u, dtype=float)
        return np.array([-u[1], pressure(u[0])])

    def jac(u):
        u = np.asarray(u, dtype=float)
        return np.array([[0.0, -1.0], [dpressure(u[0]), 0.0]])

    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    return FluxFunction(2, value, jac, (lo, hi), None, "n/a", name)


def p_system_power(gamma=2.0, box=((0.4, -2.0), (3.0, 2.0))):
    """p(w) = w^-gamma, the canonical polytropic closure."""
    g = float(gamma)
    return p_system(lambda w: w ** (-g), lambda w: -g * w ** (-g - 1.0), box,
                    name=f"p-system(gamma={g})")


def p_system_inflection(hardness=0.35, center=1.0, box=((0.2, -2.0), (1.8, 2.0))):
    """Pressure with one inflection point: p(w) = -w - a (w - w0)^3.

    p' = -1 - 3a (w - w0)^2 < 0 everywhere, p'' changes sign at w0, so one
    characteristic family loses genuine nonlinearity on a single line.
    """
    a, w0 = float(hardness), float(center)
    return p_system(
        lambda w: -w - a * (w - w0) ** 3,
        lambda w: -1.0 - 3.0 * a * (w - w0) ** 2,
        box,
        name="p-system(inflection)",
    )


def euler_mass_momentum(gamma=1.4, kappa=1.0, box=((0.5, -1.5), (2.0, 1.5))):
    """Isentropic Euler in conserved variables (density, momentum).

    Flux (m2, m2^2/m1 + p(m1)) with p(rho) = kappa rho^gamma; p' > 0 keeps
    both speeds real.  The box is expressed in (density, momentum).
    """
    g, k = float(gamma), float(kappa)

    def value(u):
        u = np.asarray(u, dtype=float)
        rho, mom = u[0], u[1]
        return np.array([mom, mom * mom / rho + k * rho ** g])

    def jac(u):
        u = np.asarray(u, dtype=float)
        rho, mom = u[0], u[1]
        return np.array([[0.0, 1.0],
                         [-(mom / rho) ** 2 + k * g * rho ** (g - 1.0), 2.0 * mom / rho]])

    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    return FluxFunction(2, value, jac, (lo, hi), None, "n/a", name=f"euler(gamma={g})")


# Coincidence tolerance below which the difference quotient switches to f'.
COINCIDENCE_ATOL = 1e-12


def average_speed(flux, u, v):
    """Speed of the segment average of f' between u and v.

    Equals the difference quotient (f(u) - f(v)) / (u - v) away from the
    diagonal and f'((u+v)/2) on it; symmetric in its two arguments.
    """
    u = float(u)
    v = float(v)
    if abs(u - v) > COINCIDENCE_ATOL:
        return float((flux.value(u) - flux.value(v)) / (u - v))
    return float(flux.jacobian(0.5 * (u + v)))


def check_derivative_consistency(flux, rng, n=100, rel_tol=1e-6):
    """Compare analytic derivatives with central differences at random states.

    Returns the worst relative error; callers assert against rel_tol.
    """
    lo, hi = flux.box
    worst = 0.0
    h = 1e-6
    for _ in range(n):
        if flux.dim == 1:
            u = rng.uniform(lo + 10 * h, hi - 10 * h)
            fd = (flux.value(u + h) - flux.value(u - h)) / (2 * h)
            exact = flux.jacobian(u)
            scale = max(1.0, abs(exact))
            worst = max(worst, abs(fd - exact) / scale)
        else:
            u = rng.uniform(np.asarray(lo) + 10 * h, np.asarray(hi) - 10 * h)
            jac = np.asarray(flux.jacobian(u), dtype=float)
            fd = np.empty((2, 2))
            for j in range(2):
                e = np.zeros(2)
                e[j] = h
                fd[:, j] = (flux.value(u + e) - flux.value(u - e)) / (2 * h)
            scale = max(1.0, float(np.abs(jac).max()))
            worst = max(worst, float(np.abs(fd - jac).max()) / scale)
    return worst


def hyperbolicity_discriminant(flux, u):
    """Eigenvalue discriminant of the Jacobian; positive means strictly hyperbolic."""
    a = np.asarray(flux.jacobian(u), dtype=float)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return float(tr * tr - 4.0 * det)
