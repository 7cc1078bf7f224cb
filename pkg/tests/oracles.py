"""Independent 1D oracles for symmetric solutions of -v'' = g(v) on (-1, 1),
v(+-1) = 0.  None of these touch the package's discretization."""

import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq
from scipy.special import erfinv


def u0_gamma1_closed_form(x):
    """-v'' = 1/v: v'^2/2 + log v is conserved, giving v = sqrt(2/pi) exp(-erfinv(x)^2)."""
    return math.sqrt(2.0 / math.pi) * np.exp(-erfinv(np.asarray(x, dtype=float)) ** 2)


def half_width(a, drop):
    """Distance from the maximum a to the zero, ``drop(a, v) = G(a) - G(v)``.

    Substituting v = a (1 - s^2) removes the inverse square root at v = a.
    """

    def integrand(s):
        if s == 0.0:
            return 0.0
        v = a * (1.0 - s * s)
        d = drop(a, v)
        return 0.0 if not d > 0 else 2.0 * a * s / math.sqrt(2.0 * d)

    # s -> 0 limit is 2a / sqrt(2 a G'(a)) which quad handles without sampling 0
    return quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)[0]


def center_by_quadrature(drop, bracket=(1e-3, 5.0)):
    return brentq(lambda a: half_width(a, drop) - 1.0, *bracket, xtol=1e-14)


def drop_singular_gamma1(a, v):
    return -math.log1p(-(a - v) / a)


def drop_singular_gamma1_linear(a, v):
    return -math.log1p(-(a - v) / a) + 0.5 * (a * a - v * v)


def drop_regularized_gamma1_n1(a, v):
    return math.log((a + 1.0) / (v + 1.0))


def shoot(rhs, a, eps=1e-9):
    """Integrate v'' = -rhs(v) from (v, v') = (a, 0) at x = 0 until v = eps*a.

    The remaining sliver below eps*a is closed with the local slope.
    """

    def f(_, y):
        return [y[1], -rhs(max(y[0], 1e-300))]

    def hit(_, y):
        return y[0] - eps * a

    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(f, (0.0, 10.0), [a, 0.0], method="DOP853", rtol=1e-12, atol=1e-14, events=hit)
    if not sol.t_events[0].size:
        return math.inf
    x_hit = sol.t_events[0][0]
    slope = sol.y_events[0][0][1]
    return x_hit + eps * a / abs(slope)


def center_by_shooting(rhs, bracket=(0.05, 3.0), eps=1e-9):
    """Maximum value a with shoot(rhs, a) = 1 (half width of (-1, 1))."""
    return brentq(lambda a: shoot(rhs, a, eps) - 1.0, *bracket, xtol=1e-13)
