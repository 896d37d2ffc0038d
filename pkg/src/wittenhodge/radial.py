"""Radial reduction of the invariant even-parity problem on a round disk.

An invariant even form on the disk of radius ``R`` under the rotation field
is ``f(r) + g(r) dx^dy``.  Both ``d_X`` and its adjoint collapse to the pair

    f' = s r g,      g' = s r f,

so harmonic fields form a two-parameter family.  The Neumann field has
``g(R) = 0`` and the Dirichlet field ``f(R) = 0``.  The duality angle is the
angle between these two fields in the L2 product
``2 pi * integral (f1 f2 + g1 g2) r dr``.

:func:`duality_angle_ode` integrates the system numerically and is
independent of :func:`duality_angle_closed`, which uses the hyperbolic
solution ``cos(theta) = tanh(s R^2 / 2)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp, trapezoid


def _rhs(s):
    def rhs(r, y):
        f, g = y
        return [s * r * g, s * r * f]
    return rhs


def radial_fields(s, radius=1.0, points=2001, rtol=1e-11, atol=1e-13):
    """Sample the Neumann and Dirichlet radial profiles on ``[0, radius]``.

    Returns ``(r, (f_N, g_N), (f_D, g_D))``.
    """
    r = np.linspace(0.0, radius, points)
    sols = []
    for y0 in ([1.0, 0.0], [0.0, 1.0]):
        sol = solve_ivp(_rhs(s), (0.0, radius), y0, t_eval=r, rtol=rtol,
                        atol=atol, method="DOP853")
        if not sol.success:
            raise RuntimeError(sol.message)
        sols.append(sol.y)
    Y1, Y2 = sols
    # Combine the two fundamental solutions to meet each boundary condition.
    a, b = Y2[1, -1], -Y1[1, -1]            # g(R) = 0
    neumann = a * Y1 + b * Y2
    a, b = Y2[0, -1], -Y1[0, -1]            # f(R) = 0
    dirichlet = a * Y1 + b * Y2
    return r, neumann, dirichlet


def _inner(r, u, v):
    w = (u[0] * v[0] + u[1] * v[1]) * r
    return 2.0 * math.pi * trapezoid(w, r)


def duality_angle_ode(s, radius=1.0, points=4001):
    """Angle between the Neumann and Dirichlet fields by numerical integration."""
    if s == 0.0:
        return math.pi / 2
    r, hn, hd = radial_fields(s, radius, points)
    c = abs(_inner(r, hn, hd)) / math.sqrt(_inner(r, hn, hn) * _inner(r, hd, hd))
    return math.acos(min(c, 1.0))


def duality_angle_closed(s, radius=1.0):
    return math.acos(math.tanh(abs(s) * radius ** 2 / 2.0))
