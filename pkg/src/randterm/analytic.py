"""Closed-form radial solutions used as convergence oracles.

Both cases live on [-2,2]^2 with unit speed and q(x) = |x|.  With zero running
cost the only motionless point is the origin and

    v(x) = |x| - (1 - exp(-lam |x|)) / lam.

With running cost K(x) = |x| the cost of heading straight to the origin is

    J(x) = (lam + 1)/lam * ( |x| - (1 - exp(-lam |x|)) / lam ),

and v = min(q, J): stopping immediately wins outside a circle whose radius
solves J(r) = r, shrinking from 2 to 1 as lam grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

DOMAIN = (-2.0, 2.0)

CASES = ("trivial", "circular")


@dataclass(frozen=True)
class RadialCase:
    case: str
    lam: float

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError("unknown case %r" % (self.case,))
        if self.lam <= 0:
            raise ValueError("lam must be positive")


def _moving_cost(r, lam):
    # r - (1 - e^{-lam r})/lam, computed stably for small lam*r
    x = lam * r
    if x < 1e-4:
        return r * x / 2.0 * (1.0 - x / 3.0 + x * x / 12.0)
    return r - (1.0 - math.exp(-x)) / lam


def exact_value(case, point):
    """Analytic value at an (x, y) point (or at a radius given as a scalar)."""
    r = float(np.hypot(*point)) if np.ndim(point) else float(abs(point))
    lam = case.lam
    if case.case == "trivial":
        return _moving_cost(r, lam)
    j = (lam + 1.0) / lam * _moving_cost(r, lam)
    return min(r, j)


def exact_field(case, grid):
    """Analytic value sampled on a whole grid."""
    X, Y = grid.meshgrid()
    R = np.hypot(X, Y)
    out = np.empty_like(R)
    for idx, r in np.ndenumerate(R):
        out[idx] = exact_value(case, r)
    return out


def free_boundary_radius(lam):
    """Radius of the stop-immediately circle in the circular case: the positive
    root of (lam+1)/lam * (r - (1 - e^{-lam r})/lam) = r, bracketed in (1, 2)."""

    def fun(r):
        return (lam + 1.0) / lam * _moving_cost(r, lam) - r

    return brentq(fun, 0.5, 2.5, xtol=1e-13, rtol=8.9e-16)


def error_norms(V, exact, grid, mask=None):
    """(line Linf, normalized L2, Linf) of V - exact.

    The line norm is taken over the horizontal gridline through y = 0; the L2
    norm is normalized by the domain area; masked points are excluded.
    """
    err = np.abs(np.asarray(V) - np.asarray(exact))
    live = np.ones_like(err, dtype=bool) if mask is None else ~np.asarray(mask)
    ys = grid.ys()
    j0 = int(np.argmin(np.abs(ys)))
    line = err[j0, :][live[j0, :]]
    line_linf = float(line.max()) if line.size else 0.0
    area = (grid.h * (grid.nx - 1)) * (grid.h * (grid.ny - 1))
    l2 = float(math.sqrt(grid.h ** 2 * np.sum(err[live] ** 2)) / area)
    linf = float(err[live].max())
    return line_linf, l2, linf
