"""Point-source travel-time fields and the expected-response terminal cost.

For a vehicle with isotropic speed f the minimum travel time u_i to a call
location solves |grad u_i| f = 1 with u_i = 0 at the source; mixing the fields
by the call probabilities gives the terminal cost

    q(x) = sum_i P_i u_i(x),

which feeds the grid solvers as the expected response time if a call arrives
while the vehicle sits at x.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


@dataclass
class CallSpec:
    """Call locations (snapped to the nearest gridpoint) and probabilities."""

    locations: list  # (x, y) points
    probabilities: list

    def __post_init__(self):
        total = float(np.sum(self.probabilities))
        if abs(total - 1.0) > 1e-12:
            raise ValueError("call probabilities sum to %g, expected 1" % total)
        if len(self.locations) != len(self.probabilities):
            raise ValueError("locations and probabilities length mismatch")


def eikonal_solve(grid, f, source, mask=None):
    """Fast-Marching solve of |grad u| f = 1 from a single source gridpoint.

    source is a (j, i) index pair; masked points stay at +inf (state
    constraint: motion along boundary rows/columns is allowed, leaving the
    domain is not).  Uses the standard two-axis upwind update.
    """
    nx, ny = grid.nx, grid.ny
    h = grid.h
    farr = np.empty((ny, nx))
    farr[:] = f
    fl = farr.ravel().tolist()
    blocked = [False] * (nx * ny)
    if mask is not None:
        blocked = np.asarray(mask, dtype=bool).ravel().tolist()
    u = [INF] * (nx * ny)
    accepted = [False] * (nx * ny)
    sj, si = source
    sidx = sj * nx + si
    if blocked[sidx]:
        raise ValueError("source lies on a masked point")
    u[sidx] = 0.0
    heap = [(0.0, sidx)]
    while heap:
        val, idx = heapq.heappop(heap)
        if accepted[idx] or val > u[idx]:
            continue
        accepted[idx] = True
        j, i = divmod(idx, nx)
        for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            jj, ii = j + dj, i + di
            if not (0 <= ii < nx and 0 <= jj < ny):
                continue
            nidx = jj * nx + ii
            if accepted[nidx] or blocked[nidx]:
                continue
            a = INF  # best accepted horizontal neighbor
            if ii > 0 and accepted[nidx - 1]:
                a = u[nidx - 1]
            if ii < nx - 1 and accepted[nidx + 1] and u[nidx + 1] < a:
                a = u[nidx + 1]
            b = INF  # best accepted vertical neighbor
            if jj > 0 and accepted[nidx - nx]:
                b = u[nidx - nx]
            if jj < ny - 1 and accepted[nidx + nx] and u[nidx + nx] < b:
                b = u[nidx + nx]
            hf = h / fl[nidx]
            if a > b:
                a, b = b, a
            if b - a >= hf:
                cand = a + hf
            else:
                cand = 0.5 * (a + b + math.sqrt(2.0 * hf * hf - (b - a) ** 2))
            if cand < u[nidx]:
                u[nidx] = cand
                heapq.heappush(heap, (cand, nidx))
    return np.array(u).reshape(ny, nx)


def response_cost(grid, f, calls, mask=None):
    """Probability-weighted sum of per-call travel-time fields on one grid."""
    q = np.zeros((grid.ny, grid.nx))
    for loc, prob in zip(calls.locations, calls.probabilities):
        if prob == 0.0:
            continue
        src = grid.nearest_index(loc)
        q += prob * eikonal_solve(grid, f, src, mask=mask)
    return q
