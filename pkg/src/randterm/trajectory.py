"""Approximate optimal trajectories by gradient descent on the value field.

The descent follows -grad V through a bilinearly interpolated gradient
(central differences away from masked points, one-sided toward the interior
next to them).  Near the free boundary the gradient of V degenerates whenever
the running cost vanishes, so once the path comes within a few cells of the
numerically extracted boundary it finishes with a straight segment to the
nearest boundary point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import motionless_set

SNAP_CELLS = 3.0  # straight-line snap distance, in grid cells


@dataclass
class TrajectoryPath:
    points: np.ndarray  # (n, 2) polyline of (x, y)
    values: np.ndarray  # interpolated V along the polyline
    status: str = "ok"  # ok | max_steps | stalled


def gradient_field(V, mask, h):
    """Per-axis derivative fields; one-sided toward the interior where a
    neighbor is masked or outside the grid."""
    ny, nx = V.shape
    usable = np.isfinite(V) & ~mask
    Gx = np.zeros_like(V)
    Gy = np.zeros_like(V)
    for (G, axis) in ((Gx, 1), (Gy, 0)):
        Vm = np.roll(V, 1, axis=axis)
        Vp = np.roll(V, -1, axis=axis)
        ok_m = np.roll(usable, 1, axis=axis)
        ok_p = np.roll(usable, -1, axis=axis)
        if axis == 1:
            ok_m[:, 0] = False
            ok_p[:, -1] = False
        else:
            ok_m[0, :] = False
            ok_p[-1, :] = False
        central = ok_m & ok_p
        G[central] = (Vp[central] - Vm[central]) / (2 * h)
        fwd = ~ok_m & ok_p
        G[fwd] = (Vp[fwd] - V[fwd]) / h
        bwd = ok_m & ~ok_p
        G[bwd] = (V[bwd] - Vm[bwd]) / h
        G[~usable] = 0.0
    return Gx, Gy


def _bilinear(field, grid, x, y):
    fx = (x - grid.origin[0]) / grid.h
    fy = (y - grid.origin[1]) / grid.h
    i = min(max(int(math.floor(fx)), 0), grid.nx - 2)
    j = min(max(int(math.floor(fy)), 0), grid.ny - 2)
    tx = min(max(fx - i, 0.0), 1.0)
    ty = min(max(fy - j, 0.0), 1.0)
    f00 = field[j, i]
    f01 = field[j, i + 1]
    f10 = field[j + 1, i]
    f11 = field[j + 1, i + 1]
    return ((1 - ty) * ((1 - tx) * f00 + tx * f01)
            + ty * ((1 - tx) * f10 + tx * f11))


def trace(solution, problem, start, step=None, eps=None):
    """Gradient-descent polyline from start to its motionless endpoint.

    Stops on entering the motionless set, or snaps straight to the nearest
    free-boundary point once within SNAP_CELLS * h of it.  Arclength per step
    is at most h/2.
    """
    grid = problem.grid
    h = grid.h
    if step is None or step > h / 2:
        step = h / 2
    mset = motionless_set(solution, problem, eps=eps)
    boundary = mset.boundary_points
    boundary_vals = solution.V[mset.boundary_mask]
    mask = problem.mask()
    Vsafe = np.where(mask, 0.0, solution.V)
    Gx, Gy = gradient_field(np.where(mask, np.nan, solution.V), mask, h)
    Gx = np.nan_to_num(Gx)
    Gy = np.nan_to_num(Gy)
    snap_dist = SNAP_CELLS * h

    x, y = float(start[0]), float(start[1])
    pts = [(x, y)]
    j0, i0 = grid.nearest_index((x, y))
    if mset.mask[j0, i0]:
        pts_arr = np.array(pts)
        return TrajectoryPath(pts_arr, np.array([_bilinear(Vsafe, grid, x, y)]))

    max_steps = 10 * (grid.nx + grid.ny)
    status = "max_steps"
    for _ in range(max_steps):
        if boundary.size:
            d2 = (boundary[:, 0] - x) ** 2 + (boundary[:, 1] - y) ** 2
            # snap only to boundary at or below the current value: passing
            # near a higher-valued motionless region must not capture the path
            vcur = _bilinear(Vsafe, grid, x, y)
            near = (d2 <= snap_dist ** 2) & (boundary_vals <= vcur + h)
            if np.any(near):
                k = int(np.flatnonzero(near)[np.argmin(d2[near])])
                pts.append((float(boundary[k, 0]), float(boundary[k, 1])))
                status = "ok"
                break
        gx = _bilinear(Gx, grid, x, y)
        gy = _bilinear(Gy, grid, x, y)
        norm = math.hypot(gx, gy)
        if norm < 1e-14:
            status = "stalled"
            break
        x -= step * gx / norm
        y -= step * gy / norm
        x = min(max(x, grid.origin[0]), grid.origin[0] + h * (grid.nx - 1))
        y = min(max(y, grid.origin[1]), grid.origin[1] + h * (grid.ny - 1))
        pts.append((x, y))
        j0, i0 = grid.nearest_index((x, y))
        if mset.mask[j0, i0]:
            status = "ok"
            break
    pts_arr = np.array(pts)
    vals = np.array([_bilinear(Vsafe, grid, px, py) for px, py in pts_arr])
    return TrajectoryPath(pts_arr, vals, status=status)
