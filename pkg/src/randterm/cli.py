"""Command-line front end: scenario ingestion, solver runs, convergence tables.

Exit codes: 0 success, 2 validation/parse failure, 3 solver nonconvergence,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import analytic, graph, grid, idle, io, trajectory


class Nonconvergence(RuntimeError):
    pass


def _config_hash(scenario_path, flags):
    h = hashlib.sha256()
    with open(scenario_path, "rb") as fh:
        h.update(fh.read())
    h.update(json.dumps(flags, sort_keys=True).encode())
    return h.hexdigest()[:16]


def _write_summary(out_dir, summary):
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _override_p(problem, p):
    for edge in problem.p:
        problem.p[edge] = p


def cmd_run_graph(args):
    os.makedirs(args.out, exist_ok=True)
    if io.is_idle_scenario(args.scenario):
        scenario = io.load_idle(args.scenario)
        problem = idle.build_problem(scenario)
    else:
        problem = io.load_graph(args.scenario, default_p=args.p)
    if args.p is not None:
        _override_p(problem, args.p)
    issues = graph.validate(problem)
    if issues and args.solver != "vi":
        print("validation failed:", file=sys.stderr)
        for msg in issues:
            print("  " + msg, file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    heap_ops = 0
    if args.solver == "dijkstra":
        sol = graph.dijkstra_solve(problem, track_updates=True)
        heap_ops = len(sol.acceptance_order) + len(sol.update_log)
    elif args.solver == "dial":
        sol = graph.dial_solve(problem)
        heap_ops = len(sol.acceptance_order)
    else:
        sol = graph.value_iteration(problem, tol=args.tol)
        if sol.status != "ok":
            print("value iteration did not converge after %d sweeps"
                  % sol.iterations, file=sys.stderr)
            return 3
    wall = time.perf_counter() - t0
    io.write_graph_solution(os.path.join(args.out, "solution.csv"), problem, sol)
    _write_summary(args.out, {
        "scenario": os.path.basename(args.scenario),
        "solver": args.solver,
        "nodes": problem.node_count,
        "wall_time_s": wall,
        "heap_operations": heap_ops,
        "iterations": sol.iterations,
        "motionless_count": int(np.count_nonzero(sol.motionless)),
        "config_hash": _config_hash(args.scenario,
                                    {"solver": args.solver, "p": args.p}),
    })
    return 0


def _parse_emit(values):
    out = []
    for item in values:
        item = item.strip()
        if item.startswith("trajectory:"):
            coords = item.split(":", 1)[1].split(",")
            if len(coords) != 2:
                raise io.FormatError(
                    "trajectory emit needs a start point: trajectory:X,Y")
            out.append(("trajectory", (float(coords[0]), float(coords[1]))))
        elif item:
            out.append((item, None))
    return out


def cmd_run_grid(args):
    os.makedirs(args.out, exist_ok=True)
    n = None
    if args.grid:
        nx, _, ny = args.grid.partition("x")
        if ny and ny != nx:
            raise io.FormatError("--grid override must be square (NxN)")
        n = int(nx)
    problem, _calls = io.load_grid_scenario(args.scenario, lam=args.lam, n=n)
    t0 = time.perf_counter()
    if args.solver == "fmm":
        sol = grid.fmm_solve(problem)
    else:
        sol = grid.sweep_oracle(problem, tol=args.tol)
        if sol.status != "ok":
            res = grid.discretization_residual(problem, sol.V)
            print("sweeping did not converge after %d sweeps; "
                  "max residual %.3e" % (sol.sweeps, np.abs(res).max()),
                  file=sys.stderr)
            return 3
    wall = time.perf_counter() - t0
    emits = args.emit or ["value"]
    summary_extra = {}
    for kind, payload in _parse_emit(emits):
        if kind == "value":
            io.write_field_csv(os.path.join(args.out, "value.csv"), sol.V)
        elif kind == "mask":
            io.write_mask_csv(os.path.join(args.out, "mask.csv"),
                              sol.motionless_mask)
        elif kind == "boundary":
            mset = grid.motionless_set(sol, problem)
            io.write_points_csv(os.path.join(args.out, "boundary.csv"),
                                mset.boundary_points)
        elif kind == "trajectory":
            traj = trajectory.trace(sol, problem, payload)
            io.write_trajectory_csv(os.path.join(args.out, "trajectory.csv"),
                                    traj)
            summary_extra["trajectory_status"] = traj.status
        else:
            raise io.FormatError("unknown emit kind %r" % kind)
    summary = {
        "scenario": os.path.basename(args.scenario),
        "solver": args.solver,
        "grid": [problem.grid.nx, problem.grid.ny],
        "wall_time_s": wall,
        "sweeps": sol.sweeps,
        "motionless_count": int(np.count_nonzero(sol.motionless_mask)),
        "config_hash": _config_hash(args.scenario, {
            "solver": args.solver, "lambda": args.lam, "grid": args.grid,
            "emit": sorted(emits)}),
    }
    summary.update(summary_extra)
    _write_summary(args.out, summary)
    return 0


def _radial_problem(case, n):
    lo, hi = analytic.DOMAIN
    g = grid.Grid2D(nx=n, ny=n, h=(hi - lo) / (n - 1), origin=(lo, lo))
    X, Y = g.meshgrid()
    R = np.hypot(X, Y)
    K = 0.0 if case.case == "trivial" else R
    return grid.GridProblem(grid=g, f=1.0, K=K, q=R, lam=case.lam)


def cmd_run_convergence(args):
    os.makedirs(args.out, exist_ok=True)
    case = analytic.RadialCase(case=args.case, lam=args.lam)
    grids = [int(t) for t in args.grids.split(",")]
    rows = []
    prev_linf = None
    for n in grids:
        problem = _radial_problem(case, n)
        sol = grid.fmm_solve(problem)
        exact = analytic.exact_field(case, problem.grid)
        line_linf, l2, linf = analytic.error_norms(sol.V, exact, problem.grid)
        order = None if prev_linf is None else math.log2(prev_linf / linf)
        rows.append((n, line_linf, l2, linf, order))
        prev_linf = linf
    io.write_convergence_csv(os.path.join(args.out, "convergence.csv"), rows)
    for row in rows:
        print("%5d  line_Linf=%.6f  L2=%.6f  Linf=%.6f  order=%s"
              % (row[0], row[1], row[2], row[3],
                 "-" if row[4] is None else "%.3f" % row[4]))
    return 0


def random_graph_problem(seed, nodes=50, degree=4, delta=0.1, p_range=(0.2, 0.9)):
    """Random strongly-A1-A3 instance; shared by tests and the CLI generator."""
    rng = np.random.default_rng(seed)
    M = nodes
    adjacency = [[i] for i in range(M)]
    for i in range(M):
        # a ring edge guarantees strong connectivity, the rest are random
        nbrs = {(i + 1) % M}
        nbrs.update(int(j) for j in rng.integers(0, M, size=degree - 1)
                    if j != i)
        adjacency[i] = sorted({i} | nbrs)
    q = rng.uniform(0.0, 10.0, size=M)
    K = {}
    p = {}
    for i, nbrs in enumerate(adjacency):
        for j in nbrs:
            if i == j:
                K[(i, j)] = 0.0
                p[(i, j)] = float(rng.uniform(*p_range))
            else:
                K[(i, j)] = delta + float(rng.uniform(0.0, 5.0))
                p[(i, j)] = float(rng.uniform(*p_range))
    return graph.GraphProblem(node_count=M, adjacency=adjacency, K=K, q=q,
                              p=p, delta=delta)


def cmd_random_graph(args):
    problem = random_graph_problem(args.seed, nodes=args.nodes)
    lines = ["nodes %d" % problem.node_count]
    for i in range(problem.node_count):
        lines.append("q %d %s" % (i, repr(float(problem.q[i]))))
    for i, j in problem.edges():
        if i != j:
            lines.append("edge %d %d %s %s"
                         % (i, j, repr(problem.K[(i, j)]),
                            repr(problem.p[(i, j)])))
        else:
            lines.append("edge %d %d 0.0 %s" % (i, i, repr(problem.p[(i, i)])))
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="randterm",
        description="Solvers for deterministic processes terminated at a "
                    "Poisson-random time.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("run-graph", help="solve a graph scenario file")
    g.add_argument("scenario")
    g.add_argument("--solver", choices=("dijkstra", "dial", "vi"),
                   default="dijkstra")
    g.add_argument("--p", type=float, default=None,
                   help="override the kill probability on every edge")
    g.add_argument("--tol", type=float, default=1e-13)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_run_graph)

    r = sub.add_parser("run-grid", help="solve a JSON grid scenario")
    r.add_argument("scenario")
    r.add_argument("--solver", choices=("fmm", "sweep"), default="fmm")
    r.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="override the termination rate")
    r.add_argument("--grid", default=None, metavar="NxN",
                   help="override the grid resolution")
    r.add_argument("--emit", action="append", default=None,
                   help="value, mask, boundary, or trajectory:X,Y (repeatable)")
    r.add_argument("--tol", type=float, default=1e-12)
    r.add_argument("--out", default=".")
    r.set_defaults(func=cmd_run_grid)

    c = sub.add_parser("run-convergence",
                       help="error table against the radial closed forms")
    c.add_argument("case", choices=("trivial", "circular"))
    c.add_argument("--lambda", dest="lam", type=float, default=0.5)
    c.add_argument("--grids", default="101,201,401")
    c.add_argument("--out", default=".")
    c.set_defaults(func=cmd_run_convergence)

    m = sub.add_parser("random-graph",
                       help="emit a random valid graph scenario file")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--nodes", type=int, default=50)
    m.add_argument("--out", default="-")
    m.set_defaults(func=cmd_random_graph)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except io.FormatError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
