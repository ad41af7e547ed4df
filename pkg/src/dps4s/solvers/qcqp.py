"""Joint truncation program for vector queries.

    maximise    sum_u y_u
    subject to  || (sum_{t in T_f : u in t} w_{f,t} z_{f,t})_f ||_2 <= tau   for every user u
                sum_{u in t} (y_u - 1) <= z_{f,t} - 1                       for every (f, t)
                0 <= y, z <= 1

The per-user constraint is a second-order cone, so the program is handed to a
conic interior-point solver. Users without any unit are unconstrained and sit
at ``y_u = 1``.

The optimum rarely pins ``z``: the coupling rows only bound it from below. The
reported ``z`` is therefore the smallest value the coupling allows for the
optimal ``y``, ``max(0, 1 - sum_{u in t} (1 - y_u))``, which is feasible
whenever the solver's point is and makes the truncated query a function of
``y`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import clarabel
import numpy as np
from scipy import sparse

from ..aggregation_table import VectorWorkload
from ..errors import InvalidParams, SolverNonConvergence

FEAS_TOL = 1e-5


@dataclass(frozen=True)
class QcqpSolution:
    y: np.ndarray
    z: tuple[np.ndarray, ...]
    E: float
    truncated: np.ndarray
    objective: float
    tau: float


def _minimal_z(workload: VectorWorkload, y: np.ndarray) -> tuple[np.ndarray, ...]:
    out = []
    deficit = 1.0 - y
    for comp in workload.components:
        if comp.n == 0:
            out.append(np.zeros(0))
            continue
        per_unit = np.add.reduceat(deficit[comp.users], comp.ptr[:-1]) if comp.users.size else 0.0
        out.append(np.clip(1.0 - per_unit, 0.0, 1.0))
    return tuple(out)


def _solution(workload, y, tau) -> QcqpSolution:
    z = _minimal_z(workload, y)
    truncated = np.array([float(np.dot(c.weights, zf)) for c, zf in zip(workload.components, z)])
    E = float(np.sum(1.0 - y))
    return QcqpSolution(y, z, max(E, 0.0), truncated, float(np.sum(y)), tau)


def _cone_loads(workload, z) -> np.ndarray:
    """Per-user L2 norm of the truncated contribution vector."""
    m = workload.user_universe_size
    sq = np.zeros(m)
    for comp, zf in zip(workload.components, z):
        if comp.n == 0:
            continue
        vals = (comp.weights * zf)[comp.unit_of_entry]
        s = np.bincount(comp.users, weights=vals, minlength=m)[:m]
        sq += s * s
    return np.sqrt(sq)


def solve_truncation_qcqp(workload: VectorWorkload, tau: float) -> QcqpSolution:
    if not tau >= 0:
        raise InvalidParams(f"tau must be non-negative, got {tau}")
    m = workload.user_universe_size
    y = np.ones(m)
    # untruncated point is feasible: nothing to optimise
    full = tuple(np.ones(c.n) for c in workload.components)
    if np.all(_cone_loads(workload, full) <= tau):
        return _solution(workload, y, tau)

    active = np.zeros(m, dtype=bool)
    for comp in workload.components:
        active[comp.users] = True
    users = np.flatnonzero(active)
    var_of_user = -np.ones(m, dtype=np.int64)
    var_of_user[users] = np.arange(users.size)
    ny = users.size
    offsets = np.cumsum([0] + [c.n for c in workload.components])
    nz = int(offsets[-1])
    nvar = ny + nz

    rows, cols, vals, rhs = [], [], [], []
    nrow = 0

    def add_block(r, c, v, b):
        nonlocal nrow
        rows.append(np.asarray(r) + nrow)
        cols.append(np.asarray(c))
        vals.append(np.asarray(v, dtype=float))
        rhs.append(np.asarray(b, dtype=float))
        nrow += len(b)

    # non-negative cone: bounds
    idx = np.arange(nvar)
    add_block(idx, idx, np.ones(nvar), np.ones(nvar))
    add_block(idx, idx, -np.ones(nvar), np.zeros(nvar))
    # coupling: sum_u y_u - z_t <= |t| - 1
    for f, comp in enumerate(workload.components):
        if comp.n == 0:
            continue
        lengths = np.diff(comp.ptr)
        unit_rows = comp.unit_of_entry
        add_block(
            np.concatenate([unit_rows, np.arange(comp.n)]),
            np.concatenate([var_of_user[comp.users], ny + offsets[f] + np.arange(comp.n)]),
            np.concatenate([np.ones(comp.users.size), -np.ones(comp.n)]),
            lengths - 1.0,
        )
    n_linear = nrow

    # one second-order cone per active user: (tau, x_{u,1..d})
    cone_dims = []
    entries_by_user = {}
    for f, comp in enumerate(workload.components):
        if comp.n == 0:
            continue
        vals_f = comp.weights[comp.unit_of_entry]
        zcol = ny + offsets[f] + comp.unit_of_entry
        order = np.argsort(comp.users, kind="stable")
        su = comp.users[order]
        bounds = np.searchsorted(su, users, side="left"), np.searchsorted(su, users, side="right")
        for k, u in enumerate(users):
            lo, hi = bounds[0][k], bounds[1][k]
            if hi > lo:
                sel = order[lo:hi]
                entries_by_user.setdefault(int(u), []).append((zcol[sel], vals_f[sel]))
    for u in users:
        blocks = entries_by_user[int(u)]
        r = [np.zeros(0, dtype=np.int64)]
        c = [np.zeros(0, dtype=np.int64)]
        v = [np.zeros(0)]
        for j, (zc, wv) in enumerate(blocks):
            r.append(np.full(zc.size, j + 1))
            c.append(zc)
            v.append(-wv)
        b = np.zeros(len(blocks) + 1)
        b[0] = tau
        add_block(np.concatenate(r), np.concatenate(c), np.concatenate(v), b)
        cone_dims.append(len(blocks) + 1)

    A = sparse.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nrow, nvar)
    )
    b = np.concatenate(rhs)
    P = sparse.csc_matrix((nvar, nvar))
    qvec = np.concatenate([-np.ones(ny), np.zeros(nz)])
    cones = [clarabel.NonnegativeConeT(n_linear)] + [clarabel.SecondOrderConeT(k) for k in cone_dims]

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = 1e-9
    settings.tol_gap_rel = 1e-9
    settings.tol_feas = 1e-9
    settings.max_iter = 200
    solver = clarabel.DefaultSolver(P, qvec, A, b, cones, settings)
    sol = solver.solve()
    status = str(sol.status)
    if status not in ("Solved", "AlmostSolved"):
        raise SolverNonConvergence(
            f"QCQP solver stopped with status {status}",
            {"status": status, "iterations": sol.iterations,
             "primal_residual": getattr(sol, "r_prim", None), "dual_residual": getattr(sol, "r_dual", None)},
        )
    xs = np.asarray(sol.x)
    y[users] = np.clip(xs[:ny], 0.0, 1.0)
    result = _solution(workload, y, tau)
    worst = float(_cone_loads(workload, result.z).max()) if m else 0.0
    if worst > tau + FEAS_TOL:
        # clipping pushed the point outside the cone; shrink y toward zero
        scale = tau / worst
        y[users] = y[users] * scale
        result = _solution(workload, y, tau)
        if float(_cone_loads(workload, result.z).max()) > tau + FEAS_TOL:
            raise SolverNonConvergence("QCQP point violates the norm constraints",
                                       {"max_violation": worst - tau})
    return result
