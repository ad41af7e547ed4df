"""Truncation linear program.

    maximise    sum_t x_t
    subject to  sum_{t : u in t} x_t <= tau   for every user u
                0 <= x_t <= w_t

Users whose total weight is already at most ``tau`` can never bind, so their
rows are dropped before the LP is handed to the simplex solver; units touched
only by such users are fixed at ``x_t = w_t``. Single-contributor tables
decompose per user and are solved in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ..aggregation_table import AggregationUnitTable
from ..errors import InvalidParams, SolverFailure

FEAS_TOL = 1e-6
_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
    "presolve": True,
}


@dataclass(frozen=True)
class TruncationSolution:
    x: np.ndarray
    objective: float
    tau: float


def _single_user_solution(table: AggregationUnitTable, tau: float) -> TruncationSolution:
    sums = table.user_weight_sums()
    scale = np.ones_like(sums)
    over = sums > tau
    scale[over] = tau / sums[over]
    owner = table.users[table.ptr[:-1]] if table.n else np.zeros(0, dtype=np.int64)
    x = table.weights * scale[owner]
    objective = float(np.minimum(sums, tau).sum())
    return TruncationSolution(x, objective, tau)


def solve_truncation_lp(table: AggregationUnitTable, tau: float) -> TruncationSolution:
    """Optimal truncated value f(S, tau) and a maximising ``x``."""
    if not tau >= 0:
        raise InvalidParams(f"tau must be non-negative, got {tau}")
    n = table.n
    if n == 0:
        return TruncationSolution(np.zeros(0), 0.0, tau)
    if tau == 0:
        return TruncationSolution(np.zeros(n), 0.0, tau)
    lengths = np.diff(table.ptr)
    if lengths.max() == 1:
        return _single_user_solution(table, tau)

    sums = table.user_weight_sums()
    binding = sums > tau
    x = table.weights.copy()
    if not binding.any():
        return TruncationSolution(x, float(np.sum(x)), tau)

    entry_unit = table.unit_of_entry
    entry_binding = binding[table.users]
    free = np.zeros(n, dtype=bool)
    free[entry_unit[entry_binding]] = True
    cols = np.flatnonzero(free)
    col_of_unit = -np.ones(n, dtype=np.int64)
    col_of_unit[cols] = np.arange(cols.size)
    rows_users = np.flatnonzero(binding)
    row_of_user = -np.ones(table.user_universe_size, dtype=np.int64)
    row_of_user[rows_users] = np.arange(rows_users.size)

    r = row_of_user[table.users[entry_binding]]
    c = col_of_unit[entry_unit[entry_binding]]
    A = sparse.csr_matrix(
        (np.ones(r.size), (r, c)), shape=(rows_users.size, cols.size)
    )
    w = table.weights[cols]
    res = linprog(
        -np.ones(cols.size),
        A_ub=A,
        b_ub=np.full(rows_users.size, float(tau)),
        bounds=np.column_stack([np.zeros(cols.size), w]),
        method="highs-ds",
        options=_HIGHS_OPTIONS,
    )
    if res.status != 0 or res.x is None:
        raise SolverFailure(
            f"truncation LP failed: {res.message}",
            {"status": res.status, "iterations": getattr(res, "nit", None),
             "rows": int(rows_users.size), "cols": int(cols.size)},
        )
    xs = np.clip(res.x, 0.0, w)
    load = A @ xs
    if load.size and load.max() > tau + FEAS_TOL:
        raise SolverFailure(
            "truncation LP returned an infeasible point",
            {"max_violation": float(load.max() - tau), "iterations": getattr(res, "nit", None)},
        )
    x[cols] = xs
    return TruncationSolution(x, float(np.sum(x)), tau)


def truncated_value(table: AggregationUnitTable, tau: float) -> float:
    return solve_truncation_lp(table, tau).objective
