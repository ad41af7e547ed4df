"""Slow, independent reference solvers for small instances (used by tests)."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from ..aggregation_table import AggregationUnitTable, VectorWorkload
from ..errors import InstanceTooLarge, InvalidParams

LP_MAX_UNITS = 12
LP_MAX_USERS = 8


def _bland_simplex_max(A, b, c):
    """max c.x s.t. A x <= b, x >= 0 with b >= 0, exact rational tableau, Bland's rule."""
    m, n = len(A), len(c)
    # tableau rows: [A | I | b]; slack basis is feasible because b >= 0
    T = [list(A[i]) + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    obj = [-ci for ci in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    while True:
        entering = next((j for j in range(n + m) if obj[j] < 0), None)
        if entering is None:
            return obj[-1]
        best = None
        for i in range(m):
            a = T[i][entering]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise InvalidParams("LP is unbounded")
        r = best[1]
        piv = T[r][entering]
        T[r] = [v / piv for v in T[r]]
        for i in range(m):
            if i != r and T[i][entering] != 0:
                f = T[i][entering]
                T[i] = [vi - f * vr for vi, vr in zip(T[i], T[r])]
        f = obj[entering]
        obj = [vo - f * vr for vo, vr in zip(obj, T[r])]
        basis[r] = entering


def lp_oracle(table: AggregationUnitTable, tau: float) -> float:
    """Truncation LP optimum via an exact rational dense simplex."""
    n = table.n
    present = np.unique(table.users) if table.users.size else np.zeros(0, dtype=np.int64)
    if n > LP_MAX_UNITS or present.size > LP_MAX_USERS:
        raise InstanceTooLarge(f"oracle handles <= {LP_MAX_UNITS} units and <= {LP_MAX_USERS} users")
    if n == 0 or tau == 0:
        return 0.0
    t = Fraction(tau)
    A, b = [], []
    for u in present:
        A.append([Fraction(int(u in table.contributors(i))) for i in range(n)])
        b.append(t)
    for i in range(n):
        A.append([Fraction(int(i == j)) for j in range(n)])
        b.append(Fraction(float(table.weights[i])))
    return float(_bland_simplex_max(A, b, [Fraction(1)] * n))


QCQP_MAX_USERS = 3
QCQP_MAX_UNITS = 4
QCQP_MAX_D = 2


def _qcqp_values(units, user_ids, d, tau, Y):
    """Objective for each row of ``Y`` with z at its coupling floor; -inf if infeasible."""
    pos = {u: k for k, u in enumerate(user_ids)}
    loads = np.zeros((Y.shape[0], len(user_ids), d))
    for f, w, members in units:
        cols = [pos[u] for u in members]
        z = np.maximum(0.0, 1.0 - np.sum(1.0 - Y[:, cols], axis=1))
        for c in cols:
            loads[:, c, f] += w * z
    ok = np.all(np.sum(loads * loads, axis=2) <= tau * tau + 1e-12, axis=1)
    return np.where(ok, Y.sum(axis=1), -np.inf)


def qcqp_oracle(workload: VectorWorkload, tau: float, resolution: int = 200) -> float:
    """Truncation QCQP optimum by grid search over ``y`` followed by local refinement.

    Lowering any ``z`` only relaxes the norm constraints, so for fixed ``y`` it
    suffices to test ``z`` at the smallest value the coupling rows allow.
    """
    units = []
    for f, comp in enumerate(workload.components):
        for i in range(comp.n):
            units.append((f, float(comp.weights[i]), tuple(int(u) for u in comp.contributors(i))))
    user_ids = sorted({u for _, _, members in units for u in members})
    if len(user_ids) > QCQP_MAX_USERS or len(units) > QCQP_MAX_UNITS or workload.d > QCQP_MAX_D:
        raise InstanceTooLarge("oracle handles <= 3 users, <= 4 units, d <= 2")
    idle = workload.user_universe_size - len(user_ids)
    if not user_ids:
        return float(idle)
    k = len(user_ids)
    d = workload.d
    grid = np.linspace(0.0, 1.0, resolution + 1)
    rest = np.array(list(itertools.product(grid, repeat=k - 1)), dtype=float).reshape(len(grid) ** (k - 1), k - 1)
    best, best_y = -np.inf, None
    for first in grid:
        Y = np.column_stack([np.full(rest.shape[0], first), rest])
        vals = _qcqp_values(units, user_ids, d, tau, Y)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, best_y = float(vals[j]), Y[j]
    moves = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=k)))
    step = 1.0 / resolution
    for _ in range(30):
        step /= 2.0
        while True:
            Y = np.clip(best_y + step * moves, 0.0, 1.0)
            vals = _qcqp_values(units, user_ids, d, tau, Y)
            j = int(np.argmax(vals))
            if vals[j] <= best + 1e-15:
                break
            best, best_y = float(vals[j]), Y[j]
    return best + idle
