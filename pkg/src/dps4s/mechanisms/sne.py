"""Sample-and-explore baselines: sample users, keep the tuples they lead."""

from __future__ import annotations

from ..accounting import ApproxBudget, PureBudget, se_amplify
from ..aggregation_table import AggregationUnitTable, VectorWorkload, explore
from ..errors import InvalidParams
from ..rng import RngStream
from .scalar import ScalarEstimate, dps4s_scalar_rdp, r2t
from .vector import VectorEstimate, pmsja_baseline


def _check_k(k: int, m: int) -> None:
    if int(k) != k or not 1 <= k <= m:
        raise InvalidParams(f"need 1 <= k <= m={m}, got k={k}")


def _reported(epsilon, delta, k, m, C):
    eps_p, delta_p = se_amplify(epsilon, delta, k, m, C)
    if delta == 0:
        return PureBudget(eps_p)
    return ApproxBudget(eps_p, delta_p)


def sne_scalar(
    table: AggregationUnitTable,
    k: int,
    epsilon: float,
    delta: float,
    C: int,
    rng: RngStream,
    beta: float = 0.1,
) -> ScalarEstimate:
    """Explore the tuples led by ``k`` uniformly sampled users and scale by m / k.

    A tuple is kept when its first contributor is sampled. The explored
    instance is answered by the unsampled ladder (Laplace when ``delta == 0``,
    Gaussian otherwise) with the full budget.
    """
    m = table.user_universe_size
    _check_k(k, m)
    users = rng.choice_without_replacement(m, int(k))
    explored = explore(table, users)
    if delta == 0:
        inner = r2t(explored, epsilon, table.tuple_bound, beta, rng)
    else:
        inner = dps4s_scalar_rdp(explored, 1.0, epsilon, delta, table.tuple_bound, beta, rng)
    factor = m / k
    diagnostics = dict(inner.diagnostics)
    diagnostics.update({"k": int(k), "explored_size": explored.n, "inner_budget": inner.spent_budget})
    return ScalarEstimate(
        inner.value * factor,
        _reported(epsilon, delta, int(k), m, C),
        diagnostics,
        explored.query_value() * factor,
        rng.disable_noise,
    )


def sne_vector(
    workload: VectorWorkload,
    k: int,
    epsilon: float,
    delta: float,
    C: int,
    rng: RngStream,
    beta: float = 0.1,
) -> VectorEstimate:
    """Vector counterpart of :func:`sne_scalar` on top of the unsampled vector mechanism."""
    m = workload.user_universe_size
    _check_k(k, m)
    users = rng.choice_without_replacement(m, int(k))
    explored = workload.map(lambda c: explore(c, users))
    inner = pmsja_baseline(explored, epsilon, delta, beta, rng)
    factor = m / k
    inner.values = inner.values * factor
    inner.sample_values = explored.query_values() * factor
    inner.diagnostics = dict(inner.diagnostics, k=int(k), inner_budget=inner.spent_budget)
    inner.spent_budget = _reported(epsilon, delta, int(k), m, C)
    return inner
