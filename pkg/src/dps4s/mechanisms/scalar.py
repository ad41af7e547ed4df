"""Scalar mechanisms: sample-and-truncate and the power-of-two threshold ladder."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from ..accounting import (
    PureBudget,
    RenyiBudget,
    amplify_pure_fast,
    amplify_rdp,
    choose_alpha_scalar,
    rdp_to_dp,
)
from ..aggregation_table import AggregationUnitTable, poisson_sample
from ..errors import InvalidParams
from ..rng import RngStream
from ..solvers import solve_truncation_lp


@dataclass
class ScalarEstimate:
    value: float
    spent_budget: object
    diagnostics: dict = field(default_factory=dict)
    sample_value: float = math.nan
    noise_disabled: bool = False


def ladder_length(delta_cap: int) -> int:
    """floor(log2(Delta)) + 1, i.e. the number of thresholds 1, 2, 4, ... <= Delta."""
    if int(delta_cap) != delta_cap or delta_cap < 1:
        raise InvalidParams(f"tuple bound must be a positive integer, got {delta_cap}")
    return int(delta_cap).bit_length()


def _check_q(q: float) -> None:
    if not 0.0 < q <= 1.0:
        raise InvalidParams(f"sample rate must lie in (0, 1], got {q}")


def _check_common(q: float, beta: float) -> None:
    _check_q(q)
    if not 0.0 < beta < 1.0:
        raise InvalidParams(f"beta must lie in (0, 1), got {beta}")


def _fit_allocation(share: float, charged: list[float], budget: float, charge: Callable[[float], float]):
    """Largest allocation <= ``share`` whose charge keeps the running total within budget.

    Mathematically ``share`` always fits; this only absorbs floating point
    rounding in the accumulated sum.
    """
    c = charge(share)
    while share > 0 and math.fsum(charged + [c]) > budget:
        share = math.nextafter(share, 0.0)
        c = charge(share)
    return share, c


def sample_truncate_pure(
    table: AggregationUnitTable, tau: float, q: float, epsilon: float, rng: RngStream
) -> ScalarEstimate:
    """One threshold: sample, truncate, add Laplace(tau / epsilon), scale by 1/q."""
    if not tau > 0 or not epsilon > 0:
        raise InvalidParams("need tau > 0 and epsilon > 0")
    _check_q(q)
    sample = poisson_sample(table, q, rng)
    fbar = solve_truncation_lp(sample, tau).objective
    noisy = fbar + rng.laplace(tau / epsilon)
    spent = amplify_pure_fast(epsilon, tau, table.tuple_bound, q)
    W = table.weight_scale
    return ScalarEstimate(
        noisy / q * W,
        PureBudget(spent),
        {"tau": tau, "fbar": fbar, "sample_size": sample.n, "epsilon": epsilon},
        sample.total_weight() / q * W,
        rng.disable_noise,
    )


def sample_truncate_rdp(
    table: AggregationUnitTable, tau: float, q: float, alpha: float, rho: float, rng: RngStream
) -> ScalarEstimate:
    """One threshold with Gaussian noise of scale tau * sqrt(alpha / (2 rho))."""
    if not tau > 0:
        raise InvalidParams("need tau > 0")
    RenyiBudget(alpha, rho)
    _check_q(q)
    sample = poisson_sample(table, q, rng)
    fbar = solve_truncation_lp(sample, tau).objective
    sigma = tau * math.sqrt(alpha / (2.0 * rho))
    noisy = fbar + rng.gaussian(sigma)
    spent = amplify_rdp(alpha, rho, tau, table.tuple_bound, q)
    W = table.weight_scale
    return ScalarEstimate(
        noisy / q * W,
        RenyiBudget(alpha, spent),
        {"tau": tau, "fbar": fbar, "sigma": sigma, "sample_size": sample.n},
        sample.total_weight() / q * W,
        rng.disable_noise,
    )


def dps4s_scalar_pure(
    table: AggregationUnitTable,
    q: float,
    epsilon: float,
    delta_cap: int | None = None,
    beta: float = 0.1,
    rng: RngStream | None = None,
) -> ScalarEstimate:
    """Threshold ladder on a tuple sample under pure DP.

    Thresholds are visited from largest to smallest. Each step is allotted the
    remaining budget divided by the number of remaining steps and is charged
    only its amplified cost.
    """
    if rng is None:
        raise InvalidParams("an RngStream is required")
    if not epsilon > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon}")
    _check_common(q, beta)
    delta_cap = table.tuple_bound if delta_cap is None else int(delta_cap)
    L = ladder_length(delta_cap)
    sample = poisson_sample(table, q, rng)
    log_term = math.log(3.0 * L / beta)

    taus, alloc, charged, fbars, released = [], [], [], [], []
    for i in range(L, 0, -1):
        tau = float(2 ** (i - 1))
        remaining = epsilon - math.fsum(charged)
        eps_i, cost = _fit_allocation(
            remaining / i, charged, epsilon,
            lambda e, tau=tau: amplify_pure_fast(e, tau, delta_cap, q) if e > 0 else 0.0,
        )
        if not eps_i > 0:
            raise InvalidParams("privacy budget exhausted before the ladder finished")
        fbar = solve_truncation_lp(sample, tau).objective
        scale = tau / eps_i
        released.append(fbar + rng.laplace(scale) - scale * log_term)
        taus.append(tau)
        alloc.append(eps_i)
        charged.append(cost)
        fbars.append(fbar)

    W = table.weight_scale
    best = max(released)
    diagnostics = {
        "L": L,
        "taus": taus,
        "eps_alloc": alloc,
        "eps_charged": charged,
        "fbar": fbars,
        "released": released,
        "chosen_tau": taus[released.index(best)],
        "sample_size": sample.n,
        "pre_scale": best,
    }
    return ScalarEstimate(
        best / q * W,
        PureBudget(math.fsum(charged)),
        diagnostics,
        sample.total_weight() / q * W,
        rng.disable_noise,
    )


def r2t(
    table: AggregationUnitTable,
    epsilon: float,
    delta_cap: int | None = None,
    beta: float = 0.1,
    rng: RngStream | None = None,
) -> ScalarEstimate:
    """The ladder without sampling; the budget splits evenly across thresholds."""
    return dps4s_scalar_pure(table, 1.0, epsilon, delta_cap, beta, rng)


def dps4s_scalar_rdp(
    table: AggregationUnitTable,
    q: float,
    epsilon: float,
    delta: float,
    delta_cap: int | None = None,
    beta: float = 0.1,
    rng: RngStream | None = None,
) -> ScalarEstimate:
    """Gaussian threshold ladder; Rényi budget allocated and charged per step."""
    if rng is None:
        raise InvalidParams("an RngStream is required")
    _check_common(q, beta)
    alpha, rho = choose_alpha_scalar(epsilon, delta)
    delta_cap = table.tuple_bound if delta_cap is None else int(delta_cap)
    L = ladder_length(delta_cap)
    sample = poisson_sample(table, q, rng)
    tail = math.sqrt(2.0 * math.log(3.0 * L / beta))

    taus, alloc, charged, fbars, released, sigmas = [], [], [], [], [], []
    for i in range(L, 0, -1):
        tau = float(2 ** (i - 1))
        remaining = rho - math.fsum(charged)
        rho_i, cost = _fit_allocation(
            remaining / i, charged, rho,
            lambda r, tau=tau: amplify_rdp(alpha, r, tau, delta_cap, q) if r > 0 else 0.0,
        )
        if not rho_i > 0:
            raise InvalidParams("privacy budget exhausted before the ladder finished")
        fbar = solve_truncation_lp(sample, tau).objective
        sigma = tau * math.sqrt(alpha / (2.0 * rho_i))
        released.append(fbar + rng.gaussian(sigma) - sigma * tail)
        taus.append(tau)
        alloc.append(rho_i)
        charged.append(cost)
        fbars.append(fbar)
        sigmas.append(sigma)

    W = table.weight_scale
    best = max(released)
    spent_rho = math.fsum(charged)
    diagnostics = {
        "L": L,
        "alpha": alpha,
        "rho": rho,
        "taus": taus,
        "rho_alloc": alloc,
        "rho_charged": charged,
        "sigmas": sigmas,
        "fbar": fbars,
        "released": released,
        "chosen_tau": taus[released.index(best)],
        "sample_size": sample.n,
        "pre_scale": best,
        "approx_dp": (rdp_to_dp(alpha, spent_rho, delta).epsilon, delta),
    }
    return ScalarEstimate(
        best / q * W,
        RenyiBudget(alpha, spent_rho),
        diagnostics,
        sample.total_weight() / q * W,
        rng.disable_noise,
    )
