"""Vector mechanism: tuple sampling, private threshold search, smooth-sensitivity release."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from ..accounting import ApproxBudget, amplify_vector, calibrate_smooth, find_alpha, smooth_bound_G
from ..aggregation_table import VectorWorkload, contribution_norms, poisson_sample
from ..errors import InvalidParams, SvtCapExceeded
from ..rng import RngStream
from ..solvers import solve_truncation_qcqp

# threshold search may run this many doublings past the point where nothing is truncated
SVT_EXTRA_DOUBLINGS = 4


@dataclass
class VectorEstimate:
    values: np.ndarray
    chosen_tau: float
    E_at_tau: float
    sigma: float
    alpha: float
    rho: float
    spent_budget: object = None
    diagnostics: dict = field(default_factory=dict)
    sample_values: np.ndarray | None = None
    noise_disabled: bool = False


@functools.lru_cache(maxsize=256)
def _cached_alpha(epsilon2: float, delta: float, d: int) -> tuple[float, float]:
    return find_alpha(epsilon2, delta, d)


def svt_tau_cap(workload: VectorWorkload) -> float:
    """Smallest power of two above twice the largest per-user contribution norm."""
    _, norms = contribution_norms(workload)
    top = 2.0 * float(norms.max()) if norms.size else 0.0
    cap = 1.0
    while cap <= top:
        cap *= 2.0
    return cap


def dps4s_vector(
    workload: VectorWorkload,
    q: float,
    epsilon: float,
    delta: float,
    beta: float = 0.1,
    rng: RngStream | None = None,
) -> VectorEstimate:
    """Sample tuples, pick tau with a sparse-vector test on E, release with Rényi smooth sensitivity.

    One fifth of epsilon pays for the threshold search; the remaining four
    fifths are converted to a Rényi budget for the release.
    """
    if rng is None:
        raise InvalidParams("an RngStream is required")
    if not epsilon > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise InvalidParams(f"delta must lie in (0, 1), got {delta}")
    if not 0.0 < beta < 1.0:
        raise InvalidParams(f"beta must lie in (0, 1), got {beta}")
    if not 0.0 < q <= 1.0:
        raise InvalidParams(f"sample rate must lie in (0, 1], got {q}")

    sample = workload.map(lambda c: poisson_sample(c, q, rng))
    eps1, eps2 = epsilon / 5.0, 4.0 * epsilon / 5.0
    theta_det = 6.0 / eps1 * math.log(6.0 / beta)
    theta = theta_det + rng.laplace(2.0 / eps1)

    limit = svt_tau_cap(sample) * 2.0**SVT_EXTRA_DOUBLINGS
    tau = 1.0
    trace = []
    while True:
        sol = solve_truncation_qcqp(sample, tau)
        test = sol.E + rng.laplace(4.0 / eps1)
        trace.append((tau, sol.E, test))
        if test <= theta:
            break
        tau *= 2.0
        if tau > limit:
            raise SvtCapExceeded(f"threshold search passed tau={limit} without stopping")

    alpha, rho = _cached_alpha(eps2, delta, workload.d)
    cal = calibrate_smooth(alpha, rho, workload.d)
    B = sol.E + 1.0
    G = smooth_bound_G(B, cal.gamma)
    sigma = 2.0 * tau * G * cal.eta
    noisy = sol.truncated + rng.gaussian(sigma, workload.d)
    W = workload.weight_scale
    spent = amplify_vector(epsilon, delta, alpha, q, workload.tuple_bound)
    diagnostics = {
        "eps1": eps1,
        "eps2": eps2,
        "theta_det": theta_det,
        "theta": theta,
        "svt_trace": trace,
        "gamma": cal.gamma,
        "eta": cal.eta,
        "G": G,
        "B": B,
        "truncated": sol.truncated.copy(),
        "sample_size": [c.n for c in sample.components],
    }
    return VectorEstimate(
        noisy / q * W,
        tau,
        sol.E,
        sigma,
        alpha,
        rho,
        ApproxBudget(spent, delta),
        diagnostics,
        sample.query_values() / q,
        rng.disable_noise,
    )


def pmsja_baseline(
    workload: VectorWorkload,
    epsilon: float,
    delta: float,
    beta: float = 0.1,
    rng: RngStream | None = None,
) -> VectorEstimate:
    """The vector mechanism without sampling."""
    return dps4s_vector(workload, 1.0, epsilon, delta, beta, rng)
