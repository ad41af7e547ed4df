"""Privacy arithmetic.

Amplification of pure and Rényi guarantees by Poisson sampling of tuples,
conversions between DP and RDP, Gaussian Rényi divergence, calibration of the
Rényi smooth-sensitivity mechanism and choice of the Rényi order.

Every probability sum is carried out in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaTooSmall, BracketFailure, InvalidParams, NoValidAlpha
from .numerics import (
    NEG_INF,
    binom_logcdf,
    binom_logpmf,
    binom_logsf,
    brentq,
    log_sum_exp,
    log_sum_exp_array,
)

# Direct summation over k = 0..floor(tau) refuses anything longer than this.
MAX_DIRECT_TERMS = 10**6
# Final scan resolution for the vector-mechanism order search.
ALPHA_GRID_PER_OCTAVE = 64


@dataclass(frozen=True)
class PureBudget:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParams(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class ApproxBudget:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParams(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidParams(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class RenyiBudget:
    alpha: float
    rho: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise InvalidParams(f"alpha must exceed 1, got {self.alpha}")
        if not self.rho > 0:
            raise InvalidParams(f"rho must be positive, got {self.rho}")


@dataclass(frozen=True)
class SmoothCalibration:
    """Smoothness and noise multiplier of the Rényi smooth-sensitivity mechanism."""

    alpha: float
    rho: float
    d: int
    gamma: float
    t1: float
    t2: float
    eta: float

    @property
    def A(self) -> float:
        return math.exp((self.alpha - 1.0) * self.rho / self.d)

    def h(self, t: float) -> float:
        A = self.A
        return t**self.alpha - self.alpha * A * t + (self.alpha - 1.0) * A


# ---------------------------------------------------------------------------
# sampling amplification


def _check_sampling(tau: float, delta_cap: int, q: float) -> None:
    if not tau > 0:
        raise InvalidParams(f"tau must be positive, got {tau}")
    if int(delta_cap) != delta_cap or delta_cap < 1:
        raise InvalidParams(f"tuple bound must be a positive integer, got {delta_cap}")
    if not 0.0 < q <= 1.0:
        raise InvalidParams(f"sample rate must lie in (0, 1], got {q}")


def _check_pure(epsilon, tau, delta_cap, q) -> None:
    if not epsilon > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon}")
    _check_sampling(tau, delta_cap, q)


def _pure_at_q_one(epsilon: float, tau: float, delta_cap: int) -> float:
    # Bin(delta, 1) is a point mass at delta; only one term survives.
    return epsilon * min(1.0, delta_cap / tau)


def amplify_pure_direct(epsilon: float, tau: float, delta_cap: int, q: float) -> float:
    """Amplified pure-DP epsilon by explicit summation over k = 0..floor(tau)."""
    _check_pure(epsilon, tau, delta_cap, q)
    delta_cap = int(delta_cap)
    if q == 1.0:
        return _pure_at_q_one(epsilon, tau, delta_cap)
    kmax = min(math.floor(tau), delta_cap)
    if kmax + 1 > MAX_DIRECT_TERMS:
        raise InvalidParams(f"direct summation capped at {MAX_DIRECT_TERMS} terms; use the fast path")
    k = np.arange(kmax + 1)
    logp = binom_logpmf(k, delta_cap, q)
    log_tail = binom_logsf(tau, delta_cap, q)
    up = log_sum_exp(log_sum_exp_array(logp + k * (epsilon / tau)), log_tail + epsilon)
    down = log_sum_exp(log_sum_exp_array(logp - k * (epsilon / tau)), log_tail - epsilon)
    return min(epsilon, max(up, -down))


def amplify_pure_fast(epsilon: float, tau: float, delta_cap: int, q: float) -> float:
    """Amplified pure-DP epsilon through the generating-function reduction.

    Each partial sum of ``p_k z^k`` equals ``A^Delta`` times a binomial CDF with
    tilted success probability ``q z / A``, so only O(1) tail evaluations are
    needed regardless of ``tau``.
    """
    _check_pure(epsilon, tau, delta_cap, q)
    delta_cap = int(delta_cap)
    if q == 1.0:
        return _pure_at_q_one(epsilon, tau, delta_cap)
    x = epsilon / tau
    log_tail = binom_logsf(tau, delta_cap, q)

    def tilted(sign: float) -> float:
        log_a = math.log1p(q * math.expm1(sign * x))
        q_t = min(1.0, math.exp(math.log(q) + sign * x - log_a))
        return binom_logcdf(tau, delta_cap, q_t) + delta_cap * log_a

    up = log_sum_exp(tilted(+1.0), log_tail + epsilon)
    down = log_sum_exp(tilted(-1.0), log_tail - epsilon)
    return min(epsilon, max(up, -down))


def amplify_rdp(alpha: float, rho: float, tau: float, delta_cap: int, q: float) -> float:
    """Amplified Rényi divergence bound for the sampled Gaussian truncation mechanism."""
    if not alpha > 1:
        raise InvalidParams(f"alpha must exceed 1, got {alpha}")
    if not rho > 0:
        raise InvalidParams(f"rho must be positive, got {rho}")
    _check_sampling(tau, delta_cap, q)
    delta_cap = int(delta_cap)
    if q == 1.0:
        return rho * min(1.0, (delta_cap / tau) ** 2)
    kmax = min(math.floor(tau), delta_cap)
    if kmax + 1 > MAX_DIRECT_TERMS:
        raise InvalidParams(f"summation capped at {MAX_DIRECT_TERMS} terms")
    k = np.arange(kmax + 1, dtype=float)
    logp = binom_logpmf(k, delta_cap, q)
    body = log_sum_exp_array(logp + (alpha - 1.0) * rho * (k / tau) ** 2)
    total = log_sum_exp(body, binom_logsf(tau, delta_cap, q) + (alpha - 1.0) * rho)
    return min(rho, total / (alpha - 1.0))


def dp_to_rdp(epsilon: float, alpha: float) -> RenyiBudget:
    if not epsilon > 0 or not alpha > 1:
        raise InvalidParams("need epsilon > 0 and alpha > 1")
    return RenyiBudget(alpha, alpha * epsilon**2 / 2.0)


def rdp_to_dp(alpha: float, rho: float, delta: float) -> ApproxBudget:
    if not alpha > 1 or not rho > 0:
        raise InvalidParams("need alpha > 1 and rho > 0")
    if not 0.0 < delta < 1.0:
        raise InvalidParams(f"delta must lie in (0, 1), got {delta}")
    return ApproxBudget(rho + math.log(1.0 / delta) / (alpha - 1.0), delta)


def gaussian_renyi_divergence(
    mean_dist: float, sigma1: float, sigma2: float, alpha: float, d: int = 1
) -> float:
    """Order-alpha divergence between two isotropic Gaussians; ``inf`` when undefined."""
    if not (sigma1 > 0 and sigma2 > 0):
        raise InvalidParams("standard deviations must be positive")
    if not alpha > 1:
        raise InvalidParams(f"alpha must exceed 1, got {alpha}")
    if mean_dist < 0:
        raise InvalidParams("mean distance must be non-negative")
    s1, s2 = sigma1 * sigma1, sigma2 * sigma2
    mix = (1.0 - alpha) * s1 + alpha * s2
    if mix <= 0:
        return math.inf
    first = 0.5 * alpha * mean_dist**2 / mix
    log_ratio = (1.0 - alpha) * math.log(s1) + alpha * math.log(s2) - math.log(mix)
    return first + d / (2.0 * (alpha - 1.0)) * log_ratio


def _log1m_exp_mix(log_q: float, log_one_minus_q: float, a: float) -> float:
    """ln((1 - q) + q e^a) for a >= 0."""
    return log_sum_exp(log_one_minus_q, log_q + a)


def amplify_vector(epsilon: float, delta: float, alpha: float, q: float, delta_cap: int) -> float:
    """Amplified epsilon of the vector mechanism (one fifth SVT, four fifths release)."""
    if not epsilon > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise InvalidParams(f"delta must lie in (0, 1), got {delta}")
    if not alpha > 1:
        raise InvalidParams(f"alpha must exceed 1, got {alpha}")
    _check_sampling(1.0, delta_cap, q)
    log_inv_delta = math.log(1.0 / delta)
    rho = 0.8 * epsilon - log_inv_delta / (alpha - 1.0)
    if rho <= 0:
        raise AlphaTooSmall(f"alpha={alpha} leaves no Renyi budget (rho={rho})")
    if q == 1.0:
        return epsilon
    # q' = 1 - (1 - q)^Delta, kept in log form on both sides
    log_keep = int(delta_cap) * math.log1p(-q)
    log_qp = math.log(-math.expm1(log_keep))
    first = _log1m_exp_mix(log_qp, log_keep, 0.2 * epsilon)
    second = (_log1m_exp_mix(log_qp, log_keep, (alpha - 1.0) * rho) + log_inv_delta) / (alpha - 1.0)
    return min(epsilon, first + second)


def _log_keep_ratio(k: int, m: int, C: int) -> float:
    """ln(comb(m - kC, k) / comb(m, k)) as a sum of well-conditioned log1p terms."""
    i = np.arange(k, dtype=float)
    return math.fsum(np.log1p(-(k * C) / (m - i)).tolist())


def se_amplify(epsilon: float, delta: float, k: int, m: int, C: int) -> tuple[float, float]:
    """(epsilon', delta') of sample-and-explore with ``k`` of ``m`` users sampled jointly."""
    if not epsilon > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon}")
    if not 0.0 <= delta < 1.0:
        raise InvalidParams(f"delta must lie in [0, 1), got {delta}")
    if not (1 <= k <= m) or C < 0:
        raise InvalidParams(f"need 1 <= k <= m and C >= 0, got k={k}, m={m}, C={C}")
    if k * (C + 1) > m:
        miss = 1.0
    else:
        miss = -math.expm1(_log_keep_ratio(k, m, C))
    if delta == 0:
        return math.log1p(miss * math.expm1(epsilon)), 0.0
    return math.log1p(miss * math.expm1(2.0 * epsilon)), miss * (math.exp(epsilon) + 1.0) * delta


# ---------------------------------------------------------------------------
# smooth-sensitivity calibration


def calibrate_smooth(alpha: float, rho: float, d: int = 1) -> SmoothCalibration:
    """Roots of ``h(t) = t^a - a A t + (a - 1) A`` and the derived (gamma, eta).

    The lower root is found in ``v = a t - a + 1`` on ``[0, 1]`` and the upper
    root in ``s = ln t``; both forms avoid the cancellation in ``h`` when
    ``A`` is large.
    """
    if not alpha > 1:
        raise InvalidParams(f"alpha must exceed 1, got {alpha}")
    if not rho > 0:
        raise InvalidParams(f"rho must be positive, got {rho}")
    if d < 1:
        raise InvalidParams(f"dimension must be >= 1, got {d}")
    c = (alpha - 1.0) * rho / d

    def lower(v):
        return math.exp(alpha * math.log1p((v - 1.0) / alpha) - c) - v

    log_alpha = math.log(alpha)
    shrink = 1.0 - 1.0 / alpha

    def upper(s):
        # log of t^a e^{-c} minus log of a (t - 1) + 1, with t = e^s
        return (alpha - 1.0) * s - c - log_alpha - math.log1p(-shrink * math.exp(-s))

    if not lower(1.0) < 0:
        raise BracketFailure(f"h(1) is not negative for alpha={alpha}, rho={rho}, d={d}")
    v1 = brentq(lower, 0.0, 1.0, tol=0.0)
    s_hi = (log_alpha + c) / (alpha - 1.0)
    # upper(s_hi) >= 0 exactly; a negative value is rounding with the root at s_hi
    s2 = brentq(upper, 0.0, s_hi, tol=0.0) if upper(s_hi) > 0 else s_hi
    # t1 = (a - 1 + v1) / a, split so tiny v1 is not lost to rounding
    log_t1 = math.log1p(-1.0 / alpha) + math.log1p(v1 / (alpha - 1.0))
    t1 = 1.0 + (v1 - 1.0) / alpha
    t2 = math.exp(s2)
    if -log_t1 <= s2:
        gamma = -0.5 * log_t1
        # 1 - a + a t1 is v1 by construction
        den = v1
    else:
        gamma = 0.5 * s2
        den = 1.0 + alpha * math.expm1(-s2)
    if not den > 0:
        raise BracketFailure(f"calibration degenerate for alpha={alpha}, rho={rho}, d={d}")
    eta = math.sqrt(alpha / rho) / den
    return SmoothCalibration(alpha, rho, d, gamma, t1, t2, eta)


def smooth_bound_G(B_value: float, gamma: float) -> float:
    """max_k (k + B) e^{-gamma k}; the maximiser is one of two adjacent integers."""
    if not gamma > 0:
        raise InvalidParams(f"gamma must be positive, got {gamma}")
    if B_value < 0:
        raise InvalidParams(f"B must be non-negative, got {B_value}")
    k0 = max(0, math.floor(1.0 / gamma - B_value))
    return max((k + B_value) * math.exp(-gamma * k) for k in (k0, k0 + 1))


def ss_calibration(epsilon: float, delta: float, d: int, variant: str) -> tuple[float, float]:
    """(gamma, eta) of the classic smooth-sensitivity mechanisms."""
    if not epsilon > 0 or d < 1:
        raise InvalidParams("need epsilon > 0 and d >= 1")
    variant = variant.lower()
    if variant == "cauchy":
        return epsilon / (6.0 * d), 6.0 / epsilon
    if not 0.0 < delta < 1.0:
        raise InvalidParams(f"{variant} variant needs delta in (0, 1), got {delta}")
    log_term = math.log(2.0 / delta)
    gamma = epsilon / (4.0 * (d + log_term))
    if variant == "laplace":
        return gamma, 2.0 / epsilon
    if variant == "gaussian":
        return gamma, 5.0 * math.sqrt(2.0 * log_term) / epsilon
    raise InvalidParams(f"unknown smooth-sensitivity variant {variant!r}")


# ---------------------------------------------------------------------------
# order selection


def _vector_score(alpha: float, epsilon2: float, log_inv_delta: float, d: int) -> float:
    if not alpha > 1.0:
        return math.inf
    rho = epsilon2 - log_inv_delta / (alpha - 1.0)
    if rho <= 0:
        return math.inf
    return calibrate_smooth(alpha, rho, d).eta


def find_alpha(epsilon2: float, delta: float, d: int = 1) -> tuple[float, float]:
    """Rényi order minimising the smooth-sensitivity noise multiplier.

    Doubles ``alpha`` from just above the smallest valid order until the score
    at ``alpha`` beats both ``alpha / 2`` and ``2 alpha``, then scans the
    octave pair on a log grid.
    """
    if not epsilon2 > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon2}")
    if not 0.0 < delta < 1.0:
        raise NoValidAlpha(f"delta must lie in (0, 1), got {delta}")
    if d < 1:
        raise InvalidParams(f"dimension must be >= 1, got {d}")
    L = math.log(1.0 / delta)
    alpha_min = 1.0 + L / epsilon2

    def score(a):
        return _vector_score(a, epsilon2, L, d)

    alpha = alpha_min * (1.0 + 1.0 / 64)
    for _ in range(64):
        here = score(alpha)
        if here < score(alpha / 2.0) and here < score(2.0 * alpha):
            break
        alpha *= 2.0
    else:
        raise NoValidAlpha("order search did not settle")
    grid = (alpha / 2.0) * 2.0 ** (np.arange(1, 2 * ALPHA_GRID_PER_OCTAVE) / ALPHA_GRID_PER_OCTAVE)
    scores = [score(float(a)) for a in grid]
    best = float(grid[int(np.argmin(scores))])
    return best, epsilon2 - L / (best - 1.0)


def scalar_alpha_score(alpha: float, epsilon: float, delta: float) -> float:
    """Noise factor sqrt(a (a - 1) / (eps (a - 1) - ln(1/delta)))."""
    denom = epsilon * (alpha - 1.0) - math.log(1.0 / delta)
    if denom <= 0:
        return math.inf
    return math.sqrt(alpha * (alpha - 1.0) / denom)


def choose_alpha_scalar(epsilon: float, delta: float) -> tuple[float, float]:
    """Minimiser of :func:`scalar_alpha_score`.

    With ``x = alpha - 1`` and ``L = ln(1/delta)`` the stationarity condition is
    ``eps x^2 - 2 L x - L = 0``, whose positive root is the global minimum.
    """
    if not epsilon > 0:
        raise NoValidAlpha(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise NoValidAlpha(f"delta must lie in (0, 1), got {delta}")
    L = math.log(1.0 / delta)
    x = (L + math.sqrt(L * L + epsilon * L)) / epsilon
    alpha = 1.0 + x
    rho = epsilon - L / x
    if not rho > 0:
        raise NoValidAlpha(f"no positive rho for epsilon={epsilon}, delta={delta}")
    return alpha, rho


__all__ = [
    "NEG_INF",
    "PureBudget",
    "ApproxBudget",
    "RenyiBudget",
    "SmoothCalibration",
    "amplify_pure_direct",
    "amplify_pure_fast",
    "amplify_rdp",
    "dp_to_rdp",
    "rdp_to_dp",
    "gaussian_renyi_divergence",
    "amplify_vector",
    "se_amplify",
    "calibrate_smooth",
    "smooth_bound_G",
    "ss_calibration",
    "find_alpha",
    "scalar_alpha_score",
    "choose_alpha_scalar",
]
