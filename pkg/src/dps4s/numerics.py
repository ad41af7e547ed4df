"""Numerically stable scalar primitives.

Binomial tails are evaluated in log space: small ``n`` by direct summation of
the mass function, larger ``n`` through the regularized incomplete beta
function, with a log-space tail sum whenever the beta value underflows.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import MaxIterations, NoSignChange, POutOfRange, TooFewValues
from .rng import RngStream

NEG_INF = -math.inf

# Above this size the incomplete beta path is used.
DIRECT_SUM_MAX_N = 64
# betainc results below this are recomputed by a log-space tail sum.
_BETA_UNDERFLOW = 1e-250


def log_sum_exp(a: float, b: float) -> float:
    """ln(e^a + e^b) for finite or -inf arguments."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def log_sum_exp_array(values) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return NEG_INF
    hi = float(np.max(arr))
    if hi == NEG_INF:
        return NEG_INF
    return hi + math.log(float(np.sum(np.exp(arr - hi))))


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise POutOfRange(f"probability must lie in [0, 1], got {p}")


def binom_logpmf(k, n: int, p: float):
    """Vectorised ln Pr[Bin(n, p) = k]."""
    k = np.asarray(k, dtype=float)
    out = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    out = out + special.xlogy(k, p) + special.xlog1py(n - k, -p)
    bad = (k < 0) | (k > n)
    if np.any(bad):
        out = np.where(bad, NEG_INF, out)
    return out


def _direct_logcdf(k: int, n: int, p: float) -> float:
    return log_sum_exp_array(binom_logpmf(np.arange(0, k + 1), n, p))


def _direct_logsf(k: int, n: int, p: float) -> float:
    return log_sum_exp_array(binom_logpmf(np.arange(k + 1, n + 1), n, p))


def binom_logcdf(k, n: int, p: float) -> float:
    """ln Pr[Bin(n, p) <= k]; non-integer ``k`` is floored."""
    _check_p(p)
    n = int(n)
    k = math.floor(k)
    if k < 0:
        return NEG_INF
    if k >= n:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return NEG_INF
    if n <= DIRECT_SUM_MAX_N:
        return _direct_logcdf(k, n, p)
    cdf = float(special.betainc(n - k, k + 1, 1.0 - p))
    if cdf >= 0.5:
        sf = float(special.betainc(k + 1, n - k, p))
        return math.log1p(-sf)
    if cdf > _BETA_UNDERFLOW:
        return math.log(cdf)
    return _direct_logcdf(k, n, p)


def binom_logsf(k, n: int, p: float) -> float:
    """ln Pr[Bin(n, p) > k]; non-integer ``k`` is floored."""
    _check_p(p)
    n = int(n)
    k = math.floor(k)
    if k >= n:
        return NEG_INF
    if k < 0:
        return 0.0
    if p == 0.0:
        return NEG_INF
    if p == 1.0:
        return 0.0
    if n <= DIRECT_SUM_MAX_N:
        return _direct_logsf(k, n, p)
    sf = float(special.betainc(k + 1, n - k, p))
    if sf >= 0.5:
        cdf = float(special.betainc(n - k, k + 1, 1.0 - p))
        return math.log1p(-cdf)
    if sf > _BETA_UNDERFLOW:
        return math.log(sf)
    return _direct_logsf(k, n, p)


def brentq(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Root of ``f`` inside ``[lo, hi]`` by Brent's method.

    Stops once ``|f(t)| <= tol`` or the bracket has shrunk to floating point
    resolution around ``t`` (the best attainable root in double precision).

    Raises
    ------
    NoSignChange
        ``f(lo)`` and ``f(hi)`` share a sign.
    MaxIterations
        ``maxiter`` steps did not meet either stopping rule.
    """
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NoSignChange(f"f({a})={fa} and f({b})={fb} have the same sign")
    c, fc = a, fa
    d = e = b - a
    eps = np.finfo(float).eps
    for _ in range(maxiter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        xtol = 2.0 * eps * abs(b) + 0.5 * np.finfo(float).tiny
        m = 0.5 * (c - b)
        if abs(fb) <= tol or abs(m) <= xtol:
            return b
        if abs(e) >= xtol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(xtol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b = b + (d if abs(d) > xtol else math.copysign(xtol, m))
        fb = f(b)
    raise MaxIterations(f"brentq did not converge in {maxiter} iterations (last t={b}, f={fb})")


def sample_laplace(scale: float, rng: RngStream, size=None):
    return rng.laplace(scale, size)


def sample_gaussian(sigma: float, rng: RngStream, size=None):
    return rng.gaussian(sigma, size)


def trimmed_mean(values: Sequence[float], drop: int) -> float:
    """Mean after discarding the ``drop`` largest and ``drop`` smallest values."""
    arr = np.sort(np.asarray(values, dtype=float))
    if drop < 0 or arr.size <= 2 * drop:
        raise TooFewValues(f"need more than {2 * drop} values, got {arr.size}")
    kept = arr[drop: arr.size - drop]
    return math.fsum(kept) / kept.size
