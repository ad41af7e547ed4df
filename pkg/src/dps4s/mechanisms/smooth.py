"""Smooth-sensitivity noise: the Rényi variant and the classic (epsilon, delta) variants."""

from __future__ import annotations

import numpy as np

from ..accounting import calibrate_smooth, smooth_bound_G, ss_calibration
from ..errors import InvalidParams
from ..rng import RngStream


def rdp_ss_sigma(B_value: float, alpha: float, rho: float, d: int) -> float:
    """Gaussian scale G(B) * eta for a unit-Lipschitz local-sensitivity bound B."""
    cal = calibrate_smooth(alpha, rho, d)
    return smooth_bound_G(B_value, cal.gamma) * cal.eta


def rdp_ss(values, B_value: float, alpha: float, rho: float, rng: RngStream) -> np.ndarray:
    """Release ``values`` under (alpha, rho)-RDP given a local-sensitivity bound ``B_value``.

    The caller guarantees that ``B_value`` bounds the L2 local sensitivity and
    changes by at most 1 between neighbouring inputs.
    """
    values = np.atleast_1d(np.asarray(values, dtype=float))
    sigma = rdp_ss_sigma(B_value, alpha, rho, values.size)
    return values + rng.gaussian(sigma, values.size)


def ss_mechanism(
    values, ss_value: float, epsilon: float, delta: float, variant: str, rng: RngStream
) -> np.ndarray:
    """values + eta * SS * Z with Cauchy, Laplace or Gaussian ``Z``."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    variant = variant.lower()
    if variant == "cauchy" and delta != 0:
        raise InvalidParams("the Cauchy variant is pure DP; pass delta=0")
    if ss_value < 0:
        raise InvalidParams("smooth sensitivity must be non-negative")
    _, eta = ss_calibration(epsilon, delta, values.size, variant)
    scale = eta * ss_value
    if scale == 0:
        return values.copy()
    draw = {"cauchy": rng.cauchy, "laplace": rng.laplace, "gaussian": rng.gaussian}[variant]
    return values + draw(scale, values.size)
