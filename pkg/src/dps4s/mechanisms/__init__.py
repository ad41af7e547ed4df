"""End-to-end private mechanisms."""

from .scalar import (
    ScalarEstimate,
    dps4s_scalar_pure,
    dps4s_scalar_rdp,
    ladder_length,
    r2t,
    sample_truncate_pure,
    sample_truncate_rdp,
)
from .smooth import rdp_ss, rdp_ss_sigma, ss_mechanism
from .sne import sne_scalar, sne_vector
from .vector import VectorEstimate, dps4s_vector, pmsja_baseline, svt_tau_cap

__all__ = [
    "ScalarEstimate",
    "VectorEstimate",
    "sample_truncate_pure",
    "sample_truncate_rdp",
    "dps4s_scalar_pure",
    "dps4s_scalar_rdp",
    "r2t",
    "ladder_length",
    "rdp_ss",
    "rdp_ss_sigma",
    "ss_mechanism",
    "dps4s_vector",
    "pmsja_baseline",
    "svt_tau_cap",
    "sne_scalar",
    "sne_vector",
]
