"""User-level differentially private answers to join-aggregate queries via tuple sampling.

Research code: the random streams are not cryptographic and the floating point
noise samplers are not hardened, so do not use this to protect real data.
"""

from .aggregation_table import (
    AggregationUnit,
    AggregationUnitTable,
    VectorWorkload,
    contribution_norms,
    poisson_sample,
    remove_user,
    tau_star,
    validate_table,
)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "AggregationUnit",
    "AggregationUnitTable",
    "VectorWorkload",
    "RngStream",
    "contribution_norms",
    "poisson_sample",
    "remove_user",
    "tau_star",
    "validate_table",
]
