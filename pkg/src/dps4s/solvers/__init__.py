"""Truncation optimisers and their small-instance reference oracles."""

from .lp import TruncationSolution, solve_truncation_lp, truncated_value
from .oracles import lp_oracle, qcqp_oracle
from .qcqp import QcqpSolution, solve_truncation_qcqp

__all__ = [
    "TruncationSolution",
    "QcqpSolution",
    "solve_truncation_lp",
    "solve_truncation_qcqp",
    "truncated_value",
    "lp_oracle",
    "qcqp_oracle",
]
