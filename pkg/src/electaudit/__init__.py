"""Conservative risk-limiting audits of precinct-count elections.

Exact worst-case P-values for the hypothesis that a full hand count would
overturn the reported outcome, and a sequential escalate-or-confirm protocol
built on them. All probability arithmetic is exact rational arithmetic.
"""

from .discrepancy import (
    ErrorBoundVector,
    HandTally,
    WeightSpec,
    bounds_e_plus,
    bounds_fraction,
    bounds_supermajority,
    custom_bounds,
    net_overstatement,
    overstatement,
    sample_statistic,
    total_overstatement,
)
from .model import (
    Candidate,
    ContestSpec,
    Outcome,
    PooledContest,
    Precinct,
    apparent_outcome,
    pool_losers,
    supermajority_margin,
    validate_contest,
)
from .protocol import (
    AlphaRule,
    AuditSession,
    EscalationRule,
    SamplingDesign,
    VerifiableRng,
    alpha_for_stage,
    next_sample_size,
)
from .tailprob import (
    TailQuery,
    TailResult,
    compute_q,
    evaluate_query,
    initial_sample_size,
    pi_diamond,
    pi_star,
    stratified_pvalue_proportional,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaRule",
    "AuditSession",
    "Candidate",
    "ContestSpec",
    "ErrorBoundVector",
    "EscalationRule",
    "HandTally",
    "Outcome",
    "PooledContest",
    "Precinct",
    "SamplingDesign",
    "TailQuery",
    "TailResult",
    "VerifiableRng",
    "WeightSpec",
    "alpha_for_stage",
    "apparent_outcome",
    "bounds_e_plus",
    "bounds_fraction",
    "bounds_supermajority",
    "compute_q",
    "custom_bounds",
    "evaluate_query",
    "initial_sample_size",
    "net_overstatement",
    "next_sample_size",
    "overstatement",
    "pi_diamond",
    "pi_star",
    "pool_losers",
    "sample_statistic",
    "stratified_pvalue_proportional",
    "supermajority_margin",
    "total_overstatement",
    "validate_contest",
]
