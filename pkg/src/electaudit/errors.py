"""Exception hierarchy shared across the package.

Every domain failure raises an AuditError subclass so callers (CLI, HTTP
service) can map them to exit code 1 / HTTP 4xx uniformly, keeping
ValueError/TypeError for programming mistakes.
"""


class AuditError(Exception):
    """Base class for all domain errors."""


class NegativeCount(AuditError):
    """A reported or hand-counted quantity is negative."""


class AccountingMismatch(AuditError):
    """Votes + undervotes + f*invalid do not add up to the voting opportunities."""


class EmptyContest(AuditError):
    """Contest has no precincts or no candidates."""


class InfeasibleRule(AuditError):
    """A pooling rule cannot satisfy the group-size constraint."""


class NotPassed(AuditError):
    """Supermajority question did not reach its threshold; there is no margin to audit."""


class PrecinctMismatch(AuditError):
    """Hand tally refers to a precinct that is not part of the contest."""


class NoLosers(AuditError):
    """Error bound needs at least one losing pseudo-candidate."""


class BelowRange(AuditError):
    """Weight inversion asked for a threshold below the weight of zero error."""


class EmptySample(AuditError):
    """Statistic of an empty sample is undefined."""


class SampleTooLarge(AuditError):
    """Requested sample size exceeds the population."""


class TooLarge(AuditError):
    """Brute-force oracle asked to enumerate more cases than its safety cap."""


class StageBeyondS(AuditError):
    """Fixed-stage alpha schedule consulted past its final stage."""


class AlreadyComplete(AuditError):
    """Session is no longer open."""


class ExhaustedPopulation(AuditError):
    """Draw asked for more precincts than remain."""


class NotInSample(AuditError):
    """Tally recorded for a precinct that was never drawn."""


class DuplicateTally(AuditError):
    """Tally recorded twice for the same precinct."""


class MissingTallies(AuditError):
    """Stage evaluation attempted before every sampled precinct has a tally."""


class Infeasible(AuditError):
    """No error allocation within the bounds can overturn the outcome."""


class SessionIntegrity(AuditError):
    """Persisted session fails its embedded event-log hash check."""


class ZeroSampleCounty(UserWarning):
    """A county with precincts drew no sample; the stratified bound degenerates to 1."""
