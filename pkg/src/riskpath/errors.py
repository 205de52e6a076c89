"""Exception hierarchy.

Every error carries the pipeline stage it belongs to so the command line
front end can map it onto an exit code without inspecting messages.
"""


class RiskpathError(Exception):
    stage = "modeling"


class ConfigError(RiskpathError):
    stage = "config"


class StageInputError(RiskpathError):
    """A stage was started without the artifacts of an earlier stage."""

    def __init__(self, message, stage="modeling"):
        super().__init__(message)
        self.stage = stage


# ingest
class IngestError(RiskpathError):
    stage = "ingest"


class MalformedHeader(IngestError):
    pass


class TruncatedObservation(IngestError):
    pass


class UnsupportedVersion(IngestError):
    pass


class MissingColumn(IngestError):
    pass


class NonNumericCell(IngestError):
    pass


class UnknownSource(IngestError):
    pass


class EmptyResult(IngestError):
    pass


# data handling
class DegenerateSplit(RiskpathError):
    pass


class UnknownLevel(RiskpathError):
    pass


class NonPositiveValue(RiskpathError):
    pass


class SingleClass(RiskpathError):
    pass


class TooFewMinority(RiskpathError):
    pass


class KTooLarge(RiskpathError):
    pass


# solver
class Collinear(RiskpathError):
    pass


class AlphaZero(RiskpathError):
    pass


class NoConvergence(RiskpathError):
    pass


class InvalidPenalty(RiskpathError):
    pass


class ColumnMismatch(RiskpathError):
    pass


class DegenerateFold(RiskpathError):
    pass


class AllZeroPath(RiskpathError):
    pass


class EvaluationError(RiskpathError):
    stage = "evaluation"


class SeparationWarning(UserWarning):
    """Coefficients hit the magnitude cap; the data is (quasi-)separable."""
