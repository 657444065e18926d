"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line interface, so
each error class maps to a distinct nonzero process status.
"""

from __future__ import annotations


class VolalabError(Exception):
    exit_code = 1


# ingestion -----------------------------------------------------------------


class IngestError(VolalabError):
    exit_code = 3


class EmptyFile(IngestError):
    pass


class MalformedRow(IngestError):
    def __init__(self, path, line: int, reason: str) -> None:
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class NonPositivePrice(IngestError):
    pass


class DuplicateDate(IngestError):
    pass


class MissingColumn(IngestError):
    pass


class TooShort(IngestError):
    pass


class EmptyIntersection(IngestError):
    pass


# panel construction ----------------------------------------------------------


class DesignError(VolalabError):
    exit_code = 4


class WeekendDate(DesignError):
    pass


class TooFewRows(DesignError):
    pass


class CutoffOutOfRange(DesignError):
    pass


# statistics ------------------------------------------------------------------


class StatsError(VolalabError):
    exit_code = 5


class NoObservations(StatsError):
    pass


class DegenerateSample(StatsError):
    pass


# models and estimation -------------------------------------------------------


class ModelError(VolalabError):
    exit_code = 6


class DimensionMismatch(ModelError):
    pass


class ConstraintViolation(ModelError):
    pass


class NonPositiveVariance(ModelError):
    pass


class EstimationError(VolalabError):
    exit_code = 7


class RankDeficient(EstimationError):
    pass


class SingularHessian(EstimationError):
    pass


class NonConvergence(EstimationError):
    exit_code = 8


class ConfigError(VolalabError):
    exit_code = 2


EXIT_CODES = {
    "ok": 0,
    "error": VolalabError.exit_code,
    "config": ConfigError.exit_code,
    "ingest": IngestError.exit_code,
    "design": DesignError.exit_code,
    "stats": StatsError.exit_code,
    "model": ModelError.exit_code,
    "estimation": EstimationError.exit_code,
    "nonconvergence": NonConvergence.exit_code,
}
