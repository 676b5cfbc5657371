"""Exception types shared across the package.

Every error that can surface through the CLI derives from AnalysisError and
carries a short machine-readable code plus optional structured details, so a
failure can be serialized (one JSON line on stderr) without string parsing.
"""

from __future__ import annotations


class AnalysisError(Exception):
    """Base class for structured, expected analysis failures."""

    code = "AnalysisError"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> dict:
        rec = {"error": self.code, "message": self.message}
        if self.details:
            rec["details"] = self.details
        return rec


class SchemaError(AnalysisError):
    """Design document violates the schema (missing/extra/ill-typed keys)."""

    code = "SchemaError"


class ConstraintError(AnalysisError):
    """Design document is well-formed but violates a design-kind invariant."""

    code = "ConstraintError"


class ParseError(AnalysisError):
    """Malformed delimited text; row/column position is reported."""

    code = "ParseError"


class EmptyTable(AnalysisError):
    code = "EmptyTable"


class MissingCell(AnalysisError):
    code = "MissingCell"


class MissingColumn(AnalysisError):
    code = "MissingColumn"


class InsufficientLevels(AnalysisError):
    code = "InsufficientLevels"


class UnbalancedDesign(AnalysisError):
    code = "UnbalancedDesign"


class NonNumericResponse(AnalysisError):
    code = "NonNumericResponse"


class UnknownDataset(AnalysisError):
    code = "UnknownDataset"


class DomainError(AnalysisError):
    """Argument outside the mathematical domain of a special function."""

    code = "DomainError"


class ConvergenceError(AnalysisError):
    code = "ConvergenceError"


class NotApplicable(AnalysisError):
    """Operation does not apply to this design (e.g. no random factors)."""

    code = "NotApplicable"


class DegenerateShrinkage(AnalysisError):
    """Total variance is zero; shrinkage factor is undefined."""

    code = "DegenerateShrinkage"


class DegenerateMatrix(AnalysisError):
    code = "DegenerateMatrix"


class ConstantEnvironmentIndex(AnalysisError):
    code = "ConstantEnvironmentIndex"


class SampleTooSmall(AnalysisError):
    code = "SampleTooSmall"


class SampleTooLarge(AnalysisError):
    code = "SampleTooLarge"


class ZeroVariance(AnalysisError):
    code = "ZeroVariance"


class InsufficientGroups(AnalysisError):
    code = "InsufficientGroups"
