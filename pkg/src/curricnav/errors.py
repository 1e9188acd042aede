"""Exception hierarchy shared across the package."""


class CurricnavError(Exception):
    """Base class for package errors."""


class ContractError(CurricnavError):
    """A documented precondition was violated by the caller."""


class EnvironmentFormatError(CurricnavError):
    """Environment file could not be parsed; message names the field/line."""


class UnsatisfiableRegionError(CurricnavError):
    """Spawn/goal sampling kept rejecting; regions are unusable."""


class WeightFormatError(CurricnavError):
    """Weight file version/shape mismatch or corruption."""


class TrainingDiagnosticError(CurricnavError):
    """Training hit a degenerate numeric state; carries the offending batch."""

    def __init__(self, message, batch=None):
        super().__init__(message)
        self.batch = batch
