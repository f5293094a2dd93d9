"""Exception and warning classes."""
from typing import Optional, Sequence


class SnowScaError(Exception):
    """Base class for all snowsca errors."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class InvalidWordError(SnowScaError):
    """InvalidWordError class."""

    def __init__(self, value: object, width: int = 16, message: Optional[str] = None):
        self.value = value
        self.width = width
        super().__init__(message or f'{value!r} is not a {width}-bit unsigned value')


class PhaseError(SnowScaError):
    """PhaseError class."""

    def __init__(self, phase: object, operation: str, message: Optional[str] = None):
        self.phase = phase
        self.operation = operation
        super().__init__(message or f'{operation} is not allowed in phase {phase}')


class RandomnessExhaustedError(SnowScaError):
    """RandomnessExhaustedError class."""

    def __init__(self, iteration: int, message: Optional[str] = None):
        self.iteration = iteration
        super().__init__(message or f'mask stream exhausted at sub-iteration {iteration}')


class InvalidShuffleOrderError(SnowScaError):
    """InvalidShuffleOrderError class."""

    def __init__(self, order: Sequence[int], message: Optional[str] = None):
        self.order = tuple(order)
        super().__init__(message or (
            f'{self.order} is not a permutation of (0..4) followed by (5, 6, 7)'))


class InvalidModelError(SnowScaError):
    """InvalidModelError class."""

    def __init__(self, field: str, value: object, message: Optional[str] = None):
        self.field = field
        self.value = value
        super().__init__(message or f'invalid leakage model {field}: {value!r}')


class InconsistentInputError(SnowScaError):
    """InconsistentInputError class."""

    def __init__(self, what: str, message: Optional[str] = None):
        self.what = what
        super().__init__(message or f'inconsistent input: {what}')


class InsufficientTracesError(SnowScaError):
    """InsufficientTracesError class."""

    def __init__(self, required: int, available: int, message: Optional[str] = None):
        self.required = required
        self.available = available
        super().__init__(message or f'at least {required} traces required, {available} available')


class SingleClassError(SnowScaError):
    """SingleClassError class."""

    def __init__(self, label: int, message: Optional[str] = None):
        self.label = label
        super().__init__(message or f'training labels contain only class {label}')


class GhostSetError(SnowScaError):
    """GhostSetError class."""

    def __init__(self, ghosts: object, message: Optional[str] = None):
        self.ghosts = ghosts
        super().__init__(message or f'{ghosts} has positive candidates with equal LSBs')


class MissingDependencyError(SnowScaError):
    """MissingDependencyError class."""

    def __init__(self, target: str, missing: Sequence[str], message: Optional[str] = None):
        self.target = target
        self.missing = tuple(missing)
        super().__init__(message or f'{target} needs {", ".join(self.missing)} recovered first')


class AttackIncompleteError(SnowScaError):
    """AttackIncompleteError class, carries the partial report."""

    def __init__(self, report: object, reason: str, message: Optional[str] = None):
        self.report = report
        self.reason = reason
        super().__init__(message or f'attack did not converge: {reason}')


class TraceFileError(SnowScaError):
    """Base class for trace-set file problems."""

    def __init__(self, path: str, reason: str, message: Optional[str] = None):
        self.path = path
        self.reason = reason
        super().__init__(message or f'{path}: {reason}')


class MalformedHeaderError(TraceFileError):
    """MalformedHeaderError class."""


class LengthMismatchError(TraceFileError):
    """LengthMismatchError class."""


class UnsupportedVersionError(TraceFileError):
    """UnsupportedVersionError class."""

    def __init__(self, path: str, version: object, message: Optional[str] = None):
        self.version = version
        super().__init__(path, f'unsupported trace-set version {version!r}', message)


class InvalidSourceError(SnowScaError):
    """InvalidSourceError class."""

    def __init__(self, source: object, message: Optional[str] = None):
        # Local import: utils_sources imports this module.
        from .utils_sources import SupportedSources  # pylint: disable=import-outside-toplevel
        self.source = source
        super().__init__(message
                or f'{source} is not supported/known, supported: {SupportedSources.names()}')


class ArtifactWriteError(SnowScaError):
    """ArtifactWriteError class."""

    def __init__(self, path: str, reason: str, message: Optional[str] = None):
        self.path = path
        self.reason = reason
        super().__init__(message or f'failed to write {path}: {reason}')


class UsageError(SnowScaError):
    """Invalid command line."""


class DegenerateStatisticWarning(UserWarning):
    """A statistic was defined by convention (zero variance)."""


class InsufficientTracesWarning(UserWarning):
    """A statistic was computed on too few traces to be stable."""


class StorageWarning(UserWarning):
    """A storage request failed or returned an unexpected response."""
