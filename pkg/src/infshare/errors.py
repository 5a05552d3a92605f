"""Exception hierarchy shared by every module."""


class SharingError(ValueError):
    """Base class for all errors raised by this package."""


# access structures
class SpernerViolation(SharingError):
    pass


class TrivialStructure(SharingError):
    pass


class UnknownParticipant(SharingError):
    pass


# numeric kernels
class NonFinite(SharingError):
    pass


class DuplicateNode(SharingError):
    pass


class SingularObservedBlock(SharingError):
    pass


class TooFewSamples(SharingError):
    pass


# dealing / recovery
class WrongShareCount(SharingError):
    pass


class NotQualified(SharingError):
    pass


class DegeneratePair(SharingError):
    pass


class CoincidentPoints(SharingError):
    pass


class NotFractional(SharingError):
    pass


class BadLabel(SharingError):
    pass


class EmptySubset(SharingError):
    pass


class IllConditioned(SharingError):
    pass


class Inconclusive(SharingError):
    """Raised when a finite truncation cannot separate qualified from unqualified."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


# harness
class UnknownScheme(SharingError):
    pass


class BadParameter(SharingError):
    pass


class CsvFormatError(SharingError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
