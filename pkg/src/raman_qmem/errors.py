"""Exception hierarchy.

``DomainError`` subclasses ``ValueError`` so callers that only care about bad
input can catch the builtin; ``ContractViolation`` is reserved for numerical
checks that fail on otherwise valid input.
"""


class RamanMemoryError(Exception):
    """Base class for all package errors."""


class DomainError(RamanMemoryError, ValueError):
    """An argument lies outside the domain of an operation."""


class ContractViolation(RamanMemoryError, RuntimeError):
    """A numerical post-condition or structural assumption does not hold."""


class NullModeError(ContractViolation):
    """A mode's singular value is below the extension floor."""


class NodalModeError(ContractViolation):
    """The lowest mode function changes sign, so it cannot be inverted."""


class DegenerateSignalError(DomainError):
    """The signal's cumulative intensity is not strictly increasing."""


class DegenerateTransformError(DomainError):
    """The control field vanishes where the signal does not."""
