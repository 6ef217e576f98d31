"""Exception hierarchy. The CLI maps each class to an exit code."""


class ChainCoreError(Exception):
    """Base class for all library errors."""


class DomainError(ChainCoreError, ValueError):
    """An argument lies outside the operation's domain."""


class ValidationError(ChainCoreError, ValueError):
    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class CapacityError(ChainCoreError):
    """A size guard was exceeded (too many players, dimensions or grid points)."""


class SolverFault(ChainCoreError, RuntimeError):
    """Internal inconsistency that indicates a numerical or solver fault."""


class CoreEmptyError(SolverFault):
    pass


class InputError(ChainCoreError, ValueError):
    """Malformed input document; the message carries its location."""
