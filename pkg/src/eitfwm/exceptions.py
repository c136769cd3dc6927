"""Exception hierarchy shared by every solver module."""


class EitFwmError(Exception):
    """Base class for all package errors."""


class ParameterError(EitFwmError, ValueError):
    """A configuration value violates a documented invariant."""


class GridError(EitFwmError, ValueError):
    """The discretization cannot represent the requested problem."""


class SolverError(EitFwmError, RuntimeError):
    """Numerical failure during integration."""


class InstabilityError(SolverError):
    """A field grew past the blow-up threshold."""


class SingularResponseError(SolverError):
    """The spectral response hit (or came too close to) a pole."""


class SpecValidationError(ParameterError):
    """An experiment spec is incomplete or malformed.

    ``issues`` holds ``(field, message)`` pairs, with fields written as
    ``section.key`` (or just ``section`` for a missing section).
    """

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.issues))
