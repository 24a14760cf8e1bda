"""Exception types shared across the package."""


class MuscuError(Exception):
    """Base class for all package errors."""


class DomainError(MuscuError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConfigurationError(MuscuError, ValueError):
    """A scenario is rejected because a modelling assumption fails.

    ``field`` names the offending parameter or assumption so that the CLI can
    report it verbatim.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class IntegrationDiverged(MuscuError, RuntimeError):
    """The integrator produced a non-finite state.

    ``trajectory`` holds every sample up to and including the last finite one.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class SoundnessFailure(MuscuError, AssertionError):
    """A certified window contains a point where the convexity claim fails."""
