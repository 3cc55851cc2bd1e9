"""Exception hierarchy shared by the simulation stack."""


class CoadaptError(Exception):
    """Base class for all package errors."""


class ConfigError(CoadaptError):
    """Invalid scenario or gain configuration.

    ``path`` is the dotted key path of the offending entry when known.
    """

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SingularConfiguration(CoadaptError):
    """Jacobian determinant fell below the singularity threshold."""


class IllConditioned(CoadaptError):
    """Operational-space inertia is numerically not invertible."""


class NonConstantEnvironment(CoadaptError):
    """A closed-form oracle was requested for a time-varying environment."""


class SingularStiffness(CoadaptError):
    pass


class SolverFailure(CoadaptError):
    """An implicit update law could not be solved."""


class NonFiniteState(CoadaptError):
    """A state or controller quantity became NaN/Inf or exceeded the divergence bound."""

    def __init__(self, message, step=None, snapshot=None):
        self.step = step
        self.snapshot = snapshot or {}
        super().__init__(message if step is None else f"step {step}: {message}")


class BufferUnderflow(CoadaptError):
    """A period-delayed value was requested before one full period was written."""


class WindowMisaligned(CoadaptError):
    """A cost window does not span exactly one period on the sample grid."""
