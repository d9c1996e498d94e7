"""Exception hierarchy shared by all modules."""


class ConfigurationError(ValueError):
    """A field/grid/solver/scan configuration violates an invariant."""


class DataError(ValueError):
    """Inconsistent or non-finite data handed to an observable."""


class NumericalError(RuntimeError):
    """A quadrature or interpolation failed to meet its accuracy contract."""


class ResourceError(RuntimeError):
    """A computation would exceed its cost budget (oracle paths only)."""


class CheckpointError(RuntimeError):
    """A scan checkpoint does not match the scan it is resumed for."""


class IntegrationError(RuntimeError):
    """Mode integration failed; carries the failing mode and state.

    Attributes
    ----------
    p3 : canonical longitudinal momentum of the failing mode
    t : time at which integration stopped
    state : (f, g, w) at the failure point
    """

    def __init__(self, message, p3=None, t=None, state=None):
        super().__init__(message)
        self.p3 = p3
        self.t = t
        self.state = state

    def __str__(self):
        base = super().__str__()
        if self.p3 is None:
            return base
        return f"{base} [P3={self.p3:.6g}, t={self.t:.6g}, state={self.state}]"
