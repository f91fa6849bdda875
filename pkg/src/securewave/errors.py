"""Exception hierarchy shared by all securewave modules."""


class SecureWaveError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SecureWaveError, ValueError):
    """Malformed or out-of-contract input (bad shapes, values, config keys)."""


class DimensionError(ValidationError):
    """Matrix or vector dimensions incompatible with the requested operation."""


class DefinitenessError(SecureWaveError):
    """A matrix required to be positive definite is singular or indefinite."""


class NoTransmitError(SecureWaveError):
    """The design problem is infeasible; the transmitter must stay silent."""


class NumericalError(SecureWaveError):
    """An iterative routine failed to converge; carries diagnostics.

    Attributes
    ----------
    diagnostics : dict
        Residuals, iteration counts and similar data at the failure point.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SdpInfeasibleError(SecureWaveError):
    """The semidefinite program has no (strictly) feasible point.

    Attributes
    ----------
    report : dict
        Bounds on the phase-1 max-min-slack value and solver residuals.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = dict(report or {})
