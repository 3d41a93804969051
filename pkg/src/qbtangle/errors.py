"""Exception hierarchy.

Domain errors (bad physical parameters, formulas evaluated outside their
window) derive from :class:`DomainError`; the CLI maps those to exit status 2.
"""


class QBError(Exception):
    """Base class for all package errors."""


class DomainError(QBError, ValueError):
    """Parameters outside the domain where a formula or plan exists."""


class InsufficientEnergy(DomainError):
    """omega_hat^2 - 1 - K^2 < 0: no control field satisfies the energy budget."""


class InvalidEnergy(DomainError):
    """omega_hat^2 <= 1: thresholds are undefined."""


class OutOfRange(DomainError):
    """Coupling ratio outside every window where an optimal-time formula applies."""


class DivergentTime(DomainError):
    """Optimal-time formula diverges (|1 - K| -> 0 or |1 + K| -> 0)."""


class NegativeBzSquared(DomainError):
    """Printed optimal-field formula gives B_z^2 < 0 (conflicts with the energy budget)."""

    def __init__(self, message, radicand=None, branch=None):
        super().__init__(message)
        self.radicand = radicand
        self.branch = branch


class NegativeTangle(QBError, ArithmeticError):
    """A tangle evaluated clearly below zero; indicates an implementation bug."""


class StepTooLarge(QBError, ValueError):
    """Integrator step violates the accuracy bound step <= 0.01 / omega_hat."""


class EmptyBounds(QBError, ValueError):
    """Search box has zero or negative extent."""


class ConfigError(QBError, ValueError):
    """Malformed configuration or scenario file."""
