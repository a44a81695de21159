"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class StructureError(ValueError):
    """A matrix or coupling set violates a required sparsity/shape pattern."""


class NumericError(ArithmeticError):
    """A numerical procedure produced a non-finite or non-convergent result."""


class DegenerateGapError(NumericError):
    """Two adiabatic energies are too close for a gap-dividing formula."""


class IntegrationError(RuntimeError):
    """Time integration failed (step underflow or repeated rejection).

    Attributes
    ----------
    last_time : float
        Last time the integrator reached before failing.
    """

    def __init__(self, message, last_time):
        super().__init__(f"{message} (last good time t={last_time:.6g})")
        self.last_time = last_time


class ConservationError(RuntimeError):
    """A propagation invariant (trace, hermiticity, norm) drifted too far."""


class ConfigError(ValueError):
    """A scenario configuration is inconsistent or incomplete."""
