"""Exception types shared by the pendulum_bsh modules."""

from __future__ import annotations


class PendulumError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PendulumError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class QuadratureError(PendulumError, ArithmeticError):
    """Adaptive quadrature ran out of subintervals before meeting its tolerance."""

    def __init__(self, message: str, estimate: float, error: float) -> None:
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error!r})")
        self.estimate = estimate
        self.error = error


class IntegrationError(PendulumError, RuntimeError):
    """An ODE integration stopped early; ``time`` is where it gave up."""

    def __init__(self, message: str, time: float) -> None:
        super().__init__(f"{message} (failed at t={time!r})")
        self.time = time


class NoLevelError(DomainError):
    """No energy satisfies the requested quantization condition on the region."""


class RejectedHbarError(PendulumError, ValueError):
    """The value of hbar puts a level on the separatrix or leaves no oscillation levels."""

    def __init__(self, hbar: float, n: int | None, reason: str) -> None:
        super().__init__(f"hbar={hbar!r} rejected: {reason}")
        self.hbar = hbar
        self.n = n
        self.reason = reason


class ReconstructionError(PendulumError):
    """A reduced level failed to match its unreduced partner."""


class SearchExhaustedError(PendulumError):
    """No word in the ladder generators connects two basis states inside the truncation."""


class ConstructionError(PendulumError, ValueError):
    """An object could not be assembled from the supplied data."""
