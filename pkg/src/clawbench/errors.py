"""Exception types shared across the workbench."""


class ClawbenchError(Exception):
    """Base class for all workbench-specific failures."""


class DivergentIntegralError(ClawbenchError):
    """Integral over the whole line does not converge (mismatched far fields)."""


class ResourceLimitError(ClawbenchError):
    """A run exceeded its configured front or event budget."""

    def __init__(self, message, time_reached=None):
        super().__init__(message)
        self.time_reached = time_reached


class AmbiguousTrackingError(ClawbenchError):
    """Shock-path extraction found zero or several dominant jumps."""


class NonuniquenessError(ClawbenchError):
    """A rarefaction-shock coefficient admits no unique solution."""


class TracingError(ClawbenchError):
    """Generalized-characteristic tracing failed at a reported location."""


class UnsupportedCoefficientError(ClawbenchError):
    """Coefficient provenance not handled by the requested operation."""


class AmbiguousPlacementError(ClawbenchError):
    """An atom sits within tolerance of a breakpoint without being declared."""


class EntropyViolationError(ClawbenchError):
    """A discontinuity fails the entropy admissibility check."""


class DegenerateStateError(ClawbenchError):
    """States coincide within tolerance where distinctness is required."""


class IllConditionedBasisError(ClawbenchError):
    """Eigenbasis too close to singular for component extraction."""


class InvalidWeightError(ClawbenchError):
    """A weight field violates its declared bounds."""


class WeightBudgetError(ClawbenchError):
    """Weight clamping saturated; decay cannot be enforced."""


class HyperbolicityError(ClawbenchError):
    """Complex or coincident eigenvalues where strict hyperbolicity is required."""

    def __init__(self, message, discriminant=None):
        super().__init__(message)
        self.discriminant = discriminant


class ContinuationError(ClawbenchError):
    """Newton continuation diverged at a reported parameter value."""


class PathRangeError(ClawbenchError):
    """A connecting path leaves the admissible state box."""


class SetupError(ClawbenchError):
    """A constructed configuration failed to meet its preconditions."""


class MassBoundError(ClawbenchError):
    """Measured mass amplification exceeded the configured bound."""


class ScenarioError(ClawbenchError):
    """Scenario file failed to parse or validate."""
