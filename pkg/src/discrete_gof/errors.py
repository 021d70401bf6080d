"""Exception types shared across the package."""


class DiscreteGofError(Exception):
    """Base class for all package errors."""


class DomainError(DiscreteGofError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidParameterError(DiscreteGofError, ValueError):
    """Model parameters are not admissible (e.g. non-monotone thresholds)."""


class InvalidStateError(DiscreteGofError, ValueError):
    """A recursion produced an inadmissible state (e.g. nonpositive intensity)."""


class DegenerateLawError(DiscreteGofError, ValueError):
    """A conditional law puts (numerically) zero mass on a support point."""


class InvalidLikelihoodError(DiscreteGofError, ValueError):
    """An observed outcome has zero probability under the model."""


class SeparationError(DiscreteGofError, ValueError):
    """The sample cannot identify the model (unobserved category, constant counts)."""


class IdentificationError(DiscreteGofError, ValueError):
    """The design is rank deficient, so parameters are not identified."""


class DimensionError(DiscreteGofError, ValueError):
    """Array shapes do not conform."""


class ConvergenceError(DiscreteGofError, RuntimeError):
    """The estimator did not converge on data where a fit is required."""
