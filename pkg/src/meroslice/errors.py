"""Exception types shared across the package."""


class MerosliceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MerosliceError):
    """Input outside the admissible domain (e.g. multiplier not in the punctured disk)."""


class SingularParameter(MerosliceError):
    """lambda in {0, rho/2} or rho = 0: the map degenerates there."""


class PoleProximity(MerosliceError):
    """Evaluation requested within eps_pole of a pole p_k."""

    def __init__(self, k: int, message: str | None = None):
        self.k = k
        super().__init__(message or f"point within pole guard of p_{k}")


class OmittedValue(MerosliceError):
    """Inverse branch requested at an omitted value (lambda or mu)."""


class CompositionThroughOmittedValue(MerosliceError):
    """A prepole composition passed through lambda or mu."""


class BranchAmbiguity(MerosliceError):
    """Branch index rounding fell too close to a half-integer."""


class NewtonDivergence(MerosliceError):
    """Newton refinement failed to converge."""


class SeedEscaped(MerosliceError):
    """Newton iterate left the search window."""


class NotInBasin(MerosliceError):
    """Orbit did not converge to the requested attracting fixed point."""


class NotShiftLocus(MerosliceError):
    """Operation requires a shift-locus parameter."""


class NotSLambda(MerosliceError):
    """Operation requires a parameter in the S_lambda part of the shift locus."""


class ContinuationStuck(MerosliceError):
    """Path continuation step size underflowed before reaching the target."""


class TraceLost(MerosliceError):
    """Curve tracing lost its bracket; carries the partial trace."""

    def __init__(self, partial: list[complex], message: str):
        self.partial = partial
        super().__init__(message)
