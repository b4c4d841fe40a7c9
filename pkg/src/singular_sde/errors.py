"""Exception types raised by the laboratory. All derive from SingularSdeError."""


class SingularSdeError(Exception):
    pass


class DimensionMismatch(SingularSdeError):
    pass


class InvalidDimension(SingularSdeError):
    pass


class SingularPoint(SingularSdeError):
    """A requested evaluation point coincides with a singular point of the field."""


class SingularOnGrid(SingularSdeError):
    """A grid node falls (within tolerance) on a singular point."""


class NoConvergence(SingularSdeError):
    """An iterative estimator failed to reach its tolerance within the budget."""


class MixedClasses(SingularSdeError):
    pass


class MixedLambda(SingularSdeError):
    pass


class UnsupportedAnalytic(SingularSdeError):
    """Closed-form derivatives are not implemented for this coefficient family."""


class NegativeBound(SingularSdeError):
    pass


class EmptyGrid(SingularSdeError):
    pass


class UnderResolved(SingularSdeError):
    """Grid spacing too coarse for the requested smoothing time (h^2 > eps)."""


class ExtentTooSmall(SingularSdeError):
    pass


class NonPSDMatrix(SingularSdeError):
    """Diffusion matrix dips below the identity floor at some node."""


class SolverDiverged(SingularSdeError):
    pass


class MuTooSmall(SingularSdeError):
    pass


class FitIllConditioned(SingularSdeError):
    pass


class WeightInvalid(SingularSdeError):
    pass


class GridMismatch(SingularSdeError):
    pass


class SeriesDivergence(SingularSdeError):
    pass


class PreconditionViolated(SingularSdeError):
    pass


class NonFiniteState(SingularSdeError):
    """A path state or coefficient evaluation became non-finite mid-simulation."""

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class BadStep(SingularSdeError):
    pass


class MismatchedVariant(SingularSdeError):
    pass


class BoxMismatch(SingularSdeError):
    pass


class ConfigInvalid(SingularSdeError):
    pass


class StageFailed(SingularSdeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class FieldNotRealized(SingularSdeError):
    """A deferred (mollified) field was evaluated before being realized on a grid."""
