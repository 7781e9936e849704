"""Exception types shared across the package."""


class DegenerateEnsembleError(ValueError):
    """The source states are not linearly independent (overlap c >= 1 or a
    rank-deficient Gram matrix where full rank is required)."""


class SpectralFailureError(RuntimeError):
    """Root bracketing could not isolate the expected number of eigenvalue
    angles after the maximum number of grid refinements."""


class ImpossibleOutcomeError(ValueError):
    """A Bayesian update was requested for an outcome whose predicted
    probability is exactly zero."""
