"""Exception types shared across the package."""


class NumericFailureError(RuntimeError):
    """An iterative numeric routine failed to converge within its cap."""


class RankDeficiencyError(ValueError):
    """A matrix that must have full column rank (or be nonsingular) is not."""


class GenerationError(RuntimeError):
    """Random-matrix generation kept producing rank-deficient pools."""


class ConfigError(ValueError):
    """A benchmark or CLI configuration is invalid."""
