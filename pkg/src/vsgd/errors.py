"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid hyperparameter, problem spec, or run configuration."""


class NumericError(ArithmeticError):
    """Non-finite input or a division that would silently produce NaN/Inf."""
