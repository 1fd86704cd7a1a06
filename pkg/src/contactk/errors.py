"""Shared exception types."""


class ParameterError(ValueError):
    """Invalid construction parameters (shape, primality, bounds)."""


class DimensionError(ValueError):
    """Mismatched dimensions in an exact-arithmetic operation."""


class ResourceLimitError(RuntimeError):
    """A configured size cap was exceeded; result intentionally not computed."""
