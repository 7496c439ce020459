"""Exception and warning types shared across the package."""


class ConfigurationError(ValueError):
    """A port, element or network description violates a structural rule."""


class PostSelectionError(ArithmeticError):
    """The requested post-selection has (numerically) zero probability."""


class SizeError(ValueError):
    """A computation was asked for a network too large for it."""


class RegimeWarning(UserWarning):
    """Parameters lie outside the validity regime of an asymptotic formula."""
