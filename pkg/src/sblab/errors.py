"""Exception types shared across the package."""


class SblabError(Exception):
    """Base class for package errors."""


class ConfigError(SblabError):
    """Invalid run configuration (bad group string, s <= hbar/2, unknown key, ...)."""


class TruncationInsufficient(SblabError):
    """A spectral truncation drops more mass than the requested bound allows."""


class QuadratureUnderResolved(SblabError):
    """Doubling the quadrature order moved the result by more than the tolerance."""


class LogBranchViolation(SblabError):
    """A group logarithm landed outside the principal-branch domain."""
