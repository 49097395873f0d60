"""Exception taxonomy shared by every photonstats module.

The split mirrors how failures should be handled at the command line:
value/usage problems (DomainError and friends, ConfigError) are the caller's
to fix, while AccuracyError means a numerical guarantee could not be met and
the run must not be trusted.
"""

from __future__ import annotations

__all__ = [
    "PhotonStatsError",
    "DomainError",
    "ContractError",
    "UndefinedCoherenceError",
    "SingularPointError",
    "SaturationError",
    "AccuracyError",
    "ConfigError",
]


class PhotonStatsError(Exception):
    """Base class for all package-specific failures."""


class DomainError(PhotonStatsError, ValueError):
    """A parameter lies outside its mathematical or physical domain."""


class ContractError(PhotonStatsError, ValueError):
    """Mismatched shapes, lengths, or otherwise inconsistent arguments."""


class UndefinedCoherenceError(DomainError):
    """g2 requested for a distribution with zero mean photon number."""


class SingularPointError(DomainError):
    """Derivative-based quantity evaluated where the derivative vanishes."""


class SaturationError(DomainError):
    """A ratio diverges (zero noise floor); reported instead of returning inf."""


class AccuracyError(PhotonStatsError, ArithmeticError):
    """A truncation or quadrature target could not be met; results untrusted."""


class ConfigError(PhotonStatsError, ValueError):
    """Malformed run configuration (unknown keys, missing files, bad values)."""
