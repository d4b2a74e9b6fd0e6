"""
Error types shared across the uoco packages.

Every error derives from UocoError so callers (the CLI in particular) can
catch the whole family, and from the matching builtin so plain
``except ValueError`` / ``except RuntimeError`` keeps working.
"""

from typing import Any, Optional


class UocoError(Exception):
    """Base class for all uoco errors."""


class ConfigError(UocoError, ValueError):
    """Invalid configuration value (bad modulus, horizon, domain, ...)."""


class DimensionMismatch(UocoError, ValueError):
    """A vector does not have the dimension its domain expects."""

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"Dimension mismatch: expected {expected}, got {got}")


class NonConvergence(UocoError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, residual: float, best: Optional[Any] = None):
        self.residual = residual
        self.best = best
        super().__init__(f"{message} (residual={residual:.3e})")


class SingularMatrix(UocoError, RuntimeError):
    """A matrix that must stay positive definite could not be inverted."""


class RangeViolation(UocoError, ValueError):
    """Inputs breach a bound the configuration promised (G or D too small)."""


class InfeasibleFamily(UocoError, ValueError):
    """Problem family parameters violate the assumptions on the given domain."""


class DegenerateRate(UocoError, ValueError):
    """Not enough usable checkpoints to fit a growth exponent."""


class OracleError(UocoError, RuntimeError):
    """A gradient or loss oracle raised or returned a non-finite value."""
