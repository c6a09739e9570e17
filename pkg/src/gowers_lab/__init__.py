"""Gowers uniformity norms, arithmetic-function models and prime-pattern counts."""

__version__ = "0.1.0"

from .errors import (DegenerateConfig, GowersLabError, InvalidArgument, InvalidConductor,
                     NumericConsistencyError, OutOfDomain, ResourceError)
from .signals import ArithSignal, Domain

__all__ = [
    "__version__", "ArithSignal", "Domain", "GowersLabError", "InvalidArgument",
    "InvalidConductor", "OutOfDomain", "ResourceError", "DegenerateConfig",
    "NumericConsistencyError",
]
