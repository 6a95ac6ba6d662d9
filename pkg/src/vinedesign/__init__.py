"""Design optimization of soft growing robot manipulators.

Searches link lengths and per-target steering configurations with population
based optimizers ranked by Rank Partitioning.
"""

from vinedesign.errors import (
    DegenerateInput,
    InvalidConfig,
    ParseError,
    ValidationError,
    ZeroDirection,
    ZeroVector,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateInput",
    "InvalidConfig",
    "ParseError",
    "ValidationError",
    "ZeroDirection",
    "ZeroVector",
]
