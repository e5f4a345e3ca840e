"""Exact stationary gas-dynamics solutions and tools to check them numerically."""

__version__ = "0.1.0"

from .core import (
    BracketError,
    DomainError,
    ExactFlowError,
    FlowState,
    GasLaw,
    Point3,
    SingularSystemError,
    SingularityError,
    StagnationError,
    StencilError,
    bernoulli_invariant,
    entropy_invariant,
    sound_speed_squared,
)

__all__ = [
    "BracketError",
    "DomainError",
    "ExactFlowError",
    "FlowState",
    "GasLaw",
    "Point3",
    "SingularSystemError",
    "SingularityError",
    "StagnationError",
    "StencilError",
    "bernoulli_invariant",
    "entropy_invariant",
    "sound_speed_squared",
]
