"""Self-learning disturbance observer for second-order nonlinear plants.

A basic nonlinear disturbance observer feeds an interval type-2 neuro-fuzzy
network trained online by sliding-mode learning rules; feedback-linearization
controllers consume the estimate. See README.md for the experiment harness.
"""

from sldo.errors import (
    ConfigError,
    DegenerateFiringError,
    DegenerateSignalError,
    DivergenceError,
    GainSignError,
    InvalidArgumentError,
    OutOfRangeError,
    SingularInputGainError,
    SldoError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateFiringError",
    "DegenerateSignalError",
    "DivergenceError",
    "GainSignError",
    "InvalidArgumentError",
    "OutOfRangeError",
    "SingularInputGainError",
    "SldoError",
]
