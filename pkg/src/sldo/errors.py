"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SldoError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(SldoError, ValueError):
    pass


class OutOfRangeError(SldoError, ValueError):
    pass


class DegenerateSignalError(SldoError, ValueError):
    """Noise requested for a signal with zero power."""


class GainSignError(SldoError, ValueError):
    """An observer gain violates its positivity condition (e.g. l_p . z <= 0)."""


class DegenerateFiringError(SldoError, ArithmeticError):
    """Every rule's firing strength underflowed; the input left all supports."""


class SingularInputGainError(SldoError, ArithmeticError):
    pass


class DivergenceError(SldoError, ArithmeticError):
    """A state or parameter became non-finite.

    ``step`` is the simulation step index when known, ``parameter`` names the
    offending quantity.
    """

    def __init__(self, message: str, step: int | None = None, parameter: str | None = None):
        self.step = step
        self.parameter = parameter
        where = []
        if parameter is not None:
            where.append(f"parameter={parameter}")
        if step is not None:
            where.append(f"step={step}")
        super().__init__(message + (f" ({', '.join(where)})" if where else ""))

    def at_step(self, step: int) -> "DivergenceError":
        if self.step is not None:
            return self
        base = str(self).split(" (")[0]
        return DivergenceError(base, step=step, parameter=self.parameter)


class ConfigError(SldoError, ValueError):
    """Invalid experiment configuration; carries the offending key and line."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        prefix = ""
        if key is not None:
            prefix += f"{key}: "
        if line is not None:
            prefix = f"line {line}: " + prefix
        super().__init__(prefix + message)
