"""Exception types shared across the package."""

from __future__ import annotations


class XlAnalogyError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(XlAnalogyError):
    """Malformed input file. Carries the path and 1-based line number when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path if line is None else f"{self.path}:{line}"
        elif line is not None:
            where = f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.message = message


class InvalidStateError(XlAnalogyError):
    """Operation not allowed for the current post-processing state of a space."""


class InvalidArgumentError(XlAnalogyError, ValueError):
    """Arguments are individually valid but incompatible with each other."""


class FitError(XlAnalogyError):
    """A transformation could not be estimated numerically."""


class FitInfeasibleError(FitError):
    """Not enough aligned pairs to estimate a d x d map."""


class DivergenceError(FitError):
    """Gradient descent stopped improving; ``last_loss`` holds the final objective."""

    def __init__(self, message: str, last_loss: float):
        super().__init__(f"{message} (last loss {last_loss:.6g})")
        self.last_loss = last_loss


class EvaluationError(XlAnalogyError):
    """The analogy benchmark produced no question to score."""


class ConfigError(XlAnalogyError):
    """Experiment configuration is incomplete or inconsistent."""
