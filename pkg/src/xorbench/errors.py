"""Exception hierarchy shared across the package.

Every error that a public operation can raise lives here so callers (and the
command-line layer, which maps them to exit codes) have a single import point.
"""
from __future__ import annotations


class XorbenchError(Exception):
    """Base class for all package-specific errors."""


# --- instance generation / validation ---------------------------------------

class OddSize(XorbenchError):
    """Requested spin count is odd; 3R3X needs n even (num_vars = n/2)."""


class TooSmall(XorbenchError):
    """Requested spin count below the minimum feasible size (n >= 8)."""


class GenerationStall(XorbenchError):
    """Configuration-model repair failed after bounded restarts."""


class LengthMismatch(XorbenchError):
    """Assignment or spin vector length does not match the model."""


class InvariantViolation(XorbenchError):
    """A parsed or constructed object fails a structural invariant."""


class ParseError(XorbenchError):
    """Malformed instance/model text; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# --- linear algebra ----------------------------------------------------------

class Inconsistent(XorbenchError):
    """The XOR system has no solution (augmented rank exceeds matrix rank)."""


# --- ising / solvers ----------------------------------------------------------

class IndexOutOfRange(XorbenchError):
    """Spin index outside [0, n)."""


class NonFiniteField(XorbenchError):
    """Laser field overflowed or became NaN (mis-tuned gain/coupling)."""


class UnknownSolver(XorbenchError):
    """Solver name not in the registry."""


# --- benchmarking / statistics -------------------------------------------------

class DomainError(XorbenchError):
    """Numeric argument outside its documented domain."""


class EmptyGrid(XorbenchError):
    """TTS cutoff grid is empty."""


class NoRecords(XorbenchError):
    """No run records supplied where at least one is required."""


class PlanInvalid(XorbenchError):
    """Experiment plan violates a structural invariant."""


class InsufficientPoints(XorbenchError):
    """Fewer data points than the fit requires (minimum 3)."""


class NonPositiveValue(XorbenchError):
    """Log-space fit input contains a value <= 0."""


class InsufficientResamples(XorbenchError):
    """Bootstrap requires at least 2 resamples."""


class NoData(XorbenchError):
    """Report/plot emission invoked with nothing to plot."""
