"""
Error hierarchy shared by the learners, environments and harness.

Every error raised on purpose derives from GdgError so that a training run can
catch it, record a diagnostic and keep the other runs alive.
"""


class GdgError(Exception):
    """Base class for all domain errors."""


class ContractViolationError(GdgError, ValueError):
    """Shape, dimension or architecture mismatch, or a cell inside a wall."""


class NonFiniteError(GdgError, FloatingPointError):
    """A gradient, loss or network output contains NaN or infinity."""


class PreconditionError(GdgError, ValueError):
    """An operation was called before its preconditions hold."""


class ConfigurationError(GdgError, ValueError):
    """Malformed map, unknown preset, or an environment with no free space."""


class UnsupportedOperationError(GdgError, NotImplementedError):
    """The environment does not support the requested operation."""
