"""Exception types shared across the package.

Everything user-facing derives from ValueError or RuntimeError so callers
can catch broadly; the subclasses exist to keep diagnostics distinct.
"""
from __future__ import annotations


class ParameterError(ValueError):
    """An argument is out of its documented range or of the wrong shape."""


class DimensionError(ParameterError):
    """Operands whose shapes must agree do not."""


class StateError(RuntimeError):
    """An operation was invoked before its inputs were prepared."""


class NumericError(RuntimeError):
    """A numerical routine failed beyond what ridging can repair."""


class BandwidthError(NumericError):
    """A kernel bandwidth degenerated to zero (all points coincide)."""


class UnsupportedModelError(ValueError):
    """The requested base-model / boundary-term combination is not defined."""


class FormatError(ValueError):
    """A feature file or sidecar could not be parsed as documented."""
