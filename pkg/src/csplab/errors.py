"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid arguments exit 2, resource
limits exit 3, bracketing/data failures exit 4.
"""

from __future__ import annotations


class CspError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(CspError, ValueError):
    """A parameter is outside its documented domain."""


class DensityError(InvalidArgumentError):
    """Clause density implies an inclusion probability outside [0, 1]."""


class UnsupportedFamilyError(InvalidArgumentError):
    """Operation is not defined for this clause family."""


class InvalidPermutationError(InvalidArgumentError):
    """Relabeling map is not a bijection on the variable set."""


class ResourceLimitError(CspError):
    """Requested work exceeds a configured desk-scale cap."""


class NoCrossingError(CspError):
    """Threshold bracketing failed: the target level is never crossed."""
