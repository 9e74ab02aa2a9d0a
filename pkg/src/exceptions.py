"""
Exceptions Module

This module defines the error taxonomy shared by every package of the toolkit.
Library code raises these; only the command-line entry point turns them into
printed messages and exit codes.
"""

from typing import Any, Dict, Optional


class ReconToolkitError(Exception):
    """Base class of all errors raised by the reconstruction toolkit."""


class InvalidArgumentError(ReconToolkitError, ValueError):
    """An argument is outside its allowed range (zero-sized frame, lambda outside [0, 1], ...)."""


class ShapeMismatchError(ReconToolkitError, ValueError):
    """Two operands disagree in shape, coil count or mask dimensions."""


class InvalidConfigurationError(ReconToolkitError, ValueError):
    """A sampling, model or training configuration cannot be satisfied."""


class VariantMismatchError(ReconToolkitError, ValueError):
    """A cascade forward pass was called on a model of the other variant."""


class NonFiniteError(ReconToolkitError, ArithmeticError):
    """
    A loss or an iterate became NaN or infinite.

    Attributes:
        diagnostic (Dict[str, Any]): Context captured at the point of failure
            (step, epoch, residual trace, dump path, ...).
    """

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class UndefinedReferenceError(ReconToolkitError, ValueError):
    """A quality metric was requested against an all-zero reference image."""


class DatasetFormatError(ReconToolkitError):
    """Base class of the on-disk format errors."""


class MalformedHeaderError(DatasetFormatError):
    """A JSON header is unparsable or misses required fields."""


class TruncatedPayloadError(DatasetFormatError):
    """A binary payload is shorter (or longer) than its header announces."""


class FormatVersionError(DatasetFormatError):
    """Wrong magic, byte order or format version."""


class CheckpointFormatError(FormatVersionError):
    """A model checkpoint has a foreign magic, version or header."""
