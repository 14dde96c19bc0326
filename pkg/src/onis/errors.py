"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: usage problems exit 1,
malformed input data exits 2, internal invariant violations exit 3.
"""

from __future__ import annotations


class OnisError(Exception):
    """Base class for all errors raised by this package."""


class MalformedInputError(OnisError, ValueError):
    """Input data (values, files, samples) violates a documented contract."""


class StreamFormatError(MalformedInputError):
    """A stream file cannot be parsed."""


class BadMagicError(StreamFormatError):
    """File does not start with the expected magic bytes."""


class FormatVersionError(StreamFormatError):
    """File declares a format version this reader does not support."""


class TruncatedStreamError(StreamFormatError):
    """File ended in the middle of a record.

    ``offset`` is the byte position at which the incomplete read started.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


class NonMonotoneIndexError(MalformedInputError):
    """Frame indices are not strictly increasing."""


class MissingLabelError(MalformedInputError):
    """A sampled frame has no entry in the label map."""

    def __init__(self, frame_index: int):
        super().__init__(f"frame {frame_index} has no entry in the label map")
        self.frame_index = frame_index


class InvariantError(OnisError):
    """An internal invariant was violated; indicates a bug, not bad input."""
