"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class KBError(Exception):
    exit_code = 1


class InvalidArgumentError(KBError, ValueError):
    """A parameter is outside its documented domain."""

    exit_code = 2


class UnknownEntityError(KBError, KeyError):
    """A referenced vertex, decomposition or fixture does not exist."""

    exit_code = 3

    def __str__(self) -> str:
        # KeyError quotes its argument; keep messages readable.
        return str(self.args[0]) if self.args else ""


class NoMappingError(KBError):
    """A query has no candidate to answer with (no mapping, no similar step)."""

    exit_code = 3


class FormatError(KBError):
    """Unreadable or incompatible knowledge base file."""

    exit_code = 4


class InvariantViolationError(KBError):
    """An operation or file would break a structural invariant of the graph."""

    exit_code = 5


class DimensionMismatchError(InvariantViolationError, ValueError):
    pass


class LayerViolationError(InvariantViolationError):
    pass


class SequenceGapError(InvariantViolationError):
    pass


class DuplicateEdgeError(InvariantViolationError):
    pass


class StorageError(KBError, OSError):
    """Reading or writing a knowledge base file failed at the OS level."""

    exit_code = 4
