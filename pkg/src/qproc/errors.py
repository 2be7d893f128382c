"""Exception types raised by qproc operations."""

from __future__ import annotations


class QprocError(Exception):
    """Base class for every error raised by this package."""


class InvalidName(QprocError):
    pass


class UnknownKind(QprocError):
    pass


class UnknownRelation(QprocError):
    pass


class DuplicateName(QprocError):
    pass


class InvalidAttribute(QprocError):
    pass


class UnknownEntity(QprocError):
    pass


class KindMismatch(QprocError):
    pass


class DecompositionCycle(QprocError):
    pass


class InvalidScale(QprocError):
    pass


class InvalidSubgroupSize(QprocError):
    pass


class InsufficientData(QprocError):
    pass


class ZeroDispersion(QprocError):
    pass


class InvalidLimits(QprocError):
    pass


class RefusedDirtyModel(QprocError):
    """Raised when exporting a model that still has error diagnostics."""

    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class PersistenceError(QprocError):
    """Malformed persisted model. ``position`` locates the problem."""

    def __init__(self, message: str, position: str | None = None):
        super().__init__(f"{position}: {message}" if position else message)
        self.position = position
