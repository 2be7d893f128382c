"""qproc: quality-process model engine and batch analyzer."""

from qproc.catalog import CATALOG, EntityKind, MetaCatalog, Multiplicity, RelationKind
from qproc.diagnostics import Diagnostic, Severity, SourceSpan
from qproc.model import Entity, Link, QualityModel, new_model
from qproc.qml import ParseResult, parse, parse_file, serialize

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "Diagnostic",
    "Entity",
    "EntityKind",
    "Link",
    "MetaCatalog",
    "Multiplicity",
    "ParseResult",
    "QualityModel",
    "RelationKind",
    "Severity",
    "SourceSpan",
    "new_model",
    "parse",
    "parse_file",
    "serialize",
]
