"""Relational export, persistence and reports."""

from qproc.export.instances import export_instances
from qproc.export.persist import FORMAT_VERSION, dumps, load, loads, save
from qproc.export.report import (
    Analyses,
    ReportDocument,
    SpcSummary,
    analyze,
    render_report,
    summarize_series,
)
from qproc.export.schema import Column, ForeignKey, RelationalSchema, Table, derive_schema, emit_ddl

__all__ = [
    "FORMAT_VERSION",
    "Analyses",
    "Column",
    "ForeignKey",
    "RelationalSchema",
    "ReportDocument",
    "SpcSummary",
    "Table",
    "analyze",
    "derive_schema",
    "dumps",
    "emit_ddl",
    "export_instances",
    "load",
    "loads",
    "render_report",
    "save",
    "summarize_series",
]
