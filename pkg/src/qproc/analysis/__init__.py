"""Rule engine: constraint validation, design guide and quality indicators."""

from qproc.analysis.guide import GuideReport, GuideStep, run_guide
from qproc.analysis.indicators import (
    CauseIndicator,
    ConformityIndicator,
    IndicatorReport,
    cause_indicator,
    conformity_indicator,
    format_pct,
    indicator_report,
)
from qproc.analysis.scope import Scope, resolve_scope
from qproc.analysis.validate import validate

__all__ = [
    "CauseIndicator",
    "ConformityIndicator",
    "GuideReport",
    "GuideStep",
    "IndicatorReport",
    "Scope",
    "cause_indicator",
    "conformity_indicator",
    "format_pct",
    "indicator_report",
    "resolve_scope",
    "run_guide",
    "validate",
]
