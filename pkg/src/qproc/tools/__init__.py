"""Quality tools integrated with the model: FMEA and SPC."""

from qproc.tools.fmea import (
    FmeaDocument,
    FmeaEntry,
    attach_fmea,
    compute_rpn,
    rank_entries,
    read_fmea,
)
from qproc.tools.spc import (
    CapabilityResult,
    Charts,
    ControlChart,
    SpcConstants,
    SubgroupSeries,
    Violation,
    build_charts,
    capability,
    detect_violations,
    read_series,
    spc_constants,
)

__all__ = [
    "CapabilityResult",
    "Charts",
    "ControlChart",
    "FmeaDocument",
    "FmeaEntry",
    "SpcConstants",
    "SubgroupSeries",
    "Violation",
    "attach_fmea",
    "build_charts",
    "capability",
    "compute_rpn",
    "detect_violations",
    "rank_entries",
    "read_fmea",
    "read_series",
    "spc_constants",
]
