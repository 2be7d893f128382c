"""Human-readable and JSON reports over a model and its analyses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from qproc.analysis import GuideReport, IndicatorReport, format_pct, indicator_report, run_guide
from qproc.analysis.validate import validate
from qproc.diagnostics import Diagnostic
from qproc.model import QualityModel
from qproc.tools.fmea import FmeaDocument, rank_entries
from qproc.tools.spc import (
    CapabilityResult,
    Charts,
    SubgroupSeries,
    Violation,
    build_charts,
    capability,
    detect_violations,
)


@dataclass
class SpcSummary:
    label: str
    charts: Charts
    violations: list[Violation]
    capability: CapabilityResult | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "xbar": self.charts.xbar.to_dict(),
            "range": self.charts.range.to_dict(),
            "violations": [{"index": v.index, "rule": v.rule, "chart": v.chart}
                           for v in self.violations],
            "capability": self.capability.to_dict() if self.capability else None,
        }


def summarize_series(label: str, series: SubgroupSeries, usl=None, lsl=None) -> SpcSummary:
    charts = build_charts(series)
    cap = capability(series, usl, lsl) if usl is not None and lsl is not None else None
    return SpcSummary(label, charts, detect_violations(charts, series), cap)


@dataclass
class Analyses:
    guide: GuideReport
    diagnostics: list[Diagnostic]
    indicators: IndicatorReport
    fmea: FmeaDocument | None = None
    spc: list[SpcSummary] = field(default_factory=list)


def analyze(model: QualityModel, fmea: FmeaDocument | None = None,
            spc: list[SpcSummary] | None = None) -> Analyses:
    """Run the model analyses a report needs."""
    return Analyses(run_guide(model), validate(model), indicator_report(model), fmea, list(spc or []))


@dataclass
class ReportSection:
    key: str
    title: str
    lines: list[str]
    data: object


@dataclass
class ReportDocument:
    model: str
    sections: list[ReportSection]

    def to_text(self) -> str:
        out = [f"Quality report for model {self.model}"]
        for section in self.sections:
            out += ["", f"== {section.title} =="]
            out += section.lines
        return "\n".join(out) + "\n"

    def to_json(self) -> str:
        doc = {"model": self.model, "sections": {s.key: s.data for s in self.sections}}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _label(model: QualityModel, subject) -> str:
    if isinstance(subject, str) and subject in model.entities:
        e = model.entities[subject]
        return f"{e.kind} {e.name}"
    return "" if subject is None else str(subject)


def _diag_line(model: QualityModel, d: Diagnostic) -> str:
    where = _label(model, d.subject)
    return f"  {d.severity.value}: {d.code}: {d.message}" + (f" [{where}]" if where else "")


def _guide(model: QualityModel, guide: GuideReport) -> ReportSection:
    lines = []
    for step in guide.steps:
        lines.append(f"{step.step}. {step.title}: {step.status}")
        lines += ["  " + _diag_line(model, d).strip() for d in step.pending]
    return ReportSection("guide", "Design guide", lines, guide.to_dict())


def _validation(model: QualityModel, diagnostics: list[Diagnostic]) -> ReportSection:
    lines = [_diag_line(model, d) for d in diagnostics] or ["  no violations"]
    return ReportSection(
        "validation", "Validation", lines, [d.to_dict() for d in diagnostics]
    )


def _indicators(model: QualityModel, report: IndicatorReport) -> ReportSection:
    lines = [
        f"  conformity: {format_pct(report.conformity_pct)} "
        f"({len(report.checked)} of {len(report.checked) + len(report.unchecked)} characteristics)",
        f"  cause: {format_pct(report.cause_pct)} "
        f"({len(report.explained)} of {len(report.explained) + len(report.unexplained)} "
        "nonconformities)",
    ]
    lines += [_diag_line(model, d) for d in report.diagnostics]
    data = report.to_dict(model)
    data["conformity_pct"] = format_pct(report.conformity_pct)
    data["cause_pct"] = format_pct(report.cause_pct)
    return ReportSection("indicators", "Quality indicators", lines, data)


def _fmea(doc: FmeaDocument | None) -> ReportSection:
    if doc is None:
        return ReportSection("fmea", "FMEA ranking", ["  none attached"], None)
    ranked = rank_entries(doc)
    lines = [
        f"  {i}. RPN {e.rpn:4d} (S={e.severity} O={e.occurrence} D={e.detection}) {e.failure_mode}"
        for i, e in enumerate(ranked, start=1)
    ] or ["  empty worksheet"]
    return ReportSection("fmea", "FMEA ranking", lines, [e.to_dict() for e in ranked])


def _spc(summaries: list[SpcSummary]) -> ReportSection:
    if not summaries:
        return ReportSection("spc", "SPC summary", ["  none attached"], [])
    lines = []
    for s in summaries:
        x, r = s.charts.xbar, s.charts.range
        lines.append(f"  {s.label}: n={x.constants.n}")
        lines.append(f"    xbar: center {x.center:.6g}, LCL {x.lcl:.6g}, UCL {x.ucl:.6g}")
        lines.append(f"    range: center {r.center:.6g}, LCL {r.lcl:.6g}, UCL {r.ucl:.6g}")
        if s.violations:
            lines += [f"    {v.rule} at subgroup {v.index} ({v.chart})" for v in s.violations]
        else:
            lines.append("    no run-rule violations")
        if s.capability:
            lines.append(f"    Cp {s.capability.cp:.3f}, Cpk {s.capability.cpk:.3f}")
    return ReportSection("spc", "SPC summary", lines, [s.to_dict() for s in summaries])


def render_report(model: QualityModel, analyses: Analyses) -> ReportDocument:
    return ReportDocument(model.name, [
        _guide(model, analyses.guide),
        _validation(model, analyses.diagnostics),
        _indicators(model, analyses.indicators),
        _fmea(analyses.fmea),
        _spc(analyses.spc),
    ])
