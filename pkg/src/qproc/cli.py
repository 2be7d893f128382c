"""``qproc`` command line.

Exit status: 0 when no error diagnostic was produced, 1 when at least one
was, 2 for usage and I/O problems.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import TextIO

from qproc.analysis import format_pct, indicator_report, run_guide, validate
from qproc.catalog import CATALOG
from qproc.diagnostics import Diagnostic, SourceSpan, rule_catalog
from qproc.errors import QprocError, RefusedDirtyModel
from qproc.export import analyze, derive_schema, emit_ddl, export_instances, render_report
from qproc.export.report import summarize_series
from qproc.qml import ParseResult, parse_file
from qproc.tools import attach_fmea, rank_entries, read_fmea, read_series

EXIT_OK, EXIT_ERRORS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _common(defaults: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p.add_argument("--format", choices=("text", "json"), **({"default": "text"} if defaults else kw))
    p.add_argument("-o", "--output", metavar="PATH", **({"default": None} if defaults else kw))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qproc", description="Quality-process model analyzer.",
                     parents=[_common(True)])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    common = [_common(False)]

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, description=help_text, parents=common)

    p = add("validate", "check a model against the meta-model rules")
    p.add_argument("file")
    p = add("guide", "show the seven-step design guide with pending questions")
    p.add_argument("file")
    p.add_argument("--process", metavar="NAME")
    p = add("indicators", "compute the conformity and cause indicators")
    p.add_argument("file")
    p.add_argument("--scope", metavar="NAME")
    p = add("fmea", "attach an FMEA worksheet and rank its entries")
    p.add_argument("file")
    p.add_argument("--doc", required=True, metavar="FILE")
    p.add_argument("--process", metavar="NAME")
    p = add("spc", "control charts, run rules and capability for a measurement series")
    p.add_argument("--series", required=True, metavar="FILE")
    p.add_argument("--usl", type=float)
    p.add_argument("--lsl", type=float)
    add("export-schema", "print the SQL-92 schema of the meta-model")
    p = add("export-data", "print the model as SQL INSERT statements")
    p.add_argument("file")
    p = add("report", "full report: guide, validation, indicators, tools")
    p.add_argument("file")
    p.add_argument("--doc", metavar="FILE", help="FMEA worksheet to include")
    p.add_argument("--process", metavar="NAME", help="process studied by the worksheet")
    p.add_argument("--series", metavar="FILE", action="append", default=[],
                   help="measurement series to include (repeatable)")
    p.add_argument("--usl", type=float)
    p.add_argument("--lsl", type=float)
    add("rules", "list rule codes, severities and guide steps")
    return parser


class _Context:
    def __init__(self, args, stdout: TextIO, stderr: TextIO):
        self.args = args
        self.stdout = stdout
        self.stderr = stderr
        self.errors = False

    def report(self, diagnostics, parsed: ParseResult | None = None, file: str | None = None):
        for d in diagnostics:
            self.errors |= d.is_error
            self.stderr.write(format_diagnostic(d, parsed, file) + "\n")

    def emit(self, text: str):
        if self.args.output:
            with open(self.args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            self.stdout.write(text)

    def emit_json(self, data):
        self.emit(json.dumps(data, indent=2, sort_keys=True) + "\n")

    @property
    def json(self) -> bool:
        return self.args.format == "json"


def format_diagnostic(d: Diagnostic, parsed: ParseResult | None = None, file: str | None = None) -> str:
    subject = d.subject
    where = None
    if isinstance(subject, SourceSpan):
        where = str(subject)
    elif parsed is not None and subject in parsed.spans:
        where = str(parsed.spans[subject])
    elif file:
        where = file
    text = f"{d.severity.value}: {d.code}: {d.message}"
    return f"{where}: {text}" if where else text


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"qproc: cannot read {path}: {exc.strerror}") from None


def _load(ctx: _Context, path: str) -> ParseResult | None:
    """Parse ``path``; report its diagnostics and return None when it has errors."""
    try:
        parsed = parse_file(path)
    except OSError as exc:
        raise UsageError(f"qproc: cannot read {path}: {exc.strerror}") from None
    ctx.report(parsed.diagnostics, parsed)
    return None if parsed.failed else parsed


def _named(parsed: ParseResult, kinds: tuple[str, ...], name: str) -> str:
    model = parsed.model
    found = [eid for kind in kinds for eid in model.lookup(kind, name)]
    if len(found) != 1:
        what = " or ".join(kinds)
        problem = "no" if not found else "more than one"
        raise UsageError(f"qproc: {problem} {what} named {name!r}")
    return found[0]


def _name(model, eid):
    return model.entities[eid].name if eid else None


def cmd_validate(ctx: _Context) -> None:
    parsed = _load(ctx, ctx.args.file)
    if parsed is None:
        return
    found = validate(parsed.model)
    ctx.report(found, parsed)
    if ctx.json:
        ctx.emit_json({"file": ctx.args.file, "diagnostics": [d.to_dict() for d in found]})
    else:
        errors = sum(d.is_error for d in found)
        ctx.emit(f"{ctx.args.file}: {errors} error(s), {len(found) - errors} other diagnostic(s)\n")


def cmd_guide(ctx: _Context) -> None:
    parsed = _load(ctx, ctx.args.file)
    if parsed is None:
        return
    scope = _named(parsed, ("Process",), ctx.args.process) if ctx.args.process else None
    guide = run_guide(parsed.model, scope)
    if ctx.json:
        data = guide.to_dict()
        data["scope"] = _name(parsed.model, scope)
        ctx.emit_json(data)
        return
    lines = []
    for step in guide.steps:
        lines.append(f"step {step.step} [{step.status}] {step.title}")
        lines += [f"  ? {d.message}" if d.code != "G0-001" else f"  - {d.message}"
                  for d in step.pending]
    ctx.emit("\n".join(lines) + "\n")


def cmd_indicators(ctx: _Context) -> None:
    parsed = _load(ctx, ctx.args.file)
    if parsed is None:
        return
    scope = _named(parsed, ("Process", "Product"), ctx.args.scope) if ctx.args.scope else None
    report = indicator_report(parsed.model, scope)
    ctx.report(report.diagnostics, parsed, ctx.args.file)
    if ctx.json:
        ctx.emit_json(report.to_dict(parsed.model))
    else:
        ctx.emit(
            f"conformity: {format_pct(report.conformity_pct)}\n"
            f"cause: {format_pct(report.cause_pct)}\n"
        )


def _default_process(parsed: ParseResult) -> str:
    model = parsed.model
    roots = [p.id for p in model.of_kind("Process") if not model.sources(p.id, "composed_of")]
    if len(roots) != 1:
        raise UsageError("qproc: the model has several top-level processes; pass --process NAME")
    return roots[0]


def _attach(ctx: _Context, parsed: ParseResult, doc_path: str, process: str | None):
    process_id = _named(parsed, ("Process",), process) if process else _default_process(parsed)
    try:
        doc = read_fmea(_read_text(doc_path), process_id)
    except (ValueError, QprocError) as exc:
        raise UsageError(f"qproc: {doc_path}: {exc}") from None
    ctx.report(attach_fmea(parsed.model, doc), parsed, doc_path)
    return doc


def cmd_fmea(ctx: _Context) -> None:
    parsed = _load(ctx, ctx.args.file)
    if parsed is None:
        return
    doc = _attach(ctx, parsed, ctx.args.doc, ctx.args.process)
    ranked = rank_entries(doc)
    if ctx.json:
        ctx.emit_json({"process": _name(parsed.model, doc.process_ref),
                       "entries": [e.to_dict() for e in ranked]})
    else:
        ctx.emit("".join(
            f"{e.rpn:4d}  S={e.severity} O={e.occurrence} D={e.detection}  {e.failure_mode}\n"
            for e in ranked
        ))


def _limits(args):
    if (args.usl is None) != (args.lsl is None):
        raise UsageError("qproc: --usl and --lsl must be given together")
    return args.usl, args.lsl


def _summaries(paths, usl, lsl):
    out = []
    for path in paths:
        try:
            out.append(summarize_series(path, read_series(_read_text(path)), usl, lsl))
        except (ValueError, QprocError) as exc:
            raise UsageError(f"qproc: {path}: {exc}") from None
    return out


def cmd_spc(ctx: _Context) -> None:
    usl, lsl = _limits(ctx.args)
    (summary,) = _summaries([ctx.args.series], usl, lsl)
    if ctx.json:
        ctx.emit_json(summary.to_dict())
        return
    x, r = summary.charts.xbar, summary.charts.range
    c = x.constants
    lines = [
        f"n={c.n}",
        f"constants: A2={c.A2:.4f} D3={c.D3:.4f} D4={c.D4:.4f} d2={c.d2:.4f}",
        f"xbar: center={x.center:.6g} lcl={x.lcl:.6g} ucl={x.ucl:.6g}",
        f"range: center={r.center:.6g} lcl={r.lcl:.6g} ucl={r.ucl:.6g}",
    ]
    lines += [f"violation: {v.rule} at subgroup {v.index} ({v.chart} chart)"
              for v in summary.violations]
    if summary.capability:
        lines.append(f"capability: cp={summary.capability.cp:.4f} cpk={summary.capability.cpk:.4f}")
    ctx.emit("\n".join(lines) + "\n")


def cmd_export_schema(ctx: _Context) -> None:
    found: list[Diagnostic] = []
    ddl = emit_ddl(derive_schema(CATALOG), found)
    ctx.report(found)
    ctx.emit(ddl)


def cmd_export_data(ctx: _Context) -> None:
    parsed = _load(ctx, ctx.args.file)
    if parsed is None:
        return
    try:
        script = export_instances(parsed.model, derive_schema(parsed.model.catalog))
    except RefusedDirtyModel as exc:
        ctx.report(exc.diagnostics, parsed)
        ctx.stderr.write(f"qproc: {exc}; nothing exported\n")
        return
    ctx.emit(script)


def cmd_report(ctx: _Context) -> None:
    parsed = _load(ctx, ctx.args.file)
    if parsed is None:
        return
    usl, lsl = _limits(ctx.args)
    doc = _attach(ctx, parsed, ctx.args.doc, ctx.args.process) if ctx.args.doc else None
    analyses = analyze(parsed.model, doc, _summaries(ctx.args.series, usl, lsl))
    ctx.report(analyses.diagnostics, parsed)
    document = render_report(parsed.model, analyses)
    ctx.emit(document.to_json() if ctx.json else document.to_text())


def cmd_rules(ctx: _Context) -> None:
    rules = sorted(rule_catalog().values(), key=lambda r: r.code)
    if ctx.json:
        ctx.emit_json([{"code": r.code, "severity": r.severity.value, "step": r.step,
                        "description": r.description} for r in rules])
    else:
        ctx.emit("".join(
            f"{r.code:<11} {r.severity.value:<8} {'-' if r.step is None else r.step}  {r.description}\n"
            for r in rules
        ))


COMMANDS = {
    "validate": cmd_validate,
    "guide": cmd_guide,
    "indicators": cmd_indicators,
    "fmea": cmd_fmea,
    "spc": cmd_spc,
    "export-schema": cmd_export_schema,
    "export-data": cmd_export_data,
    "report": cmd_report,
    "rules": cmd_rules,
}


def run(argv: list[str] | None = None, stdout: TextIO | None = None,
        stderr: TextIO | None = None) -> int:
    """Run one command and return its exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
        ctx = _Context(args, stdout, stderr)
        COMMANDS[args.command](ctx)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        stderr.write(f"qproc: {exc}\n")
        return EXIT_USAGE
    return EXIT_ERRORS if ctx.errors else EXIT_OK


def main() -> None:
    sys.exit(run())
