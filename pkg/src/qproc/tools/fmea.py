"""FMEA worksheet linked into the quality model.

A worksheet row names a failure mode and, optionally, the model objects it
shares with the model: the nonconformity it corresponds to, its cause and
the recommended action.  Attaching the worksheet adds the missing links
between those common objects.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from qproc.diagnostics import Diagnostic
from qproc.errors import InvalidScale, UnknownEntity
from qproc.model import QualityModel

COLUMNS = ("failure_mode", "effect", "S", "O", "D", "nonconformity", "cause", "action")


def compute_rpn(severity: int, occurrence: int, detection: int) -> int:
    """Risk priority number S x O x D on 1..10 scales."""
    for label, value in (("severity", severity), ("occurrence", occurrence),
                         ("detection", detection)):
        if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= 10:
            raise InvalidScale(f"{label} must be an integer in 1..10, got {value!r}")
    return severity * occurrence * detection


@dataclass(frozen=True)
class FmeaEntry:
    failure_mode: str
    effect: str
    severity: int
    occurrence: int
    detection: int
    nonconformity_ref: str | None = None
    cause_ref: str | None = None
    action_ref: str | None = None
    rpn: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rpn", compute_rpn(self.severity, self.occurrence, self.detection))

    def to_dict(self) -> dict:
        return {
            "failure_mode": self.failure_mode,
            "effect": self.effect,
            "S": self.severity,
            "O": self.occurrence,
            "D": self.detection,
            "rpn": self.rpn,
            "nonconformity": self.nonconformity_ref,
            "cause": self.cause_ref,
            "action": self.action_ref,
        }


@dataclass
class FmeaDocument:
    process_ref: str
    entries: list[FmeaEntry] = field(default_factory=list)


def rank_entries(doc: FmeaDocument) -> list[FmeaEntry]:
    """Highest risk first; ties by severity, then worksheet order."""
    return sorted(doc.entries, key=lambda e: (-e.rpn, -e.severity))


def read_fmea(text: str, process_ref: str) -> FmeaDocument:
    """Parse the semicolon-delimited worksheet format.

    Blank lines and ``#`` comment lines are skipped, as is a header row
    starting with ``failure_mode``.
    """
    rows = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    entries = []
    for lineno, row in enumerate(csv.reader(io.StringIO("\n".join(rows)), delimiter=";"), start=1):
        cells = [c.strip() for c in row]
        if lineno == 1 and cells and cells[0].lower() == "failure_mode":
            continue
        if len(cells) != len(COLUMNS):
            raise ValueError(f"FMEA row {lineno}: expected {len(COLUMNS)} fields, got {len(cells)}")
        try:
            s, o, d = (int(c) for c in cells[2:5])
        except ValueError:
            raise InvalidScale(f"FMEA row {lineno}: S, O, D must be integers") from None
        entries.append(FmeaEntry(cells[0], cells[1], s, o, d, *(c or None for c in cells[5:])))
    return FmeaDocument(process_ref, entries)


def _resolve(model: QualityModel, ref: str, kind: str) -> str | None:
    entity = model.entities.get(ref)
    if entity is not None and model.catalog.is_a(entity.kind, kind):
        return ref
    found = model.lookup(kind, ref)
    return found[0] if len(found) == 1 else None


def _ensure(model: QualityModel, relation: str, source: str, target: str) -> None:
    if target not in model.targets(source, relation):
        model.add_link(relation, source, target)


def attach_fmea(model: QualityModel, doc: FmeaDocument) -> list[Diagnostic]:
    """Link the worksheet's common objects into ``model``.

    Adds caused_by (nonconformity to cause), treats (action to the cause,
    or to the nonconformity when no cause is given) and concerns
    (nonconformity to the studied process, when it has no owner yet).
    Existing links are reused, so attaching twice changes nothing.
    """
    process = _resolve(model, doc.process_ref, "Process")
    if process is None:
        raise UnknownEntity(f"FMEA process {doc.process_ref!r} is not a Process of this model")
    diagnostics = []
    for row, entry in enumerate(doc.entries, start=1):
        refs = {
            "Nonconformity": entry.nonconformity_ref,
            "Cause": entry.cause_ref,
            "Action": entry.action_ref,
        }
        if not any(refs.values()):
            diagnostics.append(Diagnostic.of(
                "FMEA-002", f"row {row} ({entry.failure_mode!r}) references no model entity", process
            ))
            continue
        found = {}
        for kind, ref in refs.items():
            if not ref:
                continue
            eid = _resolve(model, ref, kind)
            if eid is None:
                diagnostics.append(Diagnostic.of(
                    "FMEA-001", f"row {row}: {kind.lower()} {ref!r} not found in the model", process
                ))
            else:
                found[kind] = eid
        nc, cause, action = (found.get(k) for k in ("Nonconformity", "Cause", "Action"))
        if nc and not model.targets(nc, "concerns"):
            model.add_link("concerns", nc, process)
        if nc and cause:
            _ensure(model, "caused_by", nc, cause)
        if action and (cause or nc):
            _ensure(model, "treats", action, cause or nc)
    return diagnostics
