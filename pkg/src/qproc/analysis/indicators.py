"""The two quality indicators of the assessment phase.

conformity
    share of quality characteristics that are checked by an observation,
    measurement or test, where every such check carries a tangible proof.
cause
    share of nonconformities linked to at least one cause.

Both are exact fractions in [0, 100].  An empty population gives 100 plus
a notice, since there is nothing left unchecked or unexplained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from qproc.analysis.scope import resolve_scope
from qproc.diagnostics import Diagnostic
from qproc.model import QualityModel

HUNDRED = Fraction(100)


@dataclass
class ConformityIndicator:
    pct: Fraction
    checked: list[tuple[str, tuple[str, ...]]]
    unchecked: list[str]
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass
class CauseIndicator:
    pct: Fraction
    explained: list[tuple[str, tuple[str, ...]]]
    unexplained: list[str]
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass
class IndicatorReport:
    scope: str | None
    conformity_pct: Fraction
    cause_pct: Fraction
    checked: list[tuple[str, tuple[str, ...]]]
    unchecked: list[str]
    explained: list[tuple[str, tuple[str, ...]]]
    unexplained: list[str]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def to_dict(self, model: QualityModel | None = None) -> dict:
        def name(eid):
            return model.entities[eid].name if model is not None else eid

        return {
            "scope": name(self.scope) if self.scope else None,
            "conformity_pct": float(self.conformity_pct),
            "cause_pct": float(self.cause_pct),
            "checked": [{"characteristic": name(c), "evidence": [name(e) for e in ev]}
                        for c, ev in self.checked],
            "unchecked": [name(c) for c in self.unchecked],
            "explained": [{"nonconformity": name(n), "causes": [name(c) for c in cs]}
                          for n, cs in self.explained],
            "unexplained": [name(n) for n in self.unexplained],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def _ratio(hits: int, total: int) -> Fraction:
    return HUNDRED if total == 0 else HUNDRED * hits / total


def conformity_indicator(model: QualityModel, scope: str | None = None) -> ConformityIndicator:
    population = resolve_scope(model, scope).characteristics
    checked, unchecked = [], []
    for char in population:
        checks = sorted(set(model.targets(char, "checked_by")))
        proofs = {k: model.targets(k, "attached_proof") for k in checks}
        if checks and all(proofs.values()):
            evidence = tuple(checks) + tuple(sorted({p for ps in proofs.values() for p in ps}))
            checked.append((char, evidence))
        else:
            unchecked.append(char)
    notes = []
    if not population:
        notes.append(Diagnostic.of(
            "NO-CHAR", "no quality characteristic in scope; conformity indicator is 100% by default",
            scope,
        ))
    return ConformityIndicator(_ratio(len(checked), len(population)), checked, unchecked, notes)


def cause_indicator(model: QualityModel, scope: str | None = None) -> CauseIndicator:
    population = resolve_scope(model, scope).nonconformities
    explained, unexplained = [], []
    for nc in population:
        causes = tuple(sorted(set(model.targets(nc, "caused_by"))))
        if causes:
            explained.append((nc, causes))
        else:
            unexplained.append(nc)
    notes = []
    if not population:
        notes.append(Diagnostic.of(
            "NO-NC", "no nonconformity in scope; cause indicator is 100% by default", scope
        ))
    return CauseIndicator(_ratio(len(explained), len(population)), explained, unexplained, notes)


def indicator_report(model: QualityModel, scope: str | None = None) -> IndicatorReport:
    conf = conformity_indicator(model, scope)
    cause = cause_indicator(model, scope)
    return IndicatorReport(
        scope,
        conf.pct,
        cause.pct,
        conf.checked,
        conf.unchecked,
        cause.explained,
        cause.unexplained,
        conf.diagnostics + cause.diagnostics,
    )


def format_pct(value: Fraction) -> str:
    """One decimal, rounded half up."""
    tenths = math.floor(value * 10 + Fraction(1, 2))
    return f"{tenths // 10}.{tenths % 10}%"

