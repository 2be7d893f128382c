"""Seven-step design guide.

Each step owns a set of obligations over the scope.  A step is complete
when none of its obligations is pending and every earlier step is
complete; the questions of a step are asked in order, so a later step
cannot be finished before an earlier one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qproc.analysis.scope import Scope, resolve_scope, subtree
from qproc.diagnostics import Diagnostic
from qproc.errors import UnknownEntity
from qproc.model import QualityModel

STEP_TITLES = {
    1: "Process context",
    2: "Product requirements and characteristics",
    3: "Means of checking each characteristic",
    4: "Evidence of conformity",
    5: "Conformity determination",
    6: "Cause analysis",
    7: "Treatment actions",
}


@dataclass
class GuideStep:
    step: int
    title: str
    status: str  # "complete" | "incomplete"
    pending: list[Diagnostic] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.status == "complete"


@dataclass
class GuideReport:
    scope: str | None
    steps: list[GuideStep]

    def statuses(self) -> tuple[bool, ...]:
        return tuple(s.complete for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "steps": [
                {"step": s.step, "title": s.title, "status": s.status,
                 "pending": [d.to_dict() for d in s.pending]}
                for s in self.steps
            ],
        }


def _name(model: QualityModel, eid: str) -> str:
    return model.entities[eid].name


def boundary(model: QualityModel, process: str) -> tuple[list[str], list[str]]:
    """Input and output products crossing the boundary of ``process``."""
    procs = subtree(model, process)
    consumed = [p for proc in procs for p in model.targets(proc, "consumes")]
    produced = [p for proc in procs for p in model.sources(proc, "results_from")]
    inputs = [p for p in dict.fromkeys(consumed) if p not in produced]
    outputs = [p for p in dict.fromkeys(produced) if p not in consumed]
    return inputs, outputs


def _step1(model: QualityModel, scope: Scope) -> list[Diagnostic]:
    if scope.subject is not None:
        studied = [scope.subject]
    else:
        studied = [p for p in scope.processes if not model.sources(p, "composed_of")]
    if not studied:
        return [Diagnostic.of("G1-005", "Which manufacturing process is being studied?")]
    out = []
    for proc in studied:
        name = _name(model, proc)
        inputs, outputs = boundary(model, proc)
        if not inputs:
            out.append(Diagnostic.of("G1-001", f"Which product does process {name!r} consume?", proc))
        if not outputs:
            out.append(Diagnostic.of("G1-002", f"Which product does process {name!r} deliver?", proc))
        if not any(model.sources(p, "receives") for p in outputs):
            out.append(Diagnostic.of(
                "G1-003", f"Which customer receives the output of process {name!r}?", proc
            ))
        if not any(model.sources(p, "supplies") for p in inputs):
            out.append(Diagnostic.of(
                "G1-004", f"Which supplier provides the input of process {name!r}?", proc
            ))
    return out


def _step2(model: QualityModel, scope: Scope) -> list[Diagnostic]:
    out = []
    for product in scope.products:
        if not model.targets(product, "has_requirement"):
            out.append(Diagnostic.of(
                "G2-001", f"Which requirements apply to product {_name(model, product)!r}?", product
            ))
    for req in scope.requirements:
        if not model.targets(req, "specifies"):
            out.append(Diagnostic.of(
                "G2-002",
                f"Which quality characteristic expresses requirement {_name(model, req)!r}?",
                req,
            ))
    return out


def _step3(model: QualityModel, scope: Scope) -> list[Diagnostic]:
    return [
        Diagnostic.of(
            "G3-001",
            f"Which observation, measurement or test determines characteristic "
            f"{_name(model, char)!r}?",
            char,
        )
        for char in scope.characteristics
        if not model.targets(char, "checked_by")
    ]


def _step4(model: QualityModel, scope: Scope) -> list[Diagnostic]:
    return [
        Diagnostic.of(
            "G4-001", f"Which tangible proof records check {_name(model, check)!r}?", check
        )
        for check in scope.checks
        if not model.targets(check, "attached_proof")
    ]


def _step5(model: QualityModel, scope: Scope) -> list[Diagnostic]:
    return [
        Diagnostic.of(
            "G5-001",
            f"Is product {_name(model, product)!r} conforming, and which nonconformities can it show?",
            product,
        )
        for product in scope.products
        if not model.sources(product, "concerns")
    ]


def _step6(model: QualityModel, scope: Scope) -> list[Diagnostic]:
    return [
        Diagnostic.of("G6-001", f"What causes nonconformity {_name(model, nc)!r}?", nc)
        for nc in scope.nonconformities
        if not model.targets(nc, "caused_by")
    ]


def _step7(model: QualityModel, scope: Scope) -> list[Diagnostic]:
    out = []
    for nc in scope.nonconformities:
        treated = model.sources(nc, "treats") or any(
            model.sources(cause, "treats") for cause in model.targets(nc, "caused_by")
        )
        if not treated:
            out.append(Diagnostic.of(
                "G7-001",
                f"Which action treats nonconformity {_name(model, nc)!r} or its causes?",
                nc,
            ))
    return out


_CHECKS = (_step1, _step2, _step3, _step4, _step5, _step6, _step7)


def run_guide(model: QualityModel, scope: str | None = None) -> GuideReport:
    """Evaluate the seven guide steps for ``scope`` (a Process id) or the whole model."""
    if scope is not None:
        entity = model.entities.get(scope)
        if entity is None or not model.catalog.is_a(entity.kind, "Process"):
            raise UnknownEntity(f"guide scope {scope!r} is not a Process of this model")
    populations = resolve_scope(model, scope)
    steps = []
    blocked_by = None
    for number, check in enumerate(_CHECKS, start=1):
        pending = [
            Diagnostic(d.severity, d.code, d.message, d.subject, number) for d in check(model, populations)
        ]
        if blocked_by is not None:
            pending.append(Diagnostic.of(
                "G0-001", f"complete step {blocked_by} ({STEP_TITLES[blocked_by]}) first",
                scope, step=number,
            ))
        status = "incomplete" if pending else "complete"
        if pending and blocked_by is None:
            blocked_by = number
        steps.append(GuideStep(number, STEP_TITLES[number], status, pending))
    return GuideReport(scope, steps)
