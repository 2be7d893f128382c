"""Meta-model constraint checking."""

from __future__ import annotations

from qproc.analysis.scope import describe
from qproc.catalog import SYSTEM_REQUIREMENTS
from qproc.diagnostics import Diagnostic
from qproc.model import QualityModel, entity_key


def _plural(n: int, word: str) -> str:
    return f"{n} {word}" if n == 1 else f"{n} {word}s"


def _leaf(model: QualityModel, process: str) -> bool:
    return not model.targets(process, "composed_of")


def check_multiplicities(model: QualityModel) -> list[Diagnostic]:
    catalog = model.catalog
    out = []
    for rel in catalog.relations.values():
        for entity in model.entities.values():
            kind = entity.kind
            if catalog.conforms(kind, rel.sources):
                count = len(model.outgoing(entity.id, rel.name))
                mult = rel.target_mult
                lower = mult.lower
                if rel.name == "specifies":
                    lower = 0  # reported as R-ORPH-001
                if rel.name == "results_from" and model.sources(entity.id, "supplies"):
                    lower = 0  # a supplied product comes from the supplier's process
                out += _bound(model, entity.id, rel.name, "outgoing", count, lower, mult.upper)
            if catalog.conforms(kind, rel.targets):
                count = len(model.incoming(entity.id, rel.name))
                mult = rel.source_mult
                lower = mult.lower
                if rel.name == "results_from" and not _leaf(model, entity.id):
                    lower = 0  # a composite process yields through its parts
                out += _bound(model, entity.id, rel.name, "incoming", count, lower, mult.upper)
    return out


def _bound(model, eid, relation, direction, count, lower, upper) -> list[Diagnostic]:
    what = f"{describe(model, eid)} has {_plural(count, direction + ' ' + relation + ' link')}"
    if upper is not None and count > upper:
        return [Diagnostic.of("R-MULT-001", f"{what}; at most {upper} allowed", eid)]
    if count < lower:
        return [Diagnostic.of("R-MULT-002", f"{what}; at least {lower} required", eid)]
    return []


def check_system_theory(model: QualityModel) -> list[Diagnostic]:
    out = []
    catalog = model.catalog
    for proc in model.of_kind("Process"):
        if not _leaf(model, proc.id):
            continue
        covered = set()
        for product in model.sources(proc.id, "results_from"):
            for req in model.targets(product, "has_requirement"):
                kind = model.entities[req].kind
                covered.update(k for k in SYSTEM_REQUIREMENTS if catalog.is_a(kind, k))
        if len(covered) < 2:
            have = ", ".join(k.removesuffix("Requirement").lower() for k in sorted(covered)) or "none"
            out.append(Diagnostic.of(
                "R-SYS-001",
                f"{describe(model, proc.id)} must transform at least two of shape, space, time "
                f"in its output product requirements (has: {have})",
                proc.id,
            ))
    return out


def check_orphans(model: QualityModel) -> list[Diagnostic]:
    out = []
    for req in model.of_kind("Requirement"):
        if not model.targets(req.id, "specifies"):
            out.append(Diagnostic.of(
                "R-ORPH-001", f"{describe(model, req.id)} specifies no quality characteristic", req.id
            ))
    for kind in ("Conformity", "Nonconformity"):
        for nc in model.of_kind(kind):
            if not model.targets(nc.id, "concerns"):
                out.append(Diagnostic.of(
                    "R-ORPH-002", f"{describe(model, nc.id)} concerns no product or process", nc.id
                ))
    return out


def check_decomposition(model: QualityModel) -> list[Diagnostic]:
    """Report each process lying on a composed_of cycle."""
    out = []
    for proc in model.of_kind("Process"):
        stack, seen = list(model.targets(proc.id, "composed_of")), set()
        while stack:
            node = stack.pop()
            if node == proc.id:
                out.append(Diagnostic.of(
                    "R-DAG-001", f"{describe(model, proc.id)} is part of itself", proc.id
                ))
                break
            if node not in seen:
                seen.add(node)
                stack.extend(model.targets(node, "composed_of"))
    return out


_TYPES = {
    "text": lambda v: isinstance(v, str),
    "numeric": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
}


def check_attributes(model: QualityModel) -> list[Diagnostic]:
    out = []
    for entity in model.entities.values():
        types = model.catalog.attribute_types(entity.kind)
        for key, value in sorted(entity.attributes.items()):
            expected = types.get(key)
            if expected is not None and not _TYPES[expected](value):
                out.append(Diagnostic.of(
                    "R-ATTR-001",
                    f"{describe(model, entity.id)}: {key} = {value!r} is not {expected}",
                    entity.id,
                ))
    return out


def validate(model: QualityModel) -> list[Diagnostic]:
    """Every meta-model violation in ``model``, ordered by (code, subject)."""
    found = (
        check_multiplicities(model)
        + check_system_theory(model)
        + check_orphans(model)
        + check_decomposition(model)
        + check_attributes(model)
    )

    def order(d: Diagnostic):
        entity = model.entities.get(d.subject)
        return (d.code, entity_key(entity) if entity else ("", "", ("", 0, "")), d.message)

    return sorted(found, key=order)
