"""Which entities an analysis looks at.

A scope is the whole model, one Process (together with its elementary
sub-processes) or one Product.  Populations are computed once here so the
guide and the indicators always agree on what they are counting.
"""

from __future__ import annotations

from dataclasses import dataclass

from qproc.errors import UnknownEntity
from qproc.model import QualityModel, entity_key


@dataclass(frozen=True)
class Scope:
    subject: str | None  # entity id, or None for the whole model
    processes: tuple[str, ...]
    products: tuple[str, ...]  # output products
    requirements: tuple[str, ...]
    characteristics: tuple[str, ...]
    checks: tuple[str, ...]
    nonconformities: tuple[str, ...]


def _ordered(model: QualityModel, ids) -> tuple[str, ...]:
    return tuple(sorted(set(ids), key=lambda i: entity_key(model.entities[i])))


def subtree(model: QualityModel, process: str) -> list[str]:
    """``process`` and every process it is transitively composed of."""
    seen, stack = [], [process]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.append(node)
        stack.extend(model.targets(node, "composed_of"))
    return seen


def resolve_scope(model: QualityModel, scope: str | None = None) -> Scope:
    """Populations for ``scope`` (an entity id, or None for the whole model)."""
    catalog = model.catalog
    if scope is None:
        processes = [e.id for e in model.of_kind("Process")]
        products = [p for p in (e.id for e in model.of_kind("Product"))
                    if model.targets(p, "results_from")]
        requirements = [e.id for e in model.of_kind("Requirement")]
        characteristics = [e.id for e in model.of_kind("QualityCharacteristic")]
        nonconformities = [e.id for e in model.of_kind("Nonconformity")]
    else:
        entity = model.entities.get(scope)
        if entity is None:
            raise UnknownEntity(f"no entity {scope!r}")
        if catalog.is_a(entity.kind, "Process"):
            processes = subtree(model, scope)
            products = [p for proc in processes for p in model.sources(proc, "results_from")]
        elif catalog.is_a(entity.kind, "Product"):
            processes, products = [], [scope]
        else:
            raise UnknownEntity(f"{entity.kind} {entity.name!r} is not a Process or Product")
        owners = list(processes) + list(products)
        requirements = [r for o in owners for r in model.targets(o, "has_requirement")]
        characteristics = [c for r in requirements for c in model.targets(r, "specifies")]
        nonconformities = [
            n for o in owners for n in model.sources(o, "concerns")
            if catalog.is_a(model.entities[n].kind, "Nonconformity")
        ]
    checks = [k for c in characteristics for k in model.targets(c, "checked_by")]
    return Scope(
        scope,
        _ordered(model, processes),
        _ordered(model, products),
        _ordered(model, requirements),
        _ordered(model, characteristics),
        _ordered(model, checks),
        _ordered(model, nonconformities),
    )


def describe(model: QualityModel, eid: str) -> str:
    entity = model.entities[eid]
    return f"{entity.kind} {entity.name!r}"
