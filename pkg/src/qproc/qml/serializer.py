"""Canonical QML writer.

Every entity is declared explicitly, grouped by kind in catalog order and
sorted by name, so ``serialize(parse(serialize(m))) == serialize(m)``.
References are qualified with a kind keyword only when the bare name
would be ambiguous.
"""

from __future__ import annotations

import json

from qproc.model import Entity, QualityModel
from qproc.qml.lexer import IDENT, KEYWORDS
from qproc.qml.parser import ACTION_TYPES, CAUSE_TYPES, CHECK_KEYWORDS, REQUIREMENT_TYPES

_REQ_WORD = {v: k for k, v in REQUIREMENT_TYPES.items()}
_CAUSE_WORD = {v: k for k, v in CAUSE_TYPES.items()}
_ACTION_WORD = {v: k for k, v in ACTION_TYPES.items()}
_CHECK_WORD = {v: k for k, v in CHECK_KEYWORDS.items()}


def quote_name(name: str) -> str:
    if IDENT.match(name) and name not in KEYWORDS:
        return name
    return json.dumps(name, ensure_ascii=False)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return json.dumps(value, ensure_ascii=False)


def _attrs(attributes: dict, skip: str | None = None) -> str:
    items = [(k, v) for k, v in sorted(attributes.items()) if k != skip]
    if not items:
        return ""
    return " [" + ", ".join(f"{k} = {format_value(v)}" for k, v in items) + "]"


class _Writer:
    def __init__(self, model: QualityModel):
        self.model = model
        self.catalog = model.catalog

    def entity(self, eid: str) -> Entity:
        return self.model.entities[eid]

    def qualifier(self, entity: Entity) -> str:
        kind = entity.kind
        if self.catalog.is_a(kind, "Cause"):
            return "cause" if kind == "Cause" else f"cause {_CAUSE_WORD[kind]}"
        if kind in _CHECK_WORD:
            return _CHECK_WORD[kind]
        return kind.lower()

    def ref(self, eid: str, accepted: tuple[str, ...]) -> str:
        entity = self.entity(eid)
        rivals = [e for kind in accepted for e in self.model.lookup(kind, entity.name)]
        text = quote_name(entity.name)
        if len(rivals) > 1:
            text = f"{self.qualifier(entity)} {text}"
        return text

    def refs(self, eids, accepted: tuple[str, ...]) -> str:
        ordered = sorted(eids, key=lambda e: (self.entity(e).name, self.entity(e).kind))
        return ", ".join(self.ref(e, accepted) for e in ordered)

    def names(self, eids) -> str:
        return ", ".join(quote_name(n) for n in sorted(self.entity(e).name for e in eids))

    def declaration(self, entity: Entity) -> list[str]:
        model, eid, kind = self.model, entity.id, entity.kind
        name = quote_name(entity.name)
        if kind == "Process":
            head = f"process {name}{_attrs(entity.attributes)}"
            items = [f"  input product {quote_name(self.entity(p).name)}"
                     for p in sorted(model.targets(eid, "consumes"), key=self._name)]
            items += [f"  output product {quote_name(self.entity(p).name)}"
                      for p in sorted(model.sources(eid, "results_from"), key=self._name)]
            items += [f"  part {self.ref(p, ('Process',))}"
                      for p in sorted(model.targets(eid, "composed_of"), key=self._name)]
            return [head + " {", *items, "}"] if items else [head]
        if kind in ("Product", "TangibleProof"):
            word = "product" if kind == "Product" else "proof"
            return [f"{word} {name}{_attrs(entity.attributes)}"]
        if kind == "QualityCharacteristic":
            text = f"characteristic {name}"
            if "value" in entity.attributes:
                text += f" = {format_value(entity.attributes['value'])}"
            return [text + _attrs(entity.attributes, skip="value")]
        if kind in ("Customer", "Supplier"):
            verb = "receives" if kind == "Customer" else "supplies"
            text = f"{kind.lower()} {name}{_attrs(entity.attributes)}"
            products = model.targets(eid, verb)
            if products:
                text += f" {verb} {self.refs(products, ('Product',))}"
            return [text]
        if self.catalog.is_a(kind, "Requirement"):
            word = _REQ_WORD.get(kind)
            text = "requirement " + (f"{word} " if word else "") + name + _attrs(entity.attributes)
            owners = model.sources(eid, "has_requirement")
            if owners:
                text += f" on {self.refs(owners, ('Product', 'Process'))}"
            chars = sorted(model.targets(eid, "specifies"), key=self._name)
            if not chars:
                return [text]
            return [text + " {",
                    *(f"  characteristic {quote_name(self.entity(c).name)}" for c in chars), "}"]
        if kind in _CHECK_WORD:
            text = f"{_CHECK_WORD[kind]} {name}{_attrs(entity.attributes)}"
            chars = model.sources(eid, "checked_by")
            if chars:
                text += f" checks {self.refs(chars, ('QualityCharacteristic',))}"
            proofs = model.targets(eid, "attached_proof")
            if proofs:
                text += f" proof {self.names(proofs)}"
            return [text]
        if kind in ("Conformity", "Nonconformity"):
            text = f"{kind.lower()} {name}{_attrs(entity.attributes)}"
            owners = model.targets(eid, "concerns")
            if owners:
                text += f" on {self.refs(owners, ('Product', 'Process'))}"
            checks = model.sources(eid, "detects")
            if checks:
                text += f" detected by {self.refs(checks, tuple(_CHECK_WORD))}"
            return [text]
        if self.catalog.is_a(kind, "Cause"):
            word = _CAUSE_WORD.get(kind)
            text = "cause " + (f"{word} " if word else "") + name + _attrs(entity.attributes)
            ncs = model.sources(eid, "caused_by")
            if ncs:
                text += f" of {self.refs(ncs, ('Nonconformity',))}"
            return [text]
        if self.catalog.is_a(kind, "Action"):
            word = _ACTION_WORD.get(kind)
            text = "action " + (f"{word} " if word else "") + name + _attrs(entity.attributes)
            treated = model.targets(eid, "treats")
            if treated:
                text += f" treats {self.refs(treated, ('Nonconformity', 'Cause'))}"
            return [text]
        raise ValueError(f"no QML form for kind {kind}")  # pragma: no cover

    def _name(self, eid: str):
        return (self.entity(eid).name, eid)

    def write(self) -> str:
        lines = [f"model {quote_name(self.model.name)}"]
        for kind in self.catalog.kinds:
            group = sorted(
                (e for e in self.model.entities.values() if e.kind == kind),
                key=lambda e: e.name,
            )
            if not group:
                continue
            lines.append("")
            for entity in group:
                lines.extend(self.declaration(entity))
        return "\n".join(lines) + "\n"


def serialize(model: QualityModel) -> str:
    """Canonical QML text for ``model``."""
    return _Writer(model).write()
