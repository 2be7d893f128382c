"""Quality model instance graph with integrity-checked mutation."""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Union

from qproc.catalog import CATALOG, MetaCatalog
from qproc.errors import (
    DecompositionCycle,
    DuplicateName,
    InvalidAttribute,
    InvalidName,
    KindMismatch,
    UnknownEntity,
)

Scalar = Union[str, int, float, bool]

ATTRIBUTE_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Entity:
    id: str
    kind: str
    name: str
    attributes: dict[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class Link:
    id: str
    relation: str
    source: str
    target: str


def _check_attributes(attributes) -> dict[str, Scalar]:
    clean = {}
    for key, value in (attributes or {}).items():
        if not isinstance(key, str) or not ATTRIBUTE_KEY.match(key):
            raise InvalidAttribute(f"attribute key {key!r} is not an identifier")
        if not isinstance(value, (str, int, float, bool)):
            raise InvalidAttribute(f"attribute {key!r} must be a scalar, got {type(value).__name__}")
        if isinstance(value, float) and not math.isfinite(value):
            raise InvalidAttribute(f"attribute {key!r} must be finite")
        clean[key] = value
    return clean


class QualityModel:
    """A typed entity/link graph conforming to a :class:`MetaCatalog`.

    Structural rules (kinds, link signatures, acyclic decomposition) are
    enforced on mutation.  Multiplicity bounds are not: a model built step
    by step is allowed to be incomplete, and ``validate`` reports it.
    """

    def __init__(self, name: str, catalog: MetaCatalog = CATALOG):
        if not isinstance(name, str) or not name.strip():
            raise InvalidName("model name must be a nonempty string")
        self.name = name
        self.catalog = catalog
        self.entities: dict[str, Entity] = {}
        self.links: dict[str, Link] = {}
        self._by_name: dict[tuple[str, str], str] = {}
        self._out: dict[str, list[str]] = defaultdict(list)
        self._in: dict[str, list[str]] = defaultdict(list)
        self._next_entity = 1
        self._next_link = 1

    def __repr__(self) -> str:
        return f"QualityModel({self.name!r}, {len(self.entities)} entities, {len(self.links)} links)"

    # -- mutation -------------------------------------------------------

    def _fresh(self, prefix: str, table: dict, counter: str) -> str:
        n = getattr(self, counter)
        while f"{prefix}{n}" in table:
            n += 1
        setattr(self, counter, n + 1)
        return f"{prefix}{n}"

    def add_entity(self, kind: str, name: str, attributes=None, *, id: str | None = None) -> str:
        self.catalog.kind(kind)
        if not isinstance(name, str) or not name:
            raise InvalidName("entity name must be a nonempty string")
        if (kind, name) in self._by_name:
            raise DuplicateName(f"{kind} {name!r} already exists")
        attrs = _check_attributes(attributes)
        if id is None:
            id = self._fresh("e", self.entities, "_next_entity")
        elif id in self.entities or id in self.links:
            raise DuplicateName(f"id {id!r} already in use")
        self.entities[id] = Entity(id, kind, name, attrs)
        self._by_name[(kind, name)] = id
        return id

    def set_attributes(self, entity_id: str, attributes) -> None:
        old = self.entity(entity_id)
        merged = dict(old.attributes)
        merged.update(_check_attributes(attributes))
        self.entities[entity_id] = Entity(old.id, old.kind, old.name, merged)

    def add_link(self, relation: str, source: str, target: str, *, id: str | None = None) -> str:
        rel = self.catalog.relation(relation)
        src, dst = self.entity(source), self.entity(target)
        if not self.catalog.conforms(src.kind, rel.sources):
            raise KindMismatch(
                f"{relation}: source {src.kind} {src.name!r} is not one of {', '.join(rel.sources)}"
            )
        if not self.catalog.conforms(dst.kind, rel.targets):
            raise KindMismatch(
                f"{relation}: target {dst.kind} {dst.name!r} is not one of {', '.join(rel.targets)}"
            )
        if rel.acyclic and (source == target or self._reaches(target, source, relation)):
            raise DecompositionCycle(
                f"{relation}({src.name} -> {dst.name}) would close a cycle"
            )
        if id is None:
            id = self._fresh("l", self.links, "_next_link")
        elif id in self.links or id in self.entities:
            raise DuplicateName(f"id {id!r} already in use")
        self.links[id] = Link(id, relation, source, target)
        self._out[source].append(id)
        self._in[target].append(id)
        return id

    def decompose(self, parent: str, child: str) -> str:
        for eid in (parent, child):
            if not self.catalog.is_a(self.entity(eid).kind, "Process"):
                raise KindMismatch(f"{self.entity(eid).name!r} is not a Process")
        return self.add_link("composed_of", parent, child)

    def remove_link(self, link_id: str) -> None:
        link = self.links.pop(link_id, None)
        if link is None:
            raise UnknownEntity(f"no link {link_id!r}")
        self._out[link.source].remove(link_id)
        self._in[link.target].remove(link_id)

    def remove_entity(self, entity_id: str) -> None:
        """Remove an entity together with every link touching it."""
        entity = self.entity(entity_id)
        for lid in list(self._out[entity_id]) + list(self._in[entity_id]):
            if lid in self.links:
                self.remove_link(lid)
        del self.entities[entity_id]
        del self._by_name[(entity.kind, entity.name)]
        self._out.pop(entity_id, None)
        self._in.pop(entity_id, None)

    def _reaches(self, start: str, goal: str, relation: str) -> bool:
        stack, seen = [start], set()
        while stack:
            node = stack.pop()
            if node == goal:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self.targets(node, relation))
        return False

    # -- lookup ---------------------------------------------------------

    def entity(self, entity_id: str) -> Entity:
        try:
            return self.entities[entity_id]
        except (KeyError, TypeError):
            raise UnknownEntity(f"no entity {entity_id!r}") from None

    def find(self, kind: str, name: str) -> str | None:
        """Id of the entity with exactly this kind and name, if any."""
        self.catalog.kind(kind)
        return self._by_name.get((kind, name))

    def lookup(self, kind: str, name: str) -> list[str]:
        """Ids of entities named ``name`` whose kind is ``kind`` or a subtype."""
        return [
            self._by_name[(k, name)]
            for k in self.catalog.descendants(kind)
            if (k, name) in self._by_name
        ]

    def outgoing(self, entity_id: str, relation: str | None = None) -> list[Link]:
        return [
            self.links[lid]
            for lid in self._out.get(entity_id, ())
            if relation is None or self.links[lid].relation == relation
        ]

    def incoming(self, entity_id: str, relation: str | None = None) -> list[Link]:
        return [
            self.links[lid]
            for lid in self._in.get(entity_id, ())
            if relation is None or self.links[lid].relation == relation
        ]

    def targets(self, entity_id: str, relation: str) -> list[str]:
        return [link.target for link in self.outgoing(entity_id, relation)]

    def sources(self, entity_id: str, relation: str) -> list[str]:
        return [link.source for link in self.incoming(entity_id, relation)]

    def of_kind(self, kind: str) -> list[Entity]:
        """Entities of ``kind`` or any subtype, ordered by (kind, name, id)."""
        accepted = set(self.catalog.descendants(kind))
        return sorted((e for e in self.entities.values() if e.kind in accepted), key=entity_key)

    def query(
        self,
        kind: str | None = None,
        relation: str | None = None,
        source: str | None = None,
        target: str | None = None,
    ) -> list:
        """Select entities or links.

        Without ``relation`` this returns entities matching ``kind``.  With
        a relation pattern and exactly one bound endpoint it returns the
        entities at the free end (``caused_by(NC1, *)`` gives NC1's causes);
        otherwise it returns the matching links.  ``kind`` filters entities
        and matches subtypes.
        """
        accepted = set(self.catalog.descendants(kind)) if kind is not None else None
        if relation is None:
            if source is not None or target is not None:
                raise ValueError("endpoint filters need a relation")
            return self.of_kind(kind) if kind is not None else sorted(
                self.entities.values(), key=entity_key
            )
        self.catalog.relation(relation)
        if source is not None:
            self.entity(source)
        if target is not None:
            self.entity(target)
        links = [
            link
            for link in self.links.values()
            if link.relation == relation
            and (source is None or link.source == source)
            and (target is None or link.target == target)
        ]
        if (source is None) != (target is None):
            ends = {link.target if source is not None else link.source for link in links}
            found = [self.entities[eid] for eid in ends]
            if accepted is not None:
                found = [e for e in found if e.kind in accepted]
            return sorted(found, key=entity_key)
        return sorted(links, key=self.link_key)

    def link_key(self, link: Link):
        return (
            link.relation,
            entity_key(self.entities[link.source]),
            entity_key(self.entities[link.target]),
            _natural(link.id),
        )

    def __iter__(self) -> Iterator[Entity]:
        return iter(sorted(self.entities.values(), key=entity_key))

    def __len__(self) -> int:
        return len(self.entities)


def _natural(ident: str):
    m = re.fullmatch(r"([A-Za-z_]*)(\d+)", ident)
    return (m.group(1), int(m.group(2)), "") if m else (ident, -1, ident)


def entity_key(entity: Entity):
    return (entity.kind, entity.name, _natural(entity.id))


def new_model(name: str, catalog: MetaCatalog = CATALOG) -> QualityModel:
    return QualityModel(name, catalog)
