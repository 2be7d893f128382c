"""The fixed meta-model: entity kinds, relation kinds and multiplicities.

Every quality model is an instance of :data:`CATALOG`.  Kinds form a
subtype forest; a relation accepting kind ``K`` also accepts every
descendant of ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from qproc.errors import UnknownKind, UnknownRelation


@dataclass(frozen=True)
class Multiplicity:
    lower: int = 0
    upper: int | None = None  # None is unbounded

    def admits(self, count: int) -> bool:
        return count >= self.lower and (self.upper is None or count <= self.upper)

    def __str__(self) -> str:
        upper = "*" if self.upper is None else str(self.upper)
        return str(self.lower) if upper == str(self.lower) else f"{self.lower}..{upper}"


MANY = Multiplicity(0, None)
ONE_OR_MORE = Multiplicity(1, None)
EXACTLY_ONE = Multiplicity(1, 1)
AT_MOST_ONE = Multiplicity(0, 1)


@dataclass(frozen=True)
class EntityKind:
    name: str
    parent: str | None = None


@dataclass(frozen=True)
class RelationKind:
    """A named, directed relation between kinds.

    ``target_mult`` bounds how many targets one source entity links to;
    ``source_mult`` bounds how many sources point at one target entity.
    """

    name: str
    sources: tuple[str, ...]
    targets: tuple[str, ...]
    source_mult: Multiplicity = MANY
    target_mult: Multiplicity = MANY
    acyclic: bool = False


@dataclass
class MetaCatalog:
    kinds: dict[str, EntityKind] = field(default_factory=dict)
    relations: dict[str, RelationKind] = field(default_factory=dict)
    # kind -> {attribute key: "text" | "numeric" | "boolean"}
    attributes: dict[str, dict[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        for kind in self.kinds.values():
            if kind.parent is not None and kind.parent not in self.kinds:
                raise UnknownKind(f"{kind.name}: parent {kind.parent!r} not in catalog")
        for kind in self.kinds:
            self._check_acyclic(kind)
        for rel in self.relations.values():
            for k in rel.sources + rel.targets:
                if k not in self.kinds:
                    raise UnknownKind(f"relation {rel.name}: kind {k!r} not in catalog")

    def _check_acyclic(self, kind: str) -> None:
        seen = set()
        while kind is not None:
            if kind in seen:
                raise ValueError(f"subtype cycle through {kind}")
            seen.add(kind)
            kind = self.kinds[kind].parent

    def kind(self, name: str) -> EntityKind:
        try:
            return self.kinds[name]
        except KeyError:
            raise UnknownKind(f"unknown entity kind {name!r}") from None

    def relation(self, name: str) -> RelationKind:
        try:
            return self.relations[name]
        except KeyError:
            raise UnknownRelation(f"unknown relation {name!r}") from None

    def ancestors(self, name: str) -> list[str]:
        """``name`` followed by its supertypes, nearest first."""
        chain = []
        kind: str | None = self.kind(name).name
        while kind is not None:
            chain.append(kind)
            kind = self.kinds[kind].parent
        return chain

    def root(self, name: str) -> str:
        return self.ancestors(name)[-1]

    def is_a(self, name: str, ancestor: str) -> bool:
        return ancestor in self.ancestors(name)

    def conforms(self, name: str, accepted: Iterable[str]) -> bool:
        chain = self.ancestors(name)
        return any(a in chain for a in accepted)

    def children(self, name: str) -> list[str]:
        return [k.name for k in self.kinds.values() if k.parent == name]

    def descendants(self, name: str) -> list[str]:
        """``name`` and every kind below it, in catalog order."""
        self.kind(name)
        return [k for k in self.kinds if self.is_a(k, name)]

    def attribute_types(self, name: str) -> dict[str, str]:
        """Registered attributes of ``name``, inherited ones included."""
        merged: dict[str, str] = {}
        for kind in reversed(self.ancestors(name)):
            merged.update(self.attributes.get(kind, {}))
        return merged

    def subset(self, kinds: Iterable[str], relations: Iterable[str] = ()) -> "MetaCatalog":
        """A smaller catalog; parents outside ``kinds`` are cut off."""
        keep = list(kinds)
        rels = {}
        for name in relations:
            rel = self.relation(name)
            rel = RelationKind(
                rel.name,
                tuple(k for k in rel.sources if k in keep),
                tuple(k for k in rel.targets if k in keep),
                rel.source_mult,
                rel.target_mult,
                rel.acyclic,
            )
            if not rel.sources or not rel.targets:
                raise UnknownKind(f"relation {name} has no endpoint kinds left in the subset")
            rels[name] = rel
        return MetaCatalog(
            kinds={
                k: EntityKind(k, self.kinds[k].parent if self.kinds[k].parent in keep else None)
                for k in keep
            },
            relations=rels,
            attributes={k: dict(v) for k, v in self.attributes.items() if k in keep},
        )


def _kinds(parents: Mapping[str, str | None]) -> dict[str, EntityKind]:
    return {name: EntityKind(name, parent) for name, parent in parents.items()}


CHECK_KINDS = ("Observation", "Measurement", "Test")
EVIDENCE_KINDS = CHECK_KINDS + ("Control", "Validation", "Checking")
SYSTEM_REQUIREMENTS = ("ShapeRequirement", "SpaceRequirement", "TimeRequirement")

CATALOG = MetaCatalog(
    kinds=_kinds(
        {
            "Process": None,
            "Product": None,
            "Customer": None,
            "Supplier": None,
            "Requirement": None,
            "ProductRequirement": "Requirement",
            "ProcessRequirement": "Requirement",
            "ShapeRequirement": "ProductRequirement",
            "SpaceRequirement": "ProductRequirement",
            "TimeRequirement": "ProductRequirement",
            "QualityCharacteristic": None,
            "Observation": None,
            "Measurement": None,
            "Test": None,
            "TangibleProof": None,
            "Control": None,
            "Validation": None,
            "Checking": None,
            "Conformity": None,
            "Nonconformity": None,
            "Cause": None,
            "MachineCause": "Cause",
            "MethodCause": "Cause",
            "MaterialCause": "Cause",
            "ManpowerCause": "Cause",
            "EnvironmentCause": "Cause",
            "Action": None,
            "CorrectiveAction": "Action",
            "PreventiveAction": "Action",
            "ScheduledPreventiveAction": "PreventiveAction",
            "ConditionalPreventiveAction": "PreventiveAction",
            "PredictivePreventiveAction": "PreventiveAction",
        }
    ),
    relations={
        r.name: r
        for r in (
            RelationKind(
                "results_from",
                ("Product",),
                ("Process",),
                source_mult=ONE_OR_MORE,
                target_mult=EXACTLY_ONE,
            ),
            RelationKind("consumes", ("Process",), ("Product",)),
            RelationKind("has_requirement", ("Product", "Process"), ("Requirement",)),
            RelationKind(
                "specifies", ("Requirement",), ("QualityCharacteristic",), target_mult=ONE_OR_MORE
            ),
            RelationKind("checked_by", ("QualityCharacteristic",), CHECK_KINDS),
            RelationKind("attached_proof", EVIDENCE_KINDS, ("TangibleProof",)),
            RelationKind("detects", EVIDENCE_KINDS, ("Conformity", "Nonconformity")),
            RelationKind(
                "concerns",
                ("Conformity", "Nonconformity"),
                ("Product", "Process"),
                target_mult=AT_MOST_ONE,
            ),
            RelationKind("caused_by", ("Nonconformity",), ("Cause",)),
            RelationKind(
                "treats", ("Action",), ("Nonconformity", "Cause"), target_mult=ONE_OR_MORE
            ),
            RelationKind("supplies", ("Supplier",), ("Product",)),
            RelationKind("receives", ("Customer",), ("Product",)),
            RelationKind(
                "composed_of", ("Process",), ("Process",), source_mult=AT_MOST_ONE, acyclic=True
            ),
        )
    },
    attributes={
        "Process": {"description": "text"},
        "Product": {"description": "text"},
        "Requirement": {"description": "text"},
        "QualityCharacteristic": {
            "value": "numeric",
            "unit": "text",
            "lower_limit": "numeric",
            "upper_limit": "numeric",
        },
        "Observation": {"method": "text"},
        "Measurement": {"method": "text", "instrument": "text"},
        "Test": {"method": "text"},
        "TangibleProof": {"reference": "text"},
        "Nonconformity": {"description": "text", "critical": "boolean"},
        "Cause": {"description": "text"},
        "Action": {"description": "text", "done": "boolean"},
        "ScheduledPreventiveAction": {"interval": "numeric"},
    },
)
