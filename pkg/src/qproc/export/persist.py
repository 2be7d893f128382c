"""Save and load models as a versioned JSON document."""

from __future__ import annotations

import json
import os

from qproc.errors import PersistenceError, QprocError
from qproc.model import QualityModel, entity_key

FORMAT_VERSION = "qproc/1"


def to_document(model: QualityModel) -> dict:
    entities = sorted(model.entities.values(), key=entity_key)
    links = sorted(model.links.values(), key=model.link_key)
    return {
        "format_version": FORMAT_VERSION,
        "name": model.name,
        "entities": [
            {"id": e.id, "kind": e.kind, "name": e.name, "attributes": dict(e.attributes)}
            for e in entities
        ],
        "links": [
            {"id": l.id, "relation": l.relation, "source": l.source, "target": l.target}
            for l in links
        ],
    }


def dumps(model: QualityModel) -> str:
    return json.dumps(to_document(model), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save(model: QualityModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(model))


def _field(record: dict, key: str, where: str, types=str):
    if not isinstance(record, dict):
        raise PersistenceError("expected an object", where)
    if key not in record:
        raise PersistenceError(f"missing key {key!r}", where)
    value = record[key]
    if not isinstance(value, types) or isinstance(value, bool) and types is not bool:
        raise PersistenceError(f"{key!r} has the wrong type", f"{where}.{key}")
    return value


def from_document(doc) -> QualityModel:
    if not isinstance(doc, dict):
        raise PersistenceError("top level must be an object", "$")
    version = _field(doc, "format_version", "$")
    if version != FORMAT_VERSION:
        raise PersistenceError(f"unsupported format {version!r}", "$.format_version")
    try:
        model = QualityModel(_field(doc, "name", "$"))
    except QprocError as exc:
        raise PersistenceError(str(exc), "$.name") from None
    for i, rec in enumerate(_field(doc, "entities", "$", list)):
        where = f"$.entities[{i}]"
        attrs = rec.get("attributes", {}) if isinstance(rec, dict) else {}
        if not isinstance(attrs, dict):
            raise PersistenceError("'attributes' must be an object", f"{where}.attributes")
        try:
            model.add_entity(
                _field(rec, "kind", where), _field(rec, "name", where), attrs,
                id=_field(rec, "id", where),
            )
        except QprocError as exc:
            if isinstance(exc, PersistenceError):
                raise
            raise PersistenceError(str(exc), where) from None
    for i, rec in enumerate(_field(doc, "links", "$", list)):
        where = f"$.links[{i}]"
        try:
            model.add_link(
                _field(rec, "relation", where), _field(rec, "source", where),
                _field(rec, "target", where), id=_field(rec, "id", where),
            )
        except QprocError as exc:
            if isinstance(exc, PersistenceError):
                raise
            raise PersistenceError(str(exc), where) from None
    return model


def loads(text: str) -> QualityModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PersistenceError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return from_document(doc)


def load(path: str | os.PathLike) -> QualityModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
