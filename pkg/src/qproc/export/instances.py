"""Model instances as an SQL INSERT script matching :func:`derive_schema`."""

from __future__ import annotations

from qproc.analysis.validate import validate
from qproc.diagnostics import has_errors
from qproc.errors import RefusedDirtyModel
from qproc.export.schema import RelationalSchema, ordered_tables, quote_identifier, upper_snake
from qproc.model import QualityModel, entity_key


def sql_literal(value, sql_type: str) -> str:
    """SQL literal for ``value`` in a column of ``sql_type``; NULL on mismatch."""
    if value is None:
        return "NULL"
    if sql_type == "boolean":
        return ("1" if value else "0") if isinstance(value, bool) else "NULL"
    if sql_type == "numeric":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return "NULL"
        return repr(value) if isinstance(value, int) else repr(float(value)).upper()
    if not isinstance(value, str):
        return "NULL"
    return "'" + value.replace("'", "''") + "'"


def _insert(table: str, row: dict[str, str]) -> str:
    cols = ", ".join(quote_identifier(c) for c in row)
    vals = ", ".join(row.values())
    return f"INSERT INTO {quote_identifier(table)} ({cols}) VALUES ({vals});\n"


def export_instances(model: QualityModel, schema: RelationalSchema) -> str:
    """One INSERT per entity and one per junction-table link.

    Foreign-key columns carry the target of the at-most-one relations.
    Unregistered attributes have no column and are left out; registered
    ones holding a value of the wrong type are written as NULL.
    """
    found = validate(model)
    if has_errors(found):
        raise RefusedDirtyModel(
            f"model {model.name!r} has {sum(d.is_error for d in found)} error diagnostics",
            [d for d in found if d.is_error],
        )
    tables, _ = ordered_tables(schema)
    out: list[str] = []
    for table in tables:
        if table.kind is not None:
            attrs = model.catalog.attribute_types(table.kind)
            columns = {upper_snake(a): a for a in attrs}
            for entity in sorted(
                (e for e in model.entities.values() if e.kind == table.kind), key=entity_key
            ):
                row = {"ID": sql_literal(entity.id, "text"), "NAME": sql_literal(entity.name, "text")}
                for col in table.columns[2:]:
                    key = columns.get(col.name)
                    row[col.name] = sql_literal(entity.attributes.get(key), col.type) if key else "NULL"
                for relation, placement in schema.fk_columns.items():
                    for link in model.outgoing(entity.id, relation):
                        target_kind = model.entities[link.target].kind
                        col = placement.get(entity.kind, {}).get(target_kind)
                        if col is not None:
                            row[col] = sql_literal(link.target, "text")
                out.append(_insert(table.name, row))
        else:
            sources, targets = schema.junction_columns[table.relation]
            links = [l for l in model.links.values() if l.relation == table.relation]
            for link in sorted(links, key=model.link_key):
                row = {c.name: "NULL" for c in table.columns}
                row["ID"] = sql_literal(link.id, "text")
                row[sources[model.entities[link.source].kind]] = sql_literal(link.source, "text")
                row[targets[model.entities[link.target].kind]] = sql_literal(link.target, "text")
                out.append(_insert(table.name, row))
    return "".join(out)
