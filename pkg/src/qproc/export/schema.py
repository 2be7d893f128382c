"""Relational schema derived from the meta-model, and SQL-92 DDL.

Mapping rules:

* every entity kind gets its own table holding ID, NAME and the kind's
  registered attributes, inherited ones included (concrete-table
  inheritance, so one entity is exactly one row);
* a relation whose target multiplicity is at most one becomes
  foreign-key columns on the tables of its source kinds;
* any other relation becomes a junction table ``REL_<RELATION>``.

A relation endpoint that accepts a kind hierarchy gets one nullable
column per concrete kind of that hierarchy, so every foreign key points
at exactly one table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from qproc.catalog import MetaCatalog
from qproc.diagnostics import Diagnostic

SQL_TYPES = {"text": "VARCHAR(255)", "numeric": "DOUBLE PRECISION", "boolean": "SMALLINT"}
HEADER = "-- qproc relational schema (SQL-92)\n"


def upper_snake(name: str) -> str:
    """``QualityCharacteristic`` -> ``QUALITY_CHARACTERISTIC``."""
    return re.sub(r"(?<=[a-z0-9])(?=[A-Z])", "_", name).upper()


@dataclass(frozen=True)
class Column:
    name: str
    type: str  # text | numeric | boolean
    nullable: bool = True


@dataclass(frozen=True)
class ForeignKey:
    column: str
    table: str
    ref_column: str = "ID"


@dataclass
class Table:
    name: str
    columns: list[Column] = field(default_factory=list)
    primary_key: str = "ID"
    foreign_keys: list[ForeignKey] = field(default_factory=list)
    kind: str | None = None  # entity kind stored here
    relation: str | None = None  # relation stored here (junction tables)

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)


@dataclass
class RelationalSchema:
    tables: list[Table] = field(default_factory=list)
    # relation name -> {source kind: {target kind: column}} for foreign-key relations
    fk_columns: dict[str, dict[str, dict[str, str]]] = field(default_factory=dict)
    # relation name -> ({source kind: column}, {target kind: column}) for junction tables
    junction_columns: dict[str, tuple[dict[str, str], dict[str, str]]] = field(default_factory=dict)

    @property
    def junction_tables(self) -> list[Table]:
        return [t for t in self.tables if t.relation is not None]

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def table_for_kind(self, kind: str) -> Table:
        for t in self.tables:
            if t.kind == kind:
                return t
        raise KeyError(kind)

    def junction_for(self, relation: str) -> Table | None:
        for t in self.tables:
            if t.relation == relation:
                return t
        return None


def _concrete(catalog: MetaCatalog, kinds) -> list[str]:
    out: list[str] = []
    for k in kinds:
        for d in catalog.descendants(k):
            if d not in out:
                out.append(d)
    return out


def derive_schema(catalog: MetaCatalog) -> RelationalSchema:
    schema = RelationalSchema()
    by_kind: dict[str, Table] = {}
    for kind in catalog.kinds:
        cols = [Column("ID", "text", nullable=False), Column("NAME", "text", nullable=False)]
        cols += [Column(upper_snake(a), t) for a, t in catalog.attribute_types(kind).items()]
        table = Table(upper_snake(kind), cols, kind=kind)
        by_kind[kind] = table
        schema.tables.append(table)

    for rel in catalog.relations.values():
        sources = _concrete(catalog, rel.sources)
        targets = _concrete(catalog, rel.targets)
        if rel.target_mult.upper is not None and rel.target_mult.upper <= 1:
            placement: dict[str, dict[str, str]] = {}
            for src in sources:
                table = by_kind[src]
                taken = {c.name for c in table.columns}
                placement[src] = {}
                for tgt in targets:
                    col = f"{upper_snake(tgt)}_ID"
                    if col in taken or tgt == src:
                        col = f"{upper_snake(rel.name)}_{col}"
                    taken.add(col)
                    table.columns.append(Column(col, "text"))
                    table.foreign_keys.append(ForeignKey(col, upper_snake(tgt)))
                    placement[src][tgt] = col
            schema.fk_columns[rel.name] = placement
        else:
            overlap = set(sources) & set(targets)
            cols = [Column("ID", "text", nullable=False)]
            fks = []
            ends: tuple[dict[str, str], dict[str, str]] = ({}, {})
            for prefix, kinds, end in (("SOURCE_", sources, ends[0]), ("TARGET_", targets, ends[1])):
                for k in kinds:
                    col = f"{prefix if overlap else ''}{upper_snake(k)}_ID"
                    cols.append(Column(col, "text"))
                    fks.append(ForeignKey(col, upper_snake(k)))
                    end[k] = col
            schema.junction_columns[rel.name] = ends
            schema.tables.append(
                Table(f"REL_{upper_snake(rel.name)}", cols, foreign_keys=fks, relation=rel.name)
            )
    return schema


def _on_cycle(start: str, deps: dict[str, list[str]], done: list[str]) -> bool:
    stack = [d for d in deps[start] if d not in done]
    seen: set[str] = set()
    while stack:
        node = stack.pop()
        if node == start:
            return True
        if node not in seen:
            seen.add(node)
            stack.extend(d for d in deps[node] if d not in done)
    return False


def ordered_tables(schema: RelationalSchema) -> tuple[list[Table], set[tuple[str, str]]]:
    """Tables with referenced ones first; returns the foreign keys left out by cycles."""
    deps = {
        t.name: [fk.table for fk in t.foreign_keys if fk.table != t.name]
        for t in schema.tables
    }
    done: list[str] = []
    deferred: set[tuple[str, str]] = set()
    remaining = [t.name for t in schema.tables]
    while remaining:
        ready = next((n for n in remaining if all(d in done for d in deps[n])), None)
        if ready is None:
            # break the cycle at the first remaining table that lies on one
            ready = next(n for n in remaining if _on_cycle(n, deps, done))
            deferred.update((ready, d) for d in deps[ready] if d not in done)
        done.append(ready)
        remaining.remove(ready)
    return [schema.table(n) for n in done], deferred


def quote_identifier(identifier: str) -> str:
    return f'"{identifier}"'


def emit_ddl(schema: RelationalSchema, diagnostics: list | None = None) -> str:
    """CREATE TABLE script in dependency order, byte-deterministic.

    Identifiers are delimited so that names such as ACTION or VALUE never
    clash with reserved words.  Foreign keys that would close a cycle are
    written as comments after the tables and reported as DDL-001.
    """
    tables, deferred = ordered_tables(schema)
    parts = [HEADER]
    for table in tables:
        lines = []
        for col in table.columns:
            null = " NOT NULL" if not col.nullable or col.name == table.primary_key else ""
            lines.append(f"  {quote_identifier(col.name)} {SQL_TYPES[col.type]}{null}")
        lines.append(f"  PRIMARY KEY ({quote_identifier(table.primary_key)})")
        for fk in table.foreign_keys:
            if (table.name, fk.table) in deferred:
                continue
            lines.append(
                f"  FOREIGN KEY ({quote_identifier(fk.column)}) "
                f"REFERENCES {quote_identifier(fk.table)} ({quote_identifier(fk.ref_column)})"
            )
        parts.append(f"\nCREATE TABLE {quote_identifier(table.name)} (\n" + ",\n".join(lines) + "\n);\n")
    if deferred:
        parts.append("\n-- deferred foreign keys (cycle among tables):\n")
        for table in tables:
            for fk in table.foreign_keys:
                if (table.name, fk.table) in deferred:
                    parts.append(
                        f"-- ALTER TABLE {quote_identifier(table.name)} ADD FOREIGN KEY "
                        f"({quote_identifier(fk.column)}) REFERENCES {quote_identifier(fk.table)} "
                        f"({quote_identifier(fk.ref_column)});\n"
                    )
                    if diagnostics is not None:
                        diagnostics.append(Diagnostic.of(
                            "DDL-001",
                            f"foreign key {table.name}.{fk.column} -> {fk.table} closes a "
                            "cycle; emitted as a comment",
                        ))
    return "".join(parts)
