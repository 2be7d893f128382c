from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qproc import new_model, parse, parse_file, serialize
from qproc.diagnostics import SourceSpan
from qproc.qml.lexer import tokenize

from modelgen import random_model
from oracles import signature

FIXTURES = Path(__file__).parent / "fixtures"
LATHE = Path(__file__).parents[1] / "src" / "qproc" / "fixtures" / "lathe.qml"


def codes(result):
    return [d.code for d in result.diagnostics]


def test_process_block_creates_product_and_link():
    r = parse("process Turning { output product Shaft }")
    assert r.ok and not r.diagnostics
    m = r.model
    assert [(e.kind, e.name) for e in m] == [("Process", "Turning"), ("Product", "Shaft")]
    (link,) = m.links.values()
    assert link.relation == "results_from"
    assert m.entities[link.source].name == "Shaft"


def test_empty_input():
    r = parse("", "empty.qml")
    assert r.ok and r.diagnostics == []
    assert len(r.model) == 0
    assert r.model.name == "empty"


def test_unresolved_reference_keeps_entity():
    r = parse("nonconformity NC1 on Ghost")
    assert r.failed
    assert codes(r) == ["QML-002"]
    assert "unresolved reference" in r.diagnostics[0].message
    assert [e.name for e in r.model] == ["NC1"]
    assert not r.model.links


def test_forward_references_resolve():
    text = """
    cause machine Wear of Scratch
    nonconformity Scratch on Shaft
    process P { output product Shaft }
    """
    r = parse(text)
    assert r.ok, r.diagnostics
    m = r.model
    nc = m.find("Nonconformity", "Scratch")
    assert [m.entities[c].name for c in m.targets(nc, "caused_by")] == ["Wear"]
    assert m.entities[m.targets(nc, "concerns")[0]].kind == "Product"


def test_lexer_positions_are_one_based():
    diags = []
    toks = tokenize("model X\n  process P", "f", diags)
    assert [(t.text, t.line, t.column) for t in toks[:4]] == [
        ("model", 1, 1), ("X", 1, 7), ("process", 2, 3), ("P", 2, 11)
    ]
    assert toks[2].first_on_line and not toks[3].first_on_line


def test_lexer_reports_bad_characters_and_unterminated_strings():
    r = parse('process P @\nproduct "open')
    assert codes(r).count("QML-001") >= 2


def test_recovery_continues_after_errors():
    r = parse_file(FIXTURES / "malformed.qml")
    assert r.failed
    lines = sorted(d.subject.line for d in r.diagnostics)
    assert lines == [6, 10, 12]
    # declarations after the broken ones are still built
    assert r.model.find("MachineCause", "ToolWear") is not None


def test_missing_brace_is_reported_at_next_declaration():
    r = parse("process P {\n  output product X\ncustomer C receives X\n")
    assert codes(r) == ["QML-001"]
    assert "missing '}'" in r.diagnostics[0].message
    assert r.model.find("Customer", "C") is not None
    assert r.model.targets(r.model.find("Customer", "C"), "receives")


def test_duplicate_declaration():
    r = parse("process P\nprocess P")
    assert codes(r) == ["QML-003"]
    assert r.diagnostics[0].subject.line == 2


def test_kind_mismatch_reference():
    r = parse("customer C receives Turning\nprocess Turning")
    assert codes(r) == ["QML-004"]


def test_decomposition_cycle_is_a_diagnostic():
    r = parse("process A { part B }\nprocess B { part A }")
    assert codes(r) == ["QML-005"]


def test_ambiguous_reference_and_qualifier():
    text = "process X\nproduct X\nnonconformity N on X\nconformity C on process X\n"
    r = parse(text)
    assert codes(r) == ["QML-006"]
    m = r.model
    c = m.find("Conformity", "C")
    assert m.entities[m.targets(c, "concerns")[0]].kind == "Process"


def test_conflicting_implicit_values_warn():
    text = "product P\nrequirement shape R on product P { characteristic D = 1 }\ncharacteristic D = 2\n"
    r = parse(text)
    assert "QML-007" in codes(r)


def test_requirement_and_check_kinds():
    text = """
    process P { output product S }
    requirement shape RS on S { characteristic C1 = 2.5 [unit = "mm"] }
    requirement process RP on P
    requirement RG on S
    test T checks C1 proof Rec
    action scheduled Oil [interval = 30] treats Wear
    cause environment Wear
    """
    r = parse(text)
    kinds = {e.name: e.kind for e in r.model}
    assert kinds["RS"] == "ShapeRequirement"
    assert kinds["RP"] == "ProcessRequirement"
    assert kinds["RG"] == "Requirement"
    assert kinds["Rec"] == "TangibleProof"
    assert kinds["Oil"] == "ScheduledPreventiveAction"
    assert kinds["Wear"] == "EnvironmentCause"
    c1 = r.model.find("QualityCharacteristic", "C1")
    assert r.model.entities[c1].attributes == {"value": 2.5, "unit": "mm"}
    assert r.model.entities[r.model.find("ScheduledPreventiveAction", "Oil")].attributes == {
        "interval": 30
    }


def test_proof_on_next_line_is_a_new_declaration():
    r = parse("measurement M\nproof P [reference = \"x\"]\n")
    assert r.ok
    assert not r.model.links
    assert r.model.entities[r.model.find("TangibleProof", "P")].attributes == {"reference": "x"}


def test_keyword_names_must_be_quoted():
    assert parse("process process").failed
    r = parse('process "process" { output product "two words" }')
    assert r.ok
    assert r.model.find("Product", "two words")


def test_serialize_empty_model():
    assert serialize(new_model("X")) == "model X\n"


def test_lathe_round_trip_and_idempotence():
    m = parse_file(LATHE).model
    text = serialize(m)
    again = parse(text)
    assert again.ok
    assert signature(again.model) == signature(m)
    assert serialize(again.model) == text


def test_parse_is_deterministic():
    text = LATHE.read_text()
    a, b = parse(text, "x.qml"), parse(text, "x.qml")
    assert a.diagnostics == b.diagnostics
    assert serialize(a.model) == serialize(b.model)
    assert a.spans == b.spans


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_round_trip_property(seed):
    m = random_model(seed)
    text = serialize(m)
    r = parse(text)
    assert r.ok, [str(d) for d in r.diagnostics]
    assert signature(r.model) == signature(m)
    assert serialize(r.model) == text


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(list("{}[]=,\"#\n Ab1.-@") + ["process ", "requirement ", "on ",
                                                                "product ", "shape "]),
                max_size=40))
def test_diagnostic_spans_lie_inside_the_text(pieces):
    text = "".join(pieces)
    r = parse(text, "f.qml")
    lines = text.split("\n")
    for d in r.diagnostics:
        assert isinstance(d.subject, SourceSpan)
        assert 1 <= d.subject.line <= len(lines)
        assert 1 <= d.subject.column <= len(lines[d.subject.line - 1]) + 1
