from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qproc import new_model, parse, parse_file
from qproc.analysis import (
    cause_indicator,
    conformity_indicator,
    format_pct,
    indicator_report,
    resolve_scope,
    run_guide,
    validate,
)
from qproc.diagnostics import Severity, rule_catalog
from qproc.errors import UnknownEntity

from modelgen import random_model
from oracles import naive_indicators

FIXTURES = Path(__file__).parent / "fixtures"
LATHE = Path(__file__).parents[1] / "src" / "qproc" / "fixtures" / "lathe.qml"


@pytest.fixture
def lathe():
    return parse_file(LATHE).model


def by_name(model, kind, name):
    (eid,) = model.lookup(kind, name)
    return eid


# -- rule catalog -----------------------------------------------------------


def test_rule_catalog_is_consistent():
    rules = rule_catalog()
    assert rules["R-MULT-001"].severity is Severity.ERROR
    assert rules["R-SYS-001"].severity is Severity.ERROR
    assert rules["NO-CHAR"].severity is Severity.WARNING
    assert rules["NO-NC"].severity is Severity.INFO
    for code, rule in rules.items():
        assert rule.code == code
        if code.startswith("G") and code != "G0-001":
            assert rule.step == int(code[1])


# -- validate ---------------------------------------------------------------


def test_lathe_is_clean(lathe):
    assert validate(lathe) == []


def test_empty_model_has_no_violations():
    assert validate(new_model("E")) == []


def test_shape_only_triggers_r_sys():
    m = parse_file(FIXTURES / "shape_only.qml").model
    found = validate(m)
    assert [d.code for d in found] == ["R-SYS-001"]
    assert found[0].subject == by_name(m, "Process", "Stamp")


def test_two_results_from_gives_one_r_mult(tmp_path):
    m = parse_file(FIXTURES / "bad_mult.qml").model
    found = validate(m)
    assert [d.code for d in found] == ["R-MULT-001"]
    assert found[0].subject == by_name(m, "Product", "DrilledPlate")
    assert "DrilledPlate" in found[0].message


def test_orphans():
    m = parse("requirement R\nnonconformity N\n").model
    codes = sorted(d.code for d in validate(m))
    assert codes == ["R-ORPH-001", "R-ORPH-002"]


def test_lower_bounds():
    m = new_model("M")
    m.add_entity("Product", "Loose")  # no results_from and not supplied
    m.add_entity("CorrectiveAction", "Idle")  # treats nothing
    found = validate(m)
    assert [d.code for d in found] == ["R-MULT-002", "R-MULT-002"]


def test_supplied_products_need_no_process():
    m = parse("supplier S supplies Bar\nproduct Bar\n").model
    assert validate(m) == []


def test_composite_process_needs_no_direct_output():
    text = """
    process Line { part Cut }
    process Cut { output product Blank }
    requirement shape A on Blank { characteristic W = 1 }
    requirement time B on Blank { characteristic T = 2 }
    """
    m = parse(text).model
    assert validate(m) == []


def test_r_sys_counts_subtypes_of_requirement_only():
    text = """
    process P { output product X }
    requirement product Generic on X { characteristic C = 1 }
    requirement shape S on X { characteristic D = 1 }
    """
    assert [d.code for d in validate(parse(text).model)] == ["R-SYS-001"]


def test_attribute_type_warning():
    m = parse('characteristic C = "wide"\n').model
    found = validate(m)
    assert [d.code for d in found] == ["R-ATTR-001"]
    assert found[0].severity is Severity.WARNING


def test_validate_order_is_by_code_then_subject():
    m = parse("requirement B\nrequirement A\nnonconformity N\nproduct P\n").model
    found = validate(m)
    keys = [(d.code, m.entities[d.subject].name) for d in found]
    assert keys == sorted(keys)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_validate_is_pure(seed):
    m = random_model(seed)
    assert validate(m) == validate(m)
    assert run_guide(m).to_dict() == run_guide(m).to_dict()


# -- guide ------------------------------------------------------------------


def test_lathe_guide_complete(lathe):
    report = run_guide(lathe)
    assert len(report.steps) == 7
    assert all(s.complete and not s.pending for s in report.steps)


def test_bare_process_has_four_pending_context_questions():
    m = parse("process Turning").model
    report = run_guide(m, by_name(m, "Process", "Turning"))
    step1 = report.steps[0]
    assert step1.status == "incomplete"
    assert [d.code for d in step1.pending] == ["G1-001", "G1-002", "G1-003", "G1-004"]
    assert all(d.step == 1 for d in step1.pending)


def test_guide_gating_marks_later_steps(lathe):
    lathe.remove_link(lathe.outgoing(by_name(lathe, "Customer", "Assembly"), "receives")[0].id)
    report = run_guide(lathe)
    assert report.statuses() == (False,) * 7
    assert [d.code for d in report.steps[3].pending] == ["G0-001"]


def test_guide_scope_must_be_process(lathe):
    with pytest.raises(UnknownEntity):
        run_guide(lathe, by_name(lathe, "Product", "Shaft"))
    with pytest.raises(UnknownEntity):
        run_guide(lathe, "nope")


def test_guide_missing_proof_names_the_check(lathe):
    gauge = by_name(lathe, "Measurement", "DiameterGauge")
    lathe.remove_link(lathe.outgoing(gauge, "attached_proof")[0].id)
    step4 = run_guide(lathe).steps[3]
    assert [(d.code, d.subject) for d in step4.pending] == [("G4-001", gauge)]
    assert step4.title


def test_guide_step7_accepts_treated_cause_or_nonconformity(lathe):
    assert run_guide(lathe).steps[6].complete
    action = by_name(lathe, "Action", "ReplaceInsert")
    lathe.remove_entity(action)
    pending = run_guide(lathe).steps[6].pending
    assert [lathe.entities[d.subject].name for d in pending] == ["OversizeDiameter"]


# -- indicators -------------------------------------------------------------


def test_lathe_indicators(lathe):
    r = indicator_report(lathe)
    assert r.conformity_pct == 100 and r.cause_pct == 100
    assert r.unchecked == [] and r.unexplained == []
    assert len(r.checked) == 4 and len(r.explained) == 2


def test_three_of_four_with_proof(lathe):
    probe = by_name(lathe, "Measurement", "RoundnessProbe")
    lathe.remove_link(lathe.outgoing(probe, "attached_proof")[0].id)
    c = conformity_indicator(lathe)
    assert c.pct == 75
    assert [lathe.entities[x].name for x in c.unchecked] == ["Roundness"]


def test_one_of_two_caused(lathe):
    nc = by_name(lathe, "Nonconformity", "ChatterMarks")
    lathe.remove_link(lathe.outgoing(nc, "caused_by")[0].id)
    c = cause_indicator(lathe)
    assert c.pct == 50
    assert c.unexplained == [nc]


def test_empty_model_indicators():
    r = indicator_report(new_model("E"))
    assert r.conformity_pct == 100 and r.cause_pct == 100
    assert sorted(d.code for d in r.diagnostics) == ["NO-CHAR", "NO-NC"]


def test_scoped_indicators(lathe):
    shaft = by_name(lathe, "Product", "Shaft")
    turning = by_name(lathe, "Process", "Turning")
    assert resolve_scope(lathe, shaft).characteristics == resolve_scope(lathe, turning).characteristics
    bar = by_name(lathe, "Product", "Bar")
    r = indicator_report(lathe, bar)
    assert r.conformity_pct == 100
    assert {d.code for d in r.diagnostics} == {"NO-CHAR", "NO-NC"}
    with pytest.raises(UnknownEntity):
        indicator_report(lathe, by_name(lathe, "Customer", "Assembly"))


@pytest.mark.parametrize(
    "value,text",
    [(Fraction(100), "100.0%"), (Fraction(200, 3), "66.7%"), (Fraction(1, 20), "0.1%"),
     (Fraction(0), "0.0%"), (Fraction(100, 3), "33.3%")],
)
def test_format_pct(value, text):
    assert format_pct(value) == text


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 1_000_000))
def test_indicators_match_naive_oracle(seed):
    m = random_model(seed)
    r = indicator_report(m)
    assert (r.conformity_pct, r.cause_pct) == naive_indicators(m)
    assert 0 <= r.conformity_pct <= 100 and 0 <= r.cause_pct <= 100
    assert (r.conformity_pct == 100) == (not r.unchecked)
    assert (r.cause_pct == 100) == (not r.unexplained)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 1_000_000), st.data())
def test_adding_evidence_never_lowers_indicators(seed, data):
    m = random_model(seed)
    before = indicator_report(m)
    chars = [e.id for e in m.of_kind("QualityCharacteristic")]
    ncs = [e.id for e in m.of_kind("Nonconformity")]
    if chars:
        c = data.draw(st.sampled_from(chars))
        check = m.add_entity("Measurement", "FreshCheck")
        proof = m.add_entity("TangibleProof", "FreshProof")
        m.add_link("checked_by", c, check)
        m.add_link("attached_proof", check, proof)
    if ncs:
        n = data.draw(st.sampled_from(ncs))
        m.add_link("caused_by", n, m.add_entity("MethodCause", "FreshCause"))
    after = indicator_report(m)
    assert after.conformity_pct >= before.conformity_pct
    assert after.cause_pct >= before.cause_pct


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 1_000_000))
def test_full_conformity_implies_guide_steps_3_and_4(seed):
    m = random_model(seed)
    for proc in [None] + [p.id for p in m.of_kind("Process")]:
        if conformity_indicator(m, proc).pct == 100:
            steps = run_guide(m, proc).steps
            assert not [d for d in steps[2].pending if d.code != "G0-001"]
            assert not [d for d in steps[3].pending if d.code != "G0-001"]
