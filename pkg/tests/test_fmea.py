from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qproc import parse_file
from qproc.analysis import cause_indicator
from qproc.errors import InvalidScale, UnknownEntity
from qproc.tools import FmeaDocument, FmeaEntry, attach_fmea, compute_rpn, rank_entries, read_fmea

from oracles import signature

DATA = Path(__file__).parents[1] / "src" / "qproc" / "fixtures"

scale = st.integers(1, 10)


@pytest.fixture
def lathe():
    return parse_file(DATA / "lathe.qml").model


@pytest.mark.parametrize("s,o,d,rpn", [(1, 1, 1, 1), (10, 10, 10, 1000), (5, 4, 3, 60)])
def test_rpn_examples(s, o, d, rpn):
    assert compute_rpn(s, o, d) == rpn


@pytest.mark.parametrize("bad", [0, 11, -1, 2.0, True, "3"])
def test_rpn_rejects_out_of_scale(bad):
    with pytest.raises(InvalidScale):
        compute_rpn(bad, 1, 1)
    with pytest.raises(InvalidScale):
        FmeaEntry("m", "e", 1, bad, 1)


@given(scale, scale, scale)
def test_rpn_symmetric(s, o, d):
    assert compute_rpn(s, o, d) == compute_rpn(o, d, s) == compute_rpn(d, s, o) == compute_rpn(s, d, o)


@given(scale, scale, scale)
def test_rpn_strictly_monotone(s, o, d):
    r = compute_rpn(s, o, d)
    if s < 10:
        assert compute_rpn(s + 1, o, d) > r
    if d < 10:
        assert compute_rpn(s, o, d + 1) > r


def entry(mode, s, o, d):
    return FmeaEntry(mode, "effect", s, o, d)


def test_rank_examples():
    doc = FmeaDocument("P", [entry("a", 5, 4, 3), entry("b", 10, 10, 2), entry("c", 5, 3, 4)])
    assert [e.failure_mode for e in rank_entries(doc)] == ["b", "a", "c"]
    assert rank_entries(FmeaDocument("P", [entry("x", 1, 1, 1)]))[0].failure_mode == "x"
    doc = FmeaDocument("P", [entry("low", 5, 4, 3), entry("high", 6, 5, 2)])
    assert [(e.rpn, e.severity) for e in rank_entries(doc)] == [(60, 6), (60, 5)]


@given(st.lists(st.tuples(scale, scale, scale), max_size=20))
def test_rank_is_a_stable_sort(triples):
    doc = FmeaDocument("P", [entry(str(i), *t) for i, t in enumerate(triples)])
    ranked = rank_entries(doc)
    keys = [(-e.rpn, -e.severity, int(e.failure_mode)) for e in ranked]
    assert keys == sorted(keys)


def test_read_fmea_format():
    text = "# comment\nfailure_mode;effect;S;O;D;nonconformity;cause;action\n\nA;B;1;2;3;;;\n"
    doc = read_fmea(text, "P")
    (e,) = doc.entries
    assert (e.rpn, e.nonconformity_ref, e.cause_ref, e.action_ref) == (6, None, None, None)
    with pytest.raises(ValueError):
        read_fmea("A;B;1;2\n", "P")
    with pytest.raises(InvalidScale):
        read_fmea("A;B;x;2;3;;;\n", "P")


def test_attach_links_common_objects(lathe):
    nc = lathe.find("Nonconformity", "ChatterMarks")
    lathe.remove_link(lathe.outgoing(nc, "caused_by")[0].id)
    before = cause_indicator(lathe).pct
    doc = read_fmea((DATA / "lathe.fmea").read_text(), "Turning")
    diags = attach_fmea(lathe, doc)
    assert [d.code for d in diags] == ["FMEA-002"]
    feed = lathe.lookup("Cause", "ExcessiveFeed")[0]
    assert feed in lathe.targets(nc, "caused_by")
    monitor = lathe.lookup("Action", "MonitorSpindle")[0]
    assert feed in lathe.targets(monitor, "treats")
    assert cause_indicator(lathe).pct >= before


def test_attach_unresolved_refs_warn(lathe):
    doc = FmeaDocument("Turning", [FmeaEntry("m", "e", 2, 2, 2, "Ghost", "ToolWear", None)])
    diags = attach_fmea(lathe, doc)
    assert [d.code for d in diags] == ["FMEA-001"]
    assert "Ghost" in diags[0].message


def test_attach_creates_owner_for_new_nonconformity(lathe):
    lathe.add_entity("Nonconformity", "Crack")
    doc = FmeaDocument("Turning", [FmeaEntry("crack", "e", 9, 1, 5, "Crack", "ToolWear", None)])
    attach_fmea(lathe, doc)
    crack = lathe.find("Nonconformity", "Crack")
    assert lathe.targets(crack, "concerns") == [lathe.find("Process", "Turning")]


def test_attach_requires_process(lathe):
    with pytest.raises(UnknownEntity):
        attach_fmea(lathe, FmeaDocument("Nowhere", []))
    with pytest.raises(UnknownEntity):
        attach_fmea(lathe, FmeaDocument("Shaft", []))


def test_attach_is_idempotent_and_never_deletes(lathe):
    doc = read_fmea((DATA / "lathe.fmea").read_text(), "Turning")
    entities, links = set(lathe.entities), set(lathe.links)
    attach_fmea(lathe, doc)
    once = signature(lathe)
    assert entities <= set(lathe.entities) and links <= set(lathe.links)
    attach_fmea(lathe, doc)
    assert signature(lathe) == once
