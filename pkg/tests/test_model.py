from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_reach, ev, step
from porlock.bench import gen_random
from porlock.dsl import parse_system
from porlock.model import (
    TRUE,
    Assign,
    Cmp,
    DisabledTransitionError,
    DomainOverflowError,
    Layout,
    ModelError,
    ProcessDef,
    StateGraph,
    SystemDef,
    TransitionDef,
    VariableDecl,
    enabled,
    fire,
    in_pred,
)
from porlock.semantics import CompiledSystem


def test_enabled_empty_when_no_guard_holds():
    p = ProcessDef("P", (VariableDecl("a", 0, 1, 1, "P"),), (TransitionDef("t", "P", Cmp("a", "==", 0)),))
    assert enabled({"a": 1}, p) == []


def test_fig1_z_plus_enabled_initially(fig1_system):
    m3 = fig1_system.process("M3")
    assert "z+" in enabled({"x": 0, "y": 0, "u": 0, "z": 0}, m3)


def test_fire_z_plus(fig1_system):
    t = fig1_system.transition("z+")
    assert fire(t, {"x": 0, "y": 0, "u": 0, "z": 0}) == {"x": 0, "y": 0, "u": 0, "z": 1}


def test_empty_effect_is_identity():
    t = TransitionDef("t", "P", TRUE, ())
    lab = {"a": 1, "b": 0}
    assert fire(t, lab) == lab


def test_fire_disabled_raises():
    t = TransitionDef("t", "P", Cmp("a", "==", 0), (Assign("a", "set", 1),))
    with pytest.raises(DisabledTransitionError):
        fire(t, {"a": 1})


def test_fire_overflow_names_variable_and_transition():
    decl = VariableDecl("c", 0, 2, 2, "P")
    t = TransitionDef("bump", "P", TRUE, (Assign("c", "inc"),))
    with pytest.raises(DomainOverflowError) as info:
        fire(t, {"c": 2}, {"c": decl})
    assert info.value.variable == "c" and info.value.transition == "bump"


def test_compiled_overflow_raises():
    sysd = parse_system("system s;\nprocess P { var c : 0..1 = 1; trans up : -> c := c + 1; }\n")
    cs = CompiledSystem(sysd)
    with pytest.raises(DomainOverflowError):
        cs.fire(0, cs.initial)


def test_effects_apply_simultaneously():
    t = TransitionDef("t", "P", Cmp("a", "==", 0), (Assign("a", "set", 1), Assign("b", "set", 1)))
    # guard is evaluated on the source, effects see the old values
    assert fire(t, {"a": 0, "b": 0}) == {"a": 1, "b": 1}


def test_in_pred_examples():
    assert in_pred((0, 0, 0), 0, 1)
    assert not in_pred((0, 0, 0), 1, 1)


@given(st.lists(st.integers(0, 9), min_size=1, max_size=6), st.integers(0, 9), st.data())
def test_in_pred_matches_indexing(tup, sid, data):
    i = data.draw(st.integers(0, len(tup) - 1))
    assert in_pred(tuple(tup), sid, i) == (tup[i] == sid)


def test_in_pred_bad_index():
    with pytest.raises(IndexError):
        in_pred((0,), 0, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_compiled_semantics_match_independent_evaluator(seed):
    sysd = parse_system(gen_random(seed, max_processes=2))
    cs = CompiledSystem(sysd)
    brute = brute_reach(sysd)
    by_id = {t.id: t for t in sysd.transitions()}
    for k in brute.states:
        lab = dict(k)
        packed = cs.layout.pack(lab)
        expect = [] if k in brute.failed else sorted(t for t in by_id if ev(by_id[t].guard, lab))
        assert [cs.ids[i] for i in cs.enabled(packed)] == expect
        assert sorted(enabled(lab, sysd)) == sorted(t for t in by_id if ev(by_id[t].guard, lab))
        for i in cs.enabled(packed):
            assert cs.layout.unpack(cs.fire(i, packed)) == step(by_id[cs.ids[i]], lab)


@given(st.lists(st.tuples(st.integers(-3, 0), st.integers(0, 5)), min_size=1, max_size=5), st.data())
def test_layout_roundtrip(bounds, data):
    decls = [VariableDecl(f"v{k}", lo, lo + w, lo) for k, (lo, w) in enumerate(bounds)]
    lay = Layout(decls)
    lab = {d.name: data.draw(st.integers(d.lo, d.hi)) for d in decls}
    assert lay.unpack(lay.pack(lab)) == lab


def test_validate_rejects_bad_initial():
    sysd = SystemDef("s", (VariableDecl("x", 0, 1, 3),), (ProcessDef("P", (), ()),))
    with pytest.raises(ModelError):
        sysd.validate()


def test_validate_rejects_out_of_scope_reference():
    p = ProcessDef("P", (VariableDecl("a", 0, 1, 0, "P"),), ())
    q = ProcessDef("Q", (), (TransitionDef("t", "Q", Cmp("a", "==", 0)),))
    with pytest.raises(ModelError):
        SystemDef("s", (), (p, q)).validate()


def test_state_graph_totality_and_edges(fig1_system):
    cs = CompiledSystem(fig1_system)
    g = StateGraph("composite", cs.layout)
    s0, new = g.add_state(cs.initial)
    assert new and g.add_state(cs.initial) == (s0, False)
    assert set(g.labeling(s0)) == set(cs.layout.names)
    s1, _ = g.add_state(cs.fire(cs.tindex["z+"], cs.initial))
    assert g.add_edge(s0, "z+", s1) and not g.add_edge(s0, "z+", s1)
    g.check_invariants()


def test_local_edges_coherent_with_fire(fig1_system):
    from porlock.cra import build_local_sgs

    for g, proc in zip(build_local_sgs(fig1_system), fig1_system.processes):
        for s, tid, d in g.edges:
            if tid is None:
                continue
            t = fig1_system.transition(tid)
            src = g.labeling(s)
            assert ev(t.guard, src)
            assert step(t, src) == g.labeling(d)
