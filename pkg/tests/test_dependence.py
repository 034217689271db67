from __future__ import annotations

import random

import pytest

from conftest import brute_reach, ev, exact_dependence, step
from porlock.bench import fig1, gen_random
from porlock.cra import build_local_sgs
from porlock.dependence import build_conditional_deps, build_oracle, extract_dependence, visible_transitions
from porlock.dsl import parse_system
from porlock.reachability import explore_full
from porlock.semantics import CompiledSystem


@pytest.mark.parametrize("seed", range(200))
def test_extracted_dependence_contains_exact(seed):
    sysd = parse_system(gen_random(seed))
    oracle = build_oracle(sysd)
    exact = exact_dependence(sysd, brute_reach(sysd))
    assert exact <= oracle.pairs


@pytest.mark.parametrize("seed", range(60))
def test_independent_pairs_commute_everywhere(seed):
    sysd = parse_system(gen_random(seed))
    oracle = build_oracle(sysd)
    brute = brute_reach(sysd)
    by_id = {t.id: t for t in sysd.transitions()}
    for k in brute.states:
        en = brute.enabled(sysd, k)
        lab = dict(k)
        for i, a in enumerate(en):
            for b in en[i + 1:]:
                if oracle.dependent(a, b):
                    continue
                ta, tb = by_id[a], by_id[b]
                assert ev(tb.guard, step(ta, lab)) and ev(ta.guard, step(tb, lab))
                assert step(tb, step(ta, lab)) == step(ta, step(tb, lab))


@pytest.mark.parametrize("seed", range(40))
def test_symmetric_and_irreflexive(seed):
    oracle = build_oracle(parse_system(gen_random(seed)))
    for p in oracle.pairs:
        a, b = sorted(p)
        assert a != b
        assert oracle.dependent(a, b) and oracle.dependent(b, a)


def test_disjoint_scopes_are_independent():
    sysd = parse_system(
        "system s;\nprocess P { var a : 0..1 = 0; trans a+; trans a-; }\nprocess Q { var b : 0..1 = 0; trans b+; trans b-; }\n"
    )
    assert build_oracle(sysd).pairs == set()


def test_disabling_makes_dependent():
    sysd = parse_system(
        "system s;\nshared x : 0..1 = 0;\n"
        "process P { trans x+; }\n"
        "process Q { var b : 0..1 = 0; trans go : guard x == 0 && b == 0 -> b := 1; }\n"
    )
    assert build_oracle(sysd).dependent("x+", "go")


def test_fig1_has_no_dependences():
    oracle = build_oracle(parse_system(fig1()))
    assert oracle.pairs == set() and oracle.visible == set()


CHAIN = """\
system chain;
process P {
  var c : 0..2 = 0, f : 0..1 = 0;
  trans step : guard c < 2 -> c := c + 1;
  trans t2 : guard f == 0 -> f := 1;
  trans t3 : guard c == 2 && f == 0 -> c := 0;
}
"""


def test_conditional_set_on_chain():
    sysd = parse_system(CHAIN)
    oracle = build_oracle(sysd)
    assert oracle.pairs == {frozenset(("t2", "t3"))}
    (g,) = oracle.graphs
    s0, s1, s2 = (g.find({"c": c, "f": 0}) for c in range(3))
    for s in (s0, s1, s2):
        assert oracle.dc[(0, s)]["t2"] == {"t3"}
    assert oracle.dc[(0, s2)]["t3"] == {"t2"}
    assert "t3" not in oracle.dc.get((0, s0), {})
    # states with f == 1 disable t2: the backward walk stops there
    for c in range(3):
        assert (0, g.find({"c": c, "f": 1})) not in oracle.dc


def test_dump_format():
    oracle = build_oracle(parse_system(CHAIN))
    text = oracle.dump(["P"])
    lines = text.splitlines()
    assert lines[0] == "dep t2 t3"
    assert lines[1:] == sorted(lines[1:])
    assert all(line.startswith("depc P:") for line in lines[1:])
    assert text.endswith("\n")


def _dc_oracle(sysd, oracle):
    """Check D_C has no false negatives against the full global graph."""
    cs = CompiledSystem(sysd)
    g, _ = explore_full(cs)
    preds = g.predecessors()
    owner = {t.id: sysd.process_index(t.owner) for t in sysd.transitions()}
    en = {i: {cs.ids[k] for k in cs.enabled(g.labelings[i])} for i in range(g.num_states)}
    for pair in oracle.pairs:
        for t, u in (tuple(pair), tuple(pair)[::-1]):
            seeds = [s for s in range(g.num_states) if t in en[s] and u in en[s]]
            reached = set(seeds)
            work = list(seeds)
            while work:
                s = work.pop()
                for p, _ in preds[s]:
                    if p not in reached and t in en[p]:
                        reached.add(p)
                        work.append(p)
            i = owner[t]
            proc = cs.procs[i]
            for s in reached:
                sid = oracle.graphs[i].index[proc.project(g.labelings[s])]
                assert u in oracle.dc[(i, sid)][t], (t, u, s)


@pytest.mark.parametrize("seed", range(120))
def test_conditional_set_has_no_false_negatives(seed):
    sysd = parse_system(gen_random(seed))
    _dc_oracle(sysd, build_oracle(sysd))


@pytest.mark.parametrize("seed", range(30))
def test_conditional_set_monotone_in_dependence(seed):
    sysd = parse_system(gen_random(seed))
    cs = CompiledSystem(sysd)
    graphs = build_local_sgs(cs)
    pairs = extract_dependence(cs, graphs)
    rng = random.Random(seed)
    extra = set(pairs)
    ids = list(cs.ids)
    for _ in range(3):
        if len(ids) >= 2:
            extra.add(frozenset(rng.sample(ids, 2)))
    small = build_conditional_deps(cs, graphs, pairs)
    big = build_conditional_deps(cs, graphs, extra)
    for k, m in small.items():
        for t, ps in m.items():
            assert ps <= big[k][t]


@pytest.mark.parametrize("seed", range(30))
def test_conditional_entries_belong_to_owner(seed):
    sysd = parse_system(gen_random(seed))
    oracle = build_oracle(sysd)
    for (i, _), m in oracle.dc.items():
        for t in m:
            assert sysd.transition(t).owner == sysd.processes[i].name


def test_visible_without_safety_is_empty():
    assert visible_transitions(parse_system(CHAIN)) == set()


def test_visible_is_syntactic():
    sysd = parse_system(CHAIN.replace("}\n", "}\nsafety f == 0 || c != 1;\n"))
    assert visible_transitions(sysd) == {"step", "t2", "t3"}
    sysd = parse_system(CHAIN + "safety f != 2;\n")
    assert visible_transitions(sysd) == {"t2"}


@pytest.mark.parametrize("seed", range(150))
def test_visible_over_approximates_semantic(seed):
    sysd = parse_system(gen_random(seed))
    if sysd.safety is None:
        return
    brute = brute_reach(sysd)
    by_id = {t.id: t for t in sysd.transitions()}
    semantic = set()
    for a, t, b in brute.edges:
        if ev(sysd.safety, dict(a)) != ev(sysd.safety, dict(b)):
            semantic.add(t)
    assert semantic <= visible_transitions(sysd) <= set(by_id)


def test_fail_capable_transitions_depend_on_everything():
    sysd = parse_system(
        "system f;\nprocess P { var a : 0..1 = 0; fail when a == 1; trans a+; }\n"
        "process Q { var b : 0..1 = 0; trans b+; }\n"
    )
    assert build_oracle(sysd).dependent("a+", "b+")
