from __future__ import annotations

import pytest

from porlock.bench import FAMILIES, gen_arbiter, gen_dme, gen_fifo, gen_random
from porlock.dsl import parse_system, parse_with_diagnostics
from porlock.por import explore_por
from porlock.reachability import explore_full


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_generators_are_deterministic(family):
    assert FAMILIES[family](3) == FAMILIES[family](3)


def test_random_is_deterministic():
    assert [gen_random(s) for s in range(20)] == [gen_random(s) for s in range(20)]
    assert len({gen_random(s) for s in range(20)}) > 15


@pytest.mark.parametrize("gen, n", [(gen_fifo, 0), (gen_arbiter, 1), (gen_dme, 1), (gen_arbiter, 0)])
def test_size_errors(gen, n):
    with pytest.raises(ValueError):
        gen(n)


def test_fifo_single_stage():
    sysd = parse_system(gen_fifo(1))
    assert len(sysd.processes) == 1
    assert sorted(v.name for v in sysd.shared) == ["f0", "f1", "k"]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fifo_stage_count_and_shape(n):
    sysd = parse_system(gen_fifo(n))
    assert [p.name for p in sysd.processes] == [f"S{i}" for i in range(n)]
    _, st = explore_full(sysd)
    assert st.verdict == "ok"


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_reduction_at_size_three(family):
    sysd = parse_system(FAMILIES[family](3))
    _, mono = explore_full(sysd)
    _, por = explore_por(sysd, mode="cond2")
    _, cond = explore_por(sysd, mode="cond2prime")
    assert mono.verdict == por.verdict == cond.verdict == "ok"
    assert cond.states <= por.states <= mono.states
    assert cond.states < mono.states


@pytest.mark.parametrize("gen", [gen_arbiter, gen_dme])
@pytest.mark.parametrize("n", [2, 3])
def test_bug_variants_are_caught(gen, n):
    sysd = parse_system(gen(n, bug=True))
    _, mono = explore_full(sysd)
    assert mono.verdict != "ok"
    for mode in ("cond2", "cond2prime"):
        _, st = explore_por(sysd, mode=mode)
        assert st.verdict != "ok"
        assert st.has_violation == mono.has_violation and st.has_deadlock == mono.has_deadlock


def test_random_systems_are_valid_and_small():
    small = 0
    for seed in range(1000):
        sysd, diags = parse_with_diagnostics(gen_random(seed))
        assert sysd is not None, [d.message for d in diags]
        _, st = explore_full(sysd, budget=10**5, record_graph=False)
        small += st.verdict != "aborted"
    assert small >= 990
