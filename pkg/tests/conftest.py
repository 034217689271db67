"""Shared fixtures and brute-force oracles.

The oracles here deliberately avoid the package's compiled (bit-packed)
semantics: expressions are evaluated by a small tree walker written from
scratch, and states are plain sorted tuples of ``(variable, value)``.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import pytest

from porlock.bench import fig1
from porlock.dsl import parse_system
from porlock.model import And, Cmp, Const, Or, SystemDef

OPS = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def seed_base() -> int:
    return int(os.environ.get("PORLOCK_SEED", "0"))


def campaign_seeds(n: int) -> range:
    base = seed_base()
    return range(base, base + n)


def ev(expr, lab: dict) -> bool:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Cmp):
        return OPS[expr.op](lab[expr.var], expr.value)
    if isinstance(expr, And):
        return all(ev(t, lab) for t in expr.terms)
    if isinstance(expr, Or):
        return any(ev(t, lab) for t in expr.terms)
    raise TypeError(expr)


def step(t, lab: dict) -> dict:
    out = dict(lab)
    for a in t.effects:
        if a.kind == "set":
            out[a.var] = a.value
        elif a.kind == "inc":
            out[a.var] = lab[a.var] + 1
        else:
            out[a.var] = lab[a.var] - 1
    return out


def key(lab: dict) -> tuple:
    return tuple(sorted(lab.items()))


@dataclass
class Brute:
    states: set = field(default_factory=set)
    edges: set = field(default_factory=set)  # (key, tid, key)
    deadlocks: set = field(default_factory=set)
    violations: set = field(default_factory=set)
    failed: set = field(default_factory=set)

    def enabled(self, system: SystemDef, k: tuple) -> list[str]:
        if k in self.failed:
            return []
        lab = dict(k)
        return [t.id for t in system.transitions() if ev(t.guard, lab)]


def brute_reach(system: SystemDef) -> Brute:
    """Breadth-first reachable state space under interleaving semantics."""
    out = Brute()
    trans = system.transitions()
    init = system.initial_labeling()
    q = deque([init])
    out.states.add(key(init))
    while q:
        lab = q.popleft()
        k = key(lab)
        if system.safety is not None and not ev(system.safety, lab):
            out.violations.add(k)
        if any(p.fail is not None and ev(p.fail, lab) for p in system.processes):
            out.failed.add(k)
            continue
        en = [t for t in trans if ev(t.guard, lab)]
        if not en:
            out.deadlocks.add(k)
        for t in en:
            nxt = step(t, lab)
            nk = key(nxt)
            out.edges.add((k, t.id, nk))
            if nk not in out.states:
                out.states.add(nk)
                q.append(nxt)
    return out


def exact_dependence(system: SystemDef, brute: Brute) -> set[frozenset]:
    """Pairs violating independence at some reachable state, from the full graph."""
    by_id = {t.id: t for t in system.transitions()}
    dep = set()
    for k in brute.states:
        en = brute.enabled(system, k)
        lab = dict(k)
        for a, b in combinations(en, 2):
            ta, tb = by_id[a], by_id[b]
            la, lb = step(ta, lab), step(tb, lab)
            if not ev(tb.guard, la) or not ev(ta.guard, lb) or step(tb, la) != step(ta, lb):
                dep.add(frozenset((a, b)))
    return dep


def labelings(graph) -> set[tuple]:
    return {key(graph.labeling(i)) for i in range(graph.num_states)}


@pytest.fixture
def fig1_system() -> SystemDef:
    return parse_system(fig1())


DIAMOND2 = """\
system diamond;
process P { var a : 0..1 = 0; trans a+; }
process Q { var b : 0..1 = 0; trans b+; }
"""


# Acceptance criteria report one line each at the end of the run.
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
