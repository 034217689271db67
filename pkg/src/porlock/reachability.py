"""Stateful depth-first reachability with deadlock and safety checking."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .model import (
    DisabledTransitionError,
    ModelError,
    StateGraph,
    SystemDef,
    eval_expr,
    fire,
)
from .semantics import CompiledSystem

DEFAULT_BUDGET = 10**7

# select(state, enabled indices, on_stack set) -> indices to expand
Selector = Callable[[int, list, set], Sequence[int]]


class InvalidWitnessError(ModelError):
    def __init__(self, step: int, transition: str):
        super().__init__(f"step {step}: transition {transition!r} is not enabled")
        self.step = step
        self.transition = transition


@dataclass
class SearchStats:
    name: str = ""
    mode: str = "mono"
    states: int = 0
    edges: int = 0
    max_depth: int = 0
    time_s: float = 0.0
    verdict: str = "ok"  # ok | deadlock | safety-violation | aborted
    witness: list[str] = field(default_factory=list)
    deadlock_witness: list[str] | None = None
    safety_witness: list[str] | None = None
    deadlock_states: set[int] = field(default_factory=set)
    violation_states: set[int] = field(default_factory=set)
    ample_hist: Counter = field(default_factory=Counter)
    full_expansions: int = 0
    baseline_states: int | None = None

    @property
    def has_deadlock(self) -> bool:
        return bool(self.deadlock_states)

    @property
    def has_violation(self) -> bool:
        return bool(self.violation_states)

    @property
    def ample_avg(self) -> float:
        n = sum(self.ample_hist.values())
        return sum(k * v for k, v in self.ample_hist.items()) / n if n else 0.0

    @property
    def reduction(self) -> float | None:
        if not self.baseline_states:
            return None
        return self.baseline_states / max(self.states, 1)

    def record(self) -> str:
        """One ``key=value`` line; the format consumed by scripts and tests."""
        return (
            f"name={self.name} mode={self.mode} states={self.states} edges={self.edges} "
            f"time_ms={self.time_s * 1000:.0f} verdict={self.verdict} ample_avg={self.ample_avg:.3f}"
        )


def search(
    csys: CompiledSystem,
    select: Selector | None = None,
    *,
    mode: str = "mono",
    stop_on_first: bool = False,
    budget: int = DEFAULT_BUDGET,
    record_graph: bool = True,
    reverse: bool = False,
) -> tuple[StateGraph | None, SearchStats]:
    """Depth-first search with a state stack and a pending-transition stack.

    ``select`` restricts the transitions expanded at each state (ample sets);
    ``None`` expands everything.
    """
    t0 = time.perf_counter()
    stats = SearchStats(name=csys.system.name, mode=mode)
    graph = StateGraph("composite", csys.layout) if record_graph else None
    ids = csys.ids
    fire_ = csys.effects
    is_fail = csys.is_fail if csys.has_fail else None
    violates = csys.violates if csys.safety is not None else None

    visited: dict[int, int] = {}
    on_stack: set[int] = set()
    state_stack: list[int] = []
    pending_stack: list[list[int]] = []
    path: list[str] = []

    def visit(s: int) -> bool:
        """Register and push ``s``; return True when the search must stop."""
        visited[s] = len(visited)
        failed = bool(is_fail and is_fail(s))
        if graph is not None:
            graph.add_state(s, failed)
        en = [] if failed else csys.enabled(s)
        stop = False
        if violates is not None and violates(s):
            stats.violation_states.add(s)
            if stats.safety_witness is None:
                stats.safety_witness = list(path)
                if stats.verdict == "ok":
                    stats.verdict, stats.witness = "safety-violation", list(path)
            stop = stop_on_first
        if not en and not failed:
            stats.deadlock_states.add(s)
            if stats.deadlock_witness is None:
                stats.deadlock_witness = list(path)
                if stats.verdict == "ok":
                    stats.verdict, stats.witness = "deadlock", list(path)
            stop = stop or stop_on_first
        on_stack.add(s)
        if select is None or not en:
            todo = en
        else:
            todo = list(select(s, en, on_stack))
            stats.ample_hist[len(todo)] += 1
            if len(todo) == len(en):
                stats.full_expansions += 1
        if reverse:
            todo = todo[::-1]
        else:
            todo = todo[:]
        todo.reverse()  # pop() from the end yields ascending order
        state_stack.append(s)
        pending_stack.append(todo)
        if len(state_stack) > stats.max_depth:
            stats.max_depth = len(state_stack)
        return stop

    stopped = visit(csys.initial)
    while state_stack and not stopped:
        pending = pending_stack[-1]
        if not pending:
            on_stack.discard(state_stack.pop())
            pending_stack.pop()
            if path:
                path.pop()
            continue
        i = pending.pop()
        s = state_stack[-1]
        s2 = fire_[i](s)
        stats.edges += 1
        new = s2 not in visited
        if new and len(visited) >= budget:
            stats.verdict = "aborted"
            break
        if new:
            path.append(ids[i])
            stopped = visit(s2)
        if graph is not None:
            graph.add_edge(visited[s], ids[i], visited[s2])

    stats.states = len(visited)
    stats.time_s = time.perf_counter() - t0
    return graph, stats


def explore_full(
    system: SystemDef | CompiledSystem,
    *,
    stop_on_first: bool = False,
    budget: int = DEFAULT_BUDGET,
    record_graph: bool = True,
    reverse: bool = False,
) -> tuple[StateGraph | None, SearchStats]:
    """Monolithic search expanding every enabled transition at every state."""
    csys = system if isinstance(system, CompiledSystem) else CompiledSystem(system)
    return search(
        csys,
        None,
        mode="mono",
        stop_on_first=stop_on_first,
        budget=budget,
        record_graph=record_graph,
        reverse=reverse,
    )


def replay(system: SystemDef, path: Sequence[str]) -> list[dict[str, int]]:
    """Re-execute ``path`` from the initial state with the reference semantics."""
    variables = system.variables()
    lab = system.initial_labeling()
    out = [lab]
    for k, tid in enumerate(path):
        t = system.transition(tid)
        if any(p.fail is not None and eval_expr(p.fail, lab) for p in system.processes):
            raise InvalidWitnessError(k, tid)
        try:
            lab = fire(t, lab, variables)
        except DisabledTransitionError:
            raise InvalidWitnessError(k, tid) from None
        out.append(lab)
    return out
