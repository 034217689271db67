"""Transition dependence extracted from the local state graphs.

Two transitions are dependent when some state of the over-approximation
witnesses that one disables the other, or that the two firing orders end in
different labelings.  Transitions of one process are checked on that
process's graph.  Transitions of different processes can only interfere
through a variable both touch; such pairs are checked on every pair of local
states that agree on the variables the two processes share, which is an
over-approximation of the joint valuations reachable globally.

The conditional set ``dc`` records, per local state and transition ``t``,
the partners ``t2`` with ``D(t, t2)`` for which a local state where both are
enabled is reachable along a path on which ``t`` stays enabled.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations

from .composition import _embed
from .model import DomainOverflowError, Layout, StateGraph, SystemDef, expr_vars
from .semantics import CompiledSystem


@dataclass
class DependenceOracle:
    ids: list[str]
    pairs: set[frozenset] = field(default_factory=set)
    # (process index, local state id) -> {transition id: set of partner ids}
    dc: dict[tuple[int, int], dict[str, set[str]]] = field(default_factory=dict)
    visible: set[str] = field(default_factory=set)
    graphs: list[StateGraph] = field(default_factory=list)

    def dependent(self, t1: str, t2: str) -> bool:
        return frozenset((t1, t2)) in self.pairs

    def partners(self, t: str) -> set[str]:
        out = set()
        for p in self.pairs:
            if t in p:
                out |= p - {t}
        return out

    def dc_pairs(self) -> set[tuple[int, int, str]]:
        return {(i, sid, t) for (i, sid), m in self.dc.items() for t, ps in m.items() if ps}

    def dump(self, names: list[str] | None = None) -> str:
        lines = sorted(f"dep {a} {b}" for a, b in (sorted(p) for p in self.pairs))
        dcl = []
        for i, sid, t in self.dc_pairs():
            sg = names[i] if names else str(i)
            dcl.append((sg, sid, t))
        lines += [f"depc {sg}:{sid} {t}" for sg, sid, t in sorted(dcl)]
        return "".join(line + "\n" for line in lines)


def visible_transitions(system: SystemDef) -> set[str]:
    """Transitions assigning a variable the safety predicate mentions."""
    if system.safety is None:
        return set()
    watched = expr_vars(system.safety)
    return {t.id for t in system.transitions() if t.writes() & watched}


def _fail_capable(system: SystemDef) -> set[str]:
    watched: set[str] = set()
    for p in system.processes:
        if p.fail is not None:
            watched |= expr_vars(p.fail)
    return {t.id for t in system.transitions() if t.writes() & watched}


def _local_pairs(p, g: StateGraph, pairs: set):
    """Same-process dependence, checked on every non-fail state of ``g``."""
    ids = p.ids
    for sid, s in enumerate(g.labelings):
        if g.fail[sid]:
            continue
        en = p.enabled(s)
        for a, b in combinations(en, 2):
            key = frozenset((ids[a], ids[b]))
            if key in pairs:
                continue
            if not _commute(p.effects[a], p.effects[b], p.guards[a], p.guards[b], s, p.is_fail):
                pairs.add(key)


def _commute(fa, fb, ga, gb, s, *fails) -> bool:
    """Independence conditions at ``s`` for two enabled transitions."""
    try:
        sa, sb = fa(s), fb(s)
    except DomainOverflowError:
        return False
    if any(f(sa) or f(sb) for f in fails):
        return False
    if not gb(sa) or not ga(sb):
        return False
    try:
        return fb(sa) == fa(sb)
    except DomainOverflowError:
        return False


def _conflict(t1, t2) -> bool:
    r1, r2 = t1.reads(), t2.reads()
    w1, w2 = t1.writes(), t2.writes()
    return bool(w1 & (r2 | w2) or w2 & (r1 | w1))


class _Joint:
    """Pairs of consistent local states of two processes, packed jointly."""

    def __init__(self, pi, gi: StateGraph, pj, gj: StateGraph):
        decls = {v.name: v for v in pi.layout.variables + pj.layout.variables}
        self.layout = Layout(sorted(decls.values(), key=lambda v: v.name))
        common = sorted(set(pi.layout.names) & set(pj.layout.names))
        cl = Layout([decls[n] for n in common])
        ci, cj = pi.layout.compile_projection(cl), pj.layout.compile_projection(cl)
        ei, ej = _embed(pi.layout, self.layout), _embed(pj.layout, self.layout)
        self.groups_j: dict[int, list[int]] = defaultdict(list)
        for sid, s in enumerate(gj.labelings):
            if not gj.fail[sid]:
                self.groups_j[cj(s)].append(sid)
        self.gi, self.gj, self.ci, self.cj, self.ei, self.ej = gi, gj, ci, cj, ei, ej
        fi, fj = pi.process.fail, pj.process.fail
        self.fails = [self.layout.compile_expr(f) for f in (fi, fj) if f is not None]

    def pairs(self):
        for si, s in enumerate(self.gi.labelings):
            if self.gi.fail[si]:
                continue
            js = self.groups_j.get(self.ci(s))
            if js:
                yield si, js


def extract_dependence(csys: CompiledSystem, graphs: list[StateGraph]) -> set[frozenset]:
    system = csys.system
    pairs: set[frozenset] = set()
    for p, g in zip(csys.procs, graphs):
        _local_pairs(p, g, pairs)
    fail_capable = _fail_capable(system)
    for tid in fail_capable:
        pairs |= {frozenset((tid, other)) for other in csys.ids if other != tid}
    for (i, pi), (j, pj) in combinations(enumerate(csys.procs), 2):
        todo = [
            (a, b)
            for a in pi.transitions
            for b in pj.transitions
            if frozenset((a.id, b.id)) not in pairs and _conflict(a, b)
        ]
        if not todo:
            continue
        joint = _Joint(pi, graphs[i], pj, graphs[j])
        jl = joint.layout
        for a, b in todo:
            ga, gb = jl.compile_expr(a.guard), jl.compile_expr(b.guard)
            fa, fb = jl.compile_effects(a), jl.compile_effects(b)
            ga_i = pi.guards[pi.ids.index(a.id)]
            gb_j = pj.guards[pj.ids.index(b.id)]
            found = False
            for si, js in joint.pairs():
                li = graphs[i].labelings[si]
                if not ga_i(li):
                    continue
                base = joint.ei(li)
                for sj in js:
                    lj = graphs[j].labelings[sj]
                    if not gb_j(lj):
                        continue
                    if not _commute(fa, fb, ga, gb, base | joint.ej(lj), *joint.fails):
                        found = True
                        break
                if found:
                    break
            if found:
                pairs.add(frozenset((a.id, b.id)))
    return pairs


def build_conditional_deps(
    csys: CompiledSystem, graphs: list[StateGraph], pairs: set[frozenset]
) -> dict[tuple[int, int], dict[str, set[str]]]:
    """Backward propagation of co-enabled dependent pairs in each local graph."""
    owner = {t.id: csys.system.process_index(t.owner) for t in csys.transitions}
    partners: dict[str, set[str]] = defaultdict(set)
    for pair in pairs:
        a, b = tuple(pair)
        partners[a].add(b)
        partners[b].add(a)

    # where each transition is enabled, per owning graph
    enabled_at: list[dict[str, list[int]]] = []
    for p, g in zip(csys.procs, graphs):
        m: dict[str, list[int]] = defaultdict(list)
        for sid, s in enumerate(g.labelings):
            if g.fail[sid]:
                continue
            for k in p.enabled(s):
                m[p.ids[k]].append(sid)
        enabled_at.append(m)

    joints: dict[tuple[int, int], _Joint] = {}

    def joint(i: int, j: int) -> _Joint:
        if (i, j) not in joints:
            joints[(i, j)] = _Joint(csys.procs[i], graphs[i], csys.procs[j], graphs[j])
        return joints[(i, j)]

    dc: dict[tuple[int, int], dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    preds = [g.predecessors() for g in graphs]
    for t in sorted(partners):
        i = owner[t]
        region = set(enabled_at[i].get(t, ()))
        if not region:
            continue
        for partner in sorted(partners[t]):
            j = owner[partner]
            if j == i:
                seeds = region & set(enabled_at[i].get(partner, ()))
            else:
                jn = joint(i, j)
                where = set(enabled_at[j].get(partner, ()))
                keys = {jn.cj(graphs[j].labelings[sj]) for sj in where}
                seeds = {si for si in region if jn.ci(graphs[i].labelings[si]) in keys}
            # backward closure within the region where t stays enabled
            work = list(seeds)
            reached = set(seeds)
            while work:
                s = work.pop()
                for pred, _ in preds[i][s]:
                    if pred in region and pred not in reached:
                        reached.add(pred)
                        work.append(pred)
            for s in reached:
                dc[(i, s)][t].add(partner)
    return {k: dict(v) for k, v in dc.items()}


def build_oracle(system: SystemDef | CompiledSystem, graphs: list[StateGraph] | None = None) -> DependenceOracle:
    from .cra import build_local_sgs

    csys = system if isinstance(system, CompiledSystem) else CompiledSystem(system)
    if graphs is None:
        graphs = build_local_sgs(csys)
    pairs = extract_dependence(csys, graphs)
    dc = build_conditional_deps(csys, graphs, pairs)
    return DependenceOracle(
        ids=list(csys.ids),
        pairs=pairs,
        dc=dc,
        visible=visible_transitions(csys.system),
        graphs=graphs,
    )
