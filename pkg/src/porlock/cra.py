"""Compositional construction of over-approximate per-process state graphs.

Each process starts from its projection of the initial state.  Rounds then
alternate two steps until nothing changes:

1. local closure: fire every enabled transition of the process from every
   known non-fail state;
2. constraint exchange: each new transition edge that changes variables
   shared with a neighbour yields a constraint ``(X, Y)`` over the variables
   they share; the neighbour gains, at every state matching ``X``, an
   environment edge to the state rewritten by ``Y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ENV, DomainOverflowError, Layout, StateGraph, SystemDef
from .semantics import CompiledSystem


@dataclass(frozen=True)
class Constraint:
    source: str
    target: str
    X: frozenset  # of (variable, value)
    Y: frozenset

    def __post_init__(self):
        if self.X == self.Y:
            raise ValueError("constraint must change the shared valuation")
        if {v for v, _ in self.X} != {v for v, _ in self.Y}:
            raise ValueError("X and Y must valuate the same variables")

    def delta(self) -> tuple[frozenset, frozenset]:
        """The propositions that actually change, e.g. ``({z=0}, {z=1})``."""
        return self.X - self.Y, self.Y - self.X

    def __str__(self) -> str:
        def fmt(props):
            return "{" + ", ".join(f"{v}={k}" for v, k in sorted(props)) + "}"

        return f"{self.source}->{self.target}: ({fmt(self.X)}, {fmt(self.Y)})"


def _mask_value(layout: Layout, props) -> tuple[int, int]:
    mask = val = 0
    for name, value in props:
        i = layout.index[name]
        mask |= layout.masks[i] << layout.offsets[i]
        val |= (value - layout.variables[i].lo) << layout.offsets[i]
    return mask, val


def extract_constraints(
    graph: StateGraph,
    edges,
    neighbours: dict[str, list[str]],
) -> list[Constraint]:
    """Constraints induced by ``edges`` of ``graph`` on each neighbour.

    ``neighbours`` maps a neighbouring process to the variables it shares
    with ``graph.owner``.  Environment edges and edges leaving the shared
    valuation unchanged induce nothing.
    """
    out: list[Constraint] = []
    seen: set = set()
    for src, label, dst in edges:
        if label is ENV:
            continue
        a, b = graph.labeling(src), graph.labeling(dst)
        for target, names in neighbours.items():
            X = frozenset((n, a[n]) for n in names)
            Y = frozenset((n, b[n]) for n in names)
            if X == Y or (target, X, Y) in seen:
                continue
            seen.add((target, X, Y))
            out.append(Constraint(graph.owner, target, X, Y))
    return out


def apply_constraint(graph: StateGraph, c: Constraint, is_fail=None) -> tuple[list[int], list[tuple]]:
    """Add environment moves for ``c`` at every matching non-fail state.

    Returns the states and edges that were new.  States created here are
    themselves matched, so the result is closed under ``c``.  ``is_fail``
    classifies new packed labelings (default: never failing).
    """
    return _apply(graph, [c], range(graph.num_states), is_fail or (lambda s: False))


def _apply(graph: StateGraph, constraints, states, is_fail) -> tuple[list[int], list[tuple]]:
    compiled = []
    for c in constraints:
        mx, vx = _mask_value(graph.layout, c.X)
        _, vy = _mask_value(graph.layout, c.Y)
        compiled.append((mx, vx, vy))
    new_states: list[int] = []
    new_edges: list[tuple] = []
    work = list(states)
    while work:
        sid = work.pop()
        if graph.fail[sid]:
            continue
        lab = graph.labelings[sid]
        for mx, vx, vy in compiled:
            if lab & mx != vx:
                continue
            packed = (lab & ~mx) | vy
            dst, new = graph.add_state(packed, is_fail(packed))
            if new:
                new_states.append(dst)
                work.append(dst)
            if graph.add_edge(sid, ENV, dst):
                new_edges.append((sid, ENV, dst))
    return new_states, new_edges


@dataclass
class CRAResult:
    graphs: list[StateGraph]
    rounds: list[list[Constraint]] = field(default_factory=list)
    overflows: int = 0

    @property
    def constraints(self) -> list[Constraint]:
        return [c for r in self.rounds for c in r]


def run_cra(system: SystemDef | CompiledSystem, *, max_rounds: int = 100_000) -> CRAResult:
    csys = system if isinstance(system, CompiledSystem) else CompiledSystem(system)
    procs = csys.procs
    graphs: list[StateGraph] = []
    for p in procs:
        g = StateGraph(p.name, p.layout)
        init = p.project(csys.initial)
        g.initial, _ = g.add_state(init, p.is_fail(init))
        graphs.append(g)
    names = [p.name for p in procs]
    neighbours: list[dict[str, list[str]]] = []
    for p in procs:
        mine = set(p.shared_names)
        neighbours.append(
            {q.name: sorted(mine & set(q.shared_names)) for q in procs if q is not p and mine & set(q.shared_names)}
        )

    known: list[list[Constraint]] = [[] for _ in procs]
    seen: set = set()
    frontier = [[g.initial] for g in graphs]  # states awaiting local closure
    unmatched = [[] for _ in graphs]  # states not yet matched by known constraints
    result = CRAResult(graphs)

    for _ in range(max_rounds):
        # 1. local closure
        new_edges: list[list[tuple]] = [[] for _ in graphs]
        changed = False
        for i, (p, g) in enumerate(zip(procs, graphs)):
            work = frontier[i]
            frontier[i] = []
            while work:
                sid = work.pop()
                if g.fail[sid]:
                    continue
                s = g.labelings[sid]
                for k in p.enabled(s):
                    try:
                        s2 = p.effects[k](s)
                    except DomainOverflowError:
                        result.overflows += 1
                        continue
                    dst, new = g.add_state(s2, p.is_fail(s2))
                    if new:
                        work.append(dst)
                        unmatched[i].append(dst)
                    e = (sid, p.ids[k], dst)
                    if g.add_edge(*e):
                        new_edges[i].append(e)
                        changed = True
        # 2. constraint exchange
        emitted: list[Constraint] = []
        fresh: list[list[Constraint]] = [[] for _ in graphs]
        for i, g in enumerate(graphs):
            for c in extract_constraints(g, new_edges[i], neighbours[i]):
                key = (c.target, c.X, c.Y)
                if key in seen:
                    continue
                seen.add(key)
                emitted.append(c)
                fresh[names.index(c.target)].append(c)
        for j, g in enumerate(graphs):
            p = procs[j]
            states_new, edges_new = [], []
            if fresh[j]:
                known[j].extend(fresh[j])
                s1, e1 = _apply(g, fresh[j], range(g.num_states), p.is_fail)
                states_new += s1
                edges_new += e1
            if known[j] and unmatched[j]:
                s2, e2 = _apply(g, known[j], unmatched[j], p.is_fail)
                states_new += s2
                edges_new += e2
            unmatched[j] = []
            if known[j] and states_new:
                # states created by one constraint may match an older one
                s3, e3 = _apply(g, known[j], states_new, p.is_fail)
                states_new += s3
                edges_new += e3
            if states_new or edges_new:
                changed = True
            frontier[j].extend(states_new)
        result.rounds.append(emitted)
        if not changed:
            result.rounds.pop()
            break
    else:  # pragma: no cover - finite domains always converge
        raise AssertionError("CRA did not reach a fixpoint")
    return result


def build_local_sgs(system: SystemDef | CompiledSystem) -> list[StateGraph]:
    """One over-approximate state graph per process, in declaration order."""
    return run_cra(system).graphs
