"""Asynchronous parallel composition of state graphs.

Components synchronise on changes of their common variables and move
independently otherwise.  Only states reachable from the initial pair are
constructed.  Every composite edge is tagged in ``StateGraph.clause`` with
the rule that produced it: ``"b"`` (left moves alone), ``"c"`` (right moves
alone) or ``"d"`` (both move, changing the common variables identically).
"""

from __future__ import annotations

from functools import reduce

from .model import ENV, Layout, ModelError, StateGraph


class CompositionError(ModelError):
    pass


def _embed(src: Layout, dst: Layout):
    parts = []
    for v, off, m in zip(src.variables, src.offsets, src.masks):
        j = dst.index[v.name]
        parts.append(f"(((s >> {off}) & {m}) << {dst.offsets[j]})")
    return eval("lambda s: " + (" | ".join(parts) if parts else "0"))  # noqa: S307


def compose(g1: StateGraph, g2: StateGraph) -> StateGraph:
    common = [n for n in g1.layout.names if n in g2.layout.index]
    decls = {v.name: v for v in g1.layout.variables}
    for v in g2.layout.variables:
        w = decls.setdefault(v.name, v)
        if (w.lo, w.hi) != (v.lo, v.hi):
            raise CompositionError(f"inconsistent domains for {v.name!r}")
    layout = Layout(sorted(decls.values(), key=lambda v: v.name))
    clayout = Layout([decls[n] for n in sorted(common)])
    c1 = g1.layout.compile_projection(clayout)
    c2 = g2.layout.compile_projection(clayout)
    e1 = _embed(g1.layout, layout)
    e2 = _embed(g2.layout, layout)
    lab1, lab2 = g1.labelings, g2.labelings
    if c1(lab1[g1.initial]) != c2(lab2[g2.initial]):
        raise CompositionError("initial states disagree on common variables")

    succ1, succ2 = g1.successors(), g2.successors()
    out = StateGraph(f"{g1.owner}|{g2.owner}", layout)
    ids: dict[tuple[int, int], int] = {}

    def state(a: int, b: int) -> tuple[int, bool]:
        key = (a, b)
        if key in ids:
            return ids[key], False
        sid, new = out.add_state(e1(lab1[a]) | e2(lab2[b]), g1.fail[a] or g2.fail[b])
        assert new, "labelings identify composite states"
        ids[key] = sid
        return sid, True

    def edge(src: int, label, a: int, b: int, clause: str):
        dst, new = state(a, b)
        if out.add_edge(src, label, dst):
            out.clause[(src, label, dst)] = clause
        if new:
            work.append((a, b))

    out.initial, _ = state(g1.initial, g2.initial)
    work = [(g1.initial, g2.initial)]
    while work:
        a, b = work.pop()
        src = ids[(a, b)]
        if g1.fail[a] or g2.fail[b]:
            continue
        ca = c1(lab1[a])
        moves2 = []
        for label, b2 in succ2[b]:
            cb2 = c2(lab2[b2])
            if cb2 == ca:
                edge(src, label, a, b2, "c")
            else:
                moves2.append((label, b2, cb2))
        for label, a2 in succ1[a]:
            ca2 = c1(lab1[a2])
            if ca2 == ca:
                edge(src, label, a2, b, "b")
                continue
            for label2, b2, cb2 in moves2:
                if cb2 != ca2:
                    continue
                if label is not ENV and label2 is not ENV:
                    continue  # two writers at once is not an interleaving step
                edge(src, label if label is not ENV else label2, a2, b2, "d")
    return out


def compose_all(graphs) -> StateGraph:
    return reduce(compose, graphs)
