"""Stateful depth-first search with ample-set partial order reduction."""

from __future__ import annotations

from .dependence import DependenceOracle, build_oracle
from .model import SystemDef, in_pred
from .reachability import DEFAULT_BUDGET, SearchStats, search
from .semantics import CompiledSystem

MODES = ("cond2", "cond2prime")


class AmpleSelector:
    """Chooses ``ample(s)`` from ``enabled(s)``.

    Candidates are the classes of enabled transitions connected by the
    dependence relation.  A class qualifies when none of its members has a
    disabled partner that still matters: any disabled partner in ``cond2``
    mode, only partners recorded in the conditional set for the current local
    state in ``cond2prime`` mode.  The smallest qualifying class (ties by
    ids) that holds no visible transition and does not close a cycle on the
    DFS stack with every member is returned; otherwise everything enabled.
    """

    def __init__(
        self,
        csys: CompiledSystem,
        oracle: DependenceOracle,
        mode: str = "cond2prime",
        *,
        proviso: bool = True,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.csys = csys
        self.mode = mode
        self.proviso = proviso
        idx = csys.tindex
        n = len(csys.ids)
        self.dep = [0] * n
        for pair in oracle.pairs:
            a, b = (idx[t] for t in pair)
            self.dep[a] |= 1 << b
            self.dep[b] |= 1 << a
        self.visible = 0
        for t in oracle.visible:
            self.visible |= 1 << idx[t]
        self.owner = csys.owner_index
        self.sg_index = [g.index for g in oracle.graphs]
        # (process, local id) -> {transition index: partner mask}
        self.dc: dict[tuple[int, int], dict[int, int]] = {}
        for key, m in oracle.dc.items():
            self.dc[key] = {idx[t]: _mask(idx, ps) for t, ps in m.items()}
        self.project = [p.project for p in csys.procs]

    def excluded(self, s: int, t: int, en_mask: int) -> bool:
        disabled = self.dep[t] & ~en_mask
        if not disabled or self.mode == "cond2":
            return bool(disabled)
        i = self.owner[t]
        sid = self.sg_index[i].get(self.project[i](s))
        if sid is None:  # outside the over-approximation: stay conservative
            return True
        return bool(self.dc.get((i, sid), {}).get(t, 0) & disabled)

    def classes(self, en: list[int]) -> list[list[int]]:
        en_mask = 0
        for t in en:
            en_mask |= 1 << t
        seen = 0
        out = []
        for t in en:
            if seen >> t & 1:
                continue
            cls = 1 << t
            frontier = cls
            while frontier:
                low = frontier & -frontier
                u = low.bit_length() - 1
                frontier ^= low
                new = self.dep[u] & en_mask & ~cls
                cls |= new
                frontier |= new
            seen |= cls
            out.append([u for u in en if cls >> u & 1])
        out.sort(key=lambda c: (len(c), c))
        return out

    def __call__(self, s: int, en: list[int], on_stack) -> list[int]:
        if len(en) <= 1:
            return en
        en_mask = 0
        for t in en:
            en_mask |= 1 << t
        fire = self.csys.effects
        for cls in self.classes(en):
            if len(cls) == len(en):
                break
            if any(self.excluded(s, t, en_mask) for t in cls):
                continue
            if any(self.visible >> t & 1 for t in cls):
                continue
            if self.proviso and all(fire[t](s) in on_stack for t in cls):
                continue
            return cls
        return en


def _mask(idx: dict[str, int], ids) -> int:
    m = 0
    for t in ids:
        m |= 1 << idx[t]
    return m


def ample(
    state: int,
    enabled: list[int],
    selector: AmpleSelector,
    on_stack=frozenset(),
) -> list[int]:
    """``ample(s)`` as transition indices of ``selector.csys``."""
    return selector(state, enabled, on_stack)


def explore_por(
    system: SystemDef | CompiledSystem,
    oracle: DependenceOracle | None = None,
    mode: str = "cond2prime",
    *,
    proviso: bool = True,
    stop_on_first: bool = False,
    budget: int = DEFAULT_BUDGET,
    record_graph: bool = True,
    baseline: SearchStats | None = None,
):
    csys = system if isinstance(system, CompiledSystem) else CompiledSystem(system)
    if oracle is None:
        oracle = build_oracle(csys)
    selector = AmpleSelector(csys, oracle, mode, proviso=proviso)
    graph, stats = search(
        csys,
        selector,
        mode="por" if mode == "cond2" else "por-cond",
        stop_on_first=stop_on_first,
        budget=budget,
        record_graph=record_graph,
    )
    if baseline is not None:
        stats.baseline_states = baseline.states
    return graph, stats


__all__ = ["AmpleSelector", "MODES", "ample", "explore_por", "in_pred"]
