"""Compiled global and per-process semantics of a :class:`SystemDef`."""

from __future__ import annotations

from functools import cached_property

from .model import Layout, SystemDef, TransitionDef


class ProcessSemantics:
    """Guards and effects of one process compiled over its visible variables."""

    def __init__(self, system: SystemDef, name: str, global_layout: Layout):
        self.name = name
        self.process = system.process(name)
        self.layout = Layout(system.visible(name))
        self.transitions: list[TransitionDef] = sorted(self.process.transitions, key=lambda t: t.id)
        self.ids = [t.id for t in self.transitions]
        self.guards = [self.layout.compile_expr(t.guard) for t in self.transitions]
        self.effects = [self.layout.compile_effects(t) for t in self.transitions]
        fail = self.process.fail
        self.fail = self.layout.compile_expr(fail) if fail is not None else None
        self.project = global_layout.compile_projection(self.layout)
        shared = {v.name for v in system.shared}
        self.shared_names = [n for n in self.layout.names if n in shared]

    def is_fail(self, s: int) -> bool:
        return self.fail is not None and self.fail(s)

    def enabled(self, s: int) -> list[int]:
        """Indices (into ``self.transitions``) enabled at local state ``s``."""
        if self.is_fail(s):
            return []
        return [i for i, g in enumerate(self.guards) if g(s)]


class CompiledSystem:
    """Packed-integer semantics of a whole system.

    Transitions are indexed in ascending id order; every bitmask over
    transitions in the engines uses that index.
    """

    def __init__(self, system: SystemDef):
        system.validate()
        self.system = system
        self.layout = Layout(sorted(system.variables().values(), key=lambda v: v.name))
        self.transitions = system.transitions()
        self.ids = [t.id for t in self.transitions]
        self.tindex = {tid: i for i, tid in enumerate(self.ids)}
        self.guards = [self.layout.compile_expr(t.guard) for t in self.transitions]
        self.effects = [self.layout.compile_effects(t) for t in self.transitions]
        self.owner_index = [system.process_index(t.owner) for t in self.transitions]
        self.procs = [ProcessSemantics(system, p.name, self.layout) for p in system.processes]
        fails = [p.fail for p in system.processes if p.fail is not None]
        self._fails = [self.layout.compile_expr(f) for f in fails]
        self.safety = (
            self.layout.compile_expr(system.safety) if system.safety is not None else None
        )
        self.initial = self.layout.pack(system.initial_labeling())
        self._gt = list(zip(range(len(self.guards)), self.guards))

    @cached_property
    def has_fail(self) -> bool:
        return bool(self._fails)

    def is_fail(self, s: int) -> bool:
        for f in self._fails:
            if f(s):
                return True
        return False

    def enabled(self, s: int) -> list[int]:
        if self._fails and self.is_fail(s):
            return []
        return [i for i, g in self._gt if g(s)]

    def enabled_mask(self, s: int) -> int:
        m = 0
        for i in self.enabled(s):
            m |= 1 << i
        return m

    def fire(self, i: int, s: int) -> int:
        return self.effects[i](s)

    def violates(self, s: int) -> bool:
        return self.safety is not None and not self.safety(s)

    def local_ids(self, s: int, sgs) -> tuple:
        """The global state as a tuple of local-state ids in ``sgs``."""
        return tuple(sg.index.get(p.project(s)) for p, sg in zip(self.procs, sgs))
