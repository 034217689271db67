"""Semantic domain: variables, guards, transitions, processes and state graphs.

Two evaluation paths live here.  The dict-based functions (:func:`enabled`,
:func:`fire`) are the reference semantics over proposition labelings.  The
:class:`Layout` compiler turns guards and effects into functions over
bit-packed integer states, which is what the search engines run on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Union

ENV = None  # edge label for environment (constraint-injected) edges


class ModelError(Exception):
    """Raised for definition errors in a system description."""


class DisabledTransitionError(ModelError):
    pass


class DomainOverflowError(ModelError):
    def __init__(self, variable: str, transition: str):
        super().__init__(
            f"transition {transition!r} drives {variable!r} outside its domain"
        )
        self.variable = variable
        self.transition = transition


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

CMP_OPS = ("==", "!=", "<", ">")


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Cmp:
    var: str
    op: str
    value: int


@dataclass(frozen=True)
class And:
    terms: tuple


@dataclass(frozen=True)
class Or:
    terms: tuple


Expr = Union[Const, Cmp, And, Or]
TRUE = Const(True)


def expr_vars(expr: Expr) -> set[str]:
    if isinstance(expr, Cmp):
        return {expr.var}
    if isinstance(expr, (And, Or)):
        out: set[str] = set()
        for t in expr.terms:
            out |= expr_vars(t)
        return out
    return set()


def eval_expr(expr: Expr, labeling: Mapping[str, int]) -> bool:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Cmp):
        v = labeling[expr.var]
        if expr.op == "==":
            return v == expr.value
        if expr.op == "!=":
            return v != expr.value
        if expr.op == "<":
            return v < expr.value
        return v > expr.value
    if isinstance(expr, And):
        return all(eval_expr(t, labeling) for t in expr.terms)
    return any(eval_expr(t, labeling) for t in expr.terms)


def conj(*exprs: Expr) -> Expr:
    """Flattening conjunction; drops literal ``true`` terms."""
    terms: list = []
    for e in exprs:
        if isinstance(e, And):
            terms.extend(e.terms)
        elif e != TRUE:
            terms.append(e)
    if not terms:
        return TRUE
    if len(terms) == 1:
        return terms[0]
    return And(tuple(terms))


# --------------------------------------------------------------------------
# Declarations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class VariableDecl:
    name: str
    lo: int
    hi: int
    initial: int
    owner: str | None = None  # None means shared

    @property
    def shared(self) -> bool:
        return self.owner is None

    def domain(self) -> range:
        return range(self.lo, self.hi + 1)


@dataclass(frozen=True)
class Assign:
    var: str
    kind: str  # "set" | "inc" | "dec"
    value: int = 0

    def apply(self, current: int) -> int:
        if self.kind == "set":
            return self.value
        return current + 1 if self.kind == "inc" else current - 1


@dataclass(frozen=True)
class TransitionDef:
    id: str
    owner: str
    guard: Expr
    effects: tuple[Assign, ...] = ()

    def reads(self) -> set[str]:
        """Variables whose value can influence enabledness or the result."""
        return expr_vars(self.guard) | {a.var for a in self.effects if a.kind != "set"}

    def writes(self) -> set[str]:
        return {a.var for a in self.effects}


@dataclass(frozen=True)
class ProcessDef:
    name: str
    locals: tuple[VariableDecl, ...] = ()
    transitions: tuple[TransitionDef, ...] = ()
    fail: Expr | None = None

    def referenced(self) -> set[str]:
        out: set[str] = set()
        for t in self.transitions:
            out |= expr_vars(t.guard) | t.writes()
        if self.fail is not None:
            out |= expr_vars(self.fail)
        return out

    @property
    def local_names(self) -> set[str]:
        return {v.name for v in self.locals}


@dataclass(frozen=True)
class SystemDef:
    name: str
    shared: tuple[VariableDecl, ...] = ()
    processes: tuple[ProcessDef, ...] = ()
    safety: Expr | None = None

    def variables(self) -> dict[str, VariableDecl]:
        out = {v.name: v for v in self.shared}
        for p in self.processes:
            out.update((v.name, v) for v in p.locals)
        return out

    def process(self, name: str) -> ProcessDef:
        for p in self.processes:
            if p.name == name:
                return p
        raise KeyError(name)

    def process_index(self, name: str) -> int:
        return [p.name for p in self.processes].index(name)

    def transitions(self) -> list[TransitionDef]:
        return sorted((t for p in self.processes for t in p.transitions), key=lambda t: t.id)

    def transition(self, tid: str) -> TransitionDef:
        for p in self.processes:
            for t in p.transitions:
                if t.id == tid:
                    return t
        raise KeyError(tid)

    def reads_writes(self, process: str) -> tuple[set[str], set[str]]:
        """Shared variables the process reads and writes."""
        p = self.process(process)
        shared = {v.name for v in self.shared}
        reads: set[str] = set()
        writes: set[str] = set()
        for t in p.transitions:
            reads |= expr_vars(t.guard) & shared
            writes |= t.writes() & shared
        if p.fail is not None:
            reads |= expr_vars(p.fail) & shared
        return reads, writes

    def visible(self, process: str) -> list[VariableDecl]:
        """Locals plus every shared variable the process touches, sorted by name."""
        p = self.process(process)
        used = p.referenced()
        vs = list(p.locals) + [v for v in self.shared if v.name in used]
        return sorted(vs, key=lambda v: v.name)

    def initial_labeling(self) -> dict[str, int]:
        return {name: v.initial for name, v in self.variables().items()}

    def validate(self) -> None:
        """Raise :class:`ModelError` on the first broken invariant."""
        seen: set[str] = set()
        decls = list(self.shared) + [v for p in self.processes for v in p.locals]
        for v in decls:
            if v.name in seen:
                raise ModelError(f"duplicate variable {v.name!r}")
            seen.add(v.name)
            if not v.lo <= v.initial <= v.hi:
                raise ModelError(f"initial value of {v.name!r} outside {v.lo}..{v.hi}")
        names = [p.name for p in self.processes]
        if len(set(names)) != len(names):
            raise ModelError("duplicate process name")
        ids = [t.id for p in self.processes for t in p.transitions]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate transition id")
        allvars = self.variables()
        shared = {v.name for v in self.shared}
        for p in self.processes:
            scope = shared | p.local_names
            for t in p.transitions:
                if t.owner != p.name:
                    raise ModelError(f"transition {t.id!r} owner mismatch")
                mentioned = expr_vars(t.guard) | t.writes()
                bad = mentioned - scope
                if bad:
                    raise ModelError(f"transition {t.id!r} references {sorted(bad)} outside its scope")
                writes = [a.var for a in t.effects]
                if len(set(writes)) != len(writes):
                    raise ModelError(f"transition {t.id!r} assigns a variable twice")
                for a in t.effects:
                    d = allvars[a.var]
                    if a.kind == "set" and not d.lo <= a.value <= d.hi:
                        raise ModelError(f"transition {t.id!r} assigns {a.value} to {a.var!r}")
            if p.fail is not None and expr_vars(p.fail) - scope:
                raise ModelError(f"fail condition of {p.name!r} leaves its scope")
        if self.safety is not None and expr_vars(self.safety) - set(allvars):
            raise ModelError("safety predicate references undeclared variables")


# --------------------------------------------------------------------------
# Reference semantics over labelings
# --------------------------------------------------------------------------


def _transitions_of(scope: SystemDef | ProcessDef) -> list[TransitionDef]:
    if isinstance(scope, SystemDef):
        return scope.transitions()
    return sorted(scope.transitions, key=lambda t: t.id)


def enabled(labeling: Mapping[str, int], scope: SystemDef | ProcessDef) -> list[str]:
    """Ids of transitions whose guard holds under ``labeling``, sorted."""
    return [t.id for t in _transitions_of(scope) if eval_expr(t.guard, labeling)]


def fire(
    transition: TransitionDef,
    labeling: Mapping[str, int],
    variables: Mapping[str, VariableDecl] | None = None,
) -> dict[str, int]:
    if not eval_expr(transition.guard, labeling):
        raise DisabledTransitionError(f"transition {transition.id!r} is not enabled")
    out = dict(labeling)
    for a in transition.effects:
        new = a.apply(labeling[a.var])
        if variables is not None:
            d = variables[a.var]
            if not d.lo <= new <= d.hi:
                raise DomainOverflowError(a.var, transition.id)
        out[a.var] = new
    return out


def in_pred(global_state: tuple[int, ...], local_state: int, process_index: int) -> bool:
    """True iff ``local_state`` is the given process's component of ``global_state``."""
    if not 0 <= process_index < len(global_state):
        raise IndexError(process_index)
    return global_state[process_index] == local_state


# --------------------------------------------------------------------------
# Packed states
# --------------------------------------------------------------------------


def _overflow(var: str, tid: str):
    raise DomainOverflowError(var, tid)


class Layout:
    """Bit-packing of a valuation over an ordered variable list."""

    def __init__(self, variables: Iterable[VariableDecl]):
        self.variables = tuple(variables)
        self.names = tuple(v.name for v in self.variables)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.offsets: list[int] = []
        self.masks: list[int] = []
        off = 0
        for v in self.variables:
            width = max(1, (v.hi - v.lo).bit_length())
            self.offsets.append(off)
            self.masks.append((1 << width) - 1)
            off += width
        self.bits = off

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def pack(self, labeling: Mapping[str, int]) -> int:
        s = 0
        for v, off in zip(self.variables, self.offsets):
            s |= (labeling[v.name] - v.lo) << off
        return s

    def unpack(self, s: int) -> dict[str, int]:
        return {
            v.name: ((s >> off) & m) + v.lo
            for v, off, m in zip(self.variables, self.offsets, self.masks)
        }

    def get(self, s: int, name: str) -> int:
        i = self.index[name]
        return ((s >> self.offsets[i]) & self.masks[i]) + self.variables[i].lo

    def _field(self, name: str) -> tuple[str, int]:
        i = self.index[name]
        return f"((s >> {self.offsets[i]}) & {self.masks[i]})", self.variables[i].lo

    def _expr_src(self, expr: Expr) -> str:
        if isinstance(expr, Const):
            return "True" if expr.value else "False"
        if isinstance(expr, Cmp):
            f, lo = self._field(expr.var)
            return f"({f} {expr.op} {expr.value - lo})"
        joiner = " and " if isinstance(expr, And) else " or "
        return "(" + joiner.join(self._expr_src(t) for t in expr.terms) + ")"

    def compile_expr(self, expr: Expr) -> Callable[[int], bool]:
        return eval(f"lambda s: {self._expr_src(expr)}")  # noqa: S307

    def compile_effects(self, transition: TransitionDef) -> Callable[[int], int]:
        lines = ["def _f(s):"]
        for a in transition.effects:
            i = self.index[a.var]
            off, m, d = self.offsets[i], self.masks[i], self.variables[i]
            if a.kind == "set":
                lines.append(f"    s = (s & ~{m << off}) | {(a.value - d.lo) << off}")
            elif a.kind == "inc":
                lines.append(f"    if ((s >> {off}) & {m}) >= {d.hi - d.lo}: _overflow({a.var!r}, {transition.id!r})")
                lines.append(f"    s += {1 << off}")
            else:
                lines.append(f"    if ((s >> {off}) & {m}) <= 0: _overflow({a.var!r}, {transition.id!r})")
                lines.append(f"    s -= {1 << off}")
        lines.append("    return s")
        ns = {"_overflow": _overflow}
        exec("\n".join(lines), ns)  # noqa: S102
        return ns["_f"]

    def compile_projection(self, target: "Layout") -> Callable[[int], int]:
        """Map a packed state of this layout onto ``target`` (a sub-layout)."""
        parts = []
        for v, toff in zip(target.variables, target.offsets):
            i = self.index[v.name]
            src = f"((s >> {self.offsets[i]}) & {self.masks[i]})"
            parts.append(f"({src} << {toff})" if toff else src)
        return eval("lambda s: " + (" | ".join(parts) if parts else "0"))  # noqa: S307


# --------------------------------------------------------------------------
# State graphs
# --------------------------------------------------------------------------


@dataclass
class StateGraph:
    """Explicit state graph with packed labelings.

    Edges are ``(src, label, dst)`` triples where ``label`` is a transition
    id or :data:`ENV` for an edge injected by constraint application.
    """

    owner: str
    layout: Layout
    labelings: list[int] = field(default_factory=list)
    fail: list[bool] = field(default_factory=list)
    initial: int = 0
    edges: set[tuple[int, str | None, int]] = field(default_factory=set)
    index: dict[int, int] = field(default_factory=dict)
    clause: dict[tuple[int, str | None, int], str] = field(default_factory=dict)

    def add_state(self, packed: int, failed: bool = False) -> tuple[int, bool]:
        sid = self.index.get(packed)
        if sid is not None:
            return sid, False
        sid = len(self.labelings)
        self.labelings.append(packed)
        self.fail.append(failed)
        self.index[packed] = sid
        return sid, True

    def add_edge(self, src: int, label: str | None, dst: int) -> bool:
        e = (src, label, dst)
        if e in self.edges:
            return False
        self.edges.add(e)
        return True

    @property
    def num_states(self) -> int:
        return len(self.labelings)

    def labeling(self, sid: int) -> dict[str, int]:
        return self.layout.unpack(self.labelings[sid])

    def propositions(self, sid: int) -> frozenset[tuple[str, int]]:
        return frozenset(self.labeling(sid).items())

    def find(self, labeling: Mapping[str, int]) -> int | None:
        return self.index.get(self.layout.pack(labeling))

    def predecessors(self) -> dict[int, list[tuple[int, str | None]]]:
        out: dict[int, list[tuple[int, str | None]]] = {i: [] for i in range(self.num_states)}
        for s, lab, d in self.edges:
            out[d].append((s, lab))
        return out

    def successors(self) -> dict[int, list[tuple[str | None, int]]]:
        out: dict[int, list[tuple[str | None, int]]] = {i: [] for i in range(self.num_states)}
        for s, lab, d in self.edges:
            out[s].append((lab, d))
        return out

    def signature(self) -> tuple[frozenset, frozenset, frozenset]:
        """Labeling-level view: (states, edges, initial) for isomorphism checks."""
        lab = [self.propositions(i) for i in range(self.num_states)]
        return (
            frozenset(lab),
            frozenset((lab[s], t, lab[d]) for s, t, d in self.edges),
            lab[self.initial],
        )

    def dump(self) -> str:
        """Line-oriented text form; states by id, edges sorted, ``env`` for injected edges."""
        lines = [f"sg {self.owner} states={self.num_states} init={self.initial}"]
        for sid in range(self.num_states):
            lab = ",".join(f"{k}={v}" for k, v in sorted(self.labeling(sid).items()))
            lines.append(f"state {sid} fail={int(self.fail[sid])} {{{lab}}}")
        edges = sorted((s, "env" if t is ENV else t, d) for s, t, d in self.edges)
        lines += [f"edge {s} {t} {d}" for s, t, d in edges]
        return "".join(line + "\n" for line in lines)

    def check_invariants(self) -> None:
        assert 0 <= self.initial < self.num_states
        for s, _, d in self.edges:
            assert 0 <= s < self.num_states and 0 <= d < self.num_states


def isomorphic(g1: StateGraph, g2: StateGraph) -> bool:
    """States are identified by labeling, so isomorphism is signature equality."""
    return g1.signature() == g2.signature()
