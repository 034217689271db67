"""Model generators: benchmark families and random systems for oracle runs."""

from __future__ import annotations

import random

from .dsl import print_system
from .model import (
    TRUE,
    And,
    Assign,
    Cmp,
    Or,
    ProcessDef,
    SystemDef,
    TransitionDef,
    VariableDecl,
    conj,
)

FIG1 = """\
# Three processes over shared x, y, z; locals v, w, u.
system fig1;
shared x : 0..1 = 0, y : 0..1 = 0, z : 0..1 = 0;
process M1 {
  var v : 0..1 = 1;
  trans v- : guard z == 1;
  trans x+ : guard z == 1 && v == 0;
  trans v+ : guard z == 0 && x == 1;
  trans x- : guard z == 0 && v == 1;
}
process M2 {
  var w : 0..1 = 1;
  trans w- : guard z == 1;
  trans y+ : guard z == 1 && w == 0;
  trans w+ : guard z == 0 && y == 1;
  trans y- : guard z == 0 && w == 1;
}
process M3 {
  var u : 0..1 = 0;
  trans z+ : guard x == 0 && y == 0 && u == 0;
  trans u+ : guard x == 1 && y == 1 && z == 1;
  trans z- : guard u == 1;
  trans u- : guard x == 0 && y == 0 && z == 0;
}
"""


def fig1() -> str:
    return FIG1


def _b(name: str, init: int = 0, owner: str | None = None) -> VariableDecl:
    return VariableDecl(name, 0, 1, init, owner)


def _t(tid: str, owner: str, guard, *effects: tuple[str, int]) -> TransitionDef:
    return TransitionDef(tid, owner, guard, tuple(Assign(v, "set", k) for v, k in effects))


def _eq(var: str, value: int) -> Cmp:
    return Cmp(var, "==", value)


def gen_fifo(n: int, tokens: int = 1) -> str:
    """Chain of ``n`` stages passing tokens through full/empty slots.

    Stage ``i`` latches the token of slot ``f{i}`` into ``a{i}``, forwards it
    into ``f{i+1}`` raising an acknowledge flag ``e{i}``, and clears the flag
    before latching again.  Every stage starts with a stale flag and a
    start-up bit ``c{i}`` that lets the first take race the first clear;
    after that the two never meet.  The consumer hands a credit ``k`` back to
    the producer, so at most ``tokens`` tokens are in flight.
    """
    if n < 1:
        raise ValueError("fifo needs at least one stage")
    if tokens < 1:
        raise ValueError("fifo needs at least one token")
    shared = [_b(f"f{k}") for k in range(n + 1)]
    shared.append(VariableDecl("k", 0, tokens, tokens))
    procs = []
    for i in range(n):
        name = f"S{i}"
        a, e, c = f"a{i}", f"e{i}", f"c{i}"
        left, right = f"f{i}", f"f{i + 1}"
        ts = [
            _t(f"take{i}", name, conj(_eq(left, 1), _eq(a, 0), Or((_eq(e, 0), _eq(c, 1)))), (left, 0), (a, 1)),
            _t(f"put{i}", name, conj(_eq(a, 1), _eq(right, 0)), (a, 0), (right, 1), (e, 1)),
            _t(f"clr{i}", name, conj(_eq(a, 0), _eq(e, 1)), (e, 0), (c, 0)),
        ]
        if i == 0:
            ts.append(
                TransitionDef("prod", name, conj(_eq(left, 0), Cmp("k", ">", 0)), (Assign(left, "set", 1), Assign("k", "dec")))
            )
        if i == n - 1:
            ts.append(
                TransitionDef("cons", name, conj(_eq(right, 1), Cmp("k", "<", tokens)), (Assign(right, "set", 0), Assign("k", "inc")))
            )
        locs = (_b(a, owner=name), _b(c, 1, owner=name), _b(e, 1, owner=name))
        procs.append(ProcessDef(name, locs, tuple(ts)))
    return print_system(SystemDef(f"fifo{n}", tuple(shared), tuple(procs)))


def _at_most_one(names: list[str]) -> object:
    none = conj(*(_eq(g, 0) for g in names))
    terms = [none]
    for g in names:
        terms.append(conj(*(_eq(h, 1 if h == g else 0) for h in names)))
    return Or(tuple(terms))


def gen_dme(n: int, *, bug: bool = False) -> str:
    """Token ring: a cell may grant its user only while holding the token.

    Each user works locally (``work{i}``) before it requests again.
    """
    if n < 2:
        raise ValueError("dme needs at least two cells")
    shared = [_b(f"tok{i}", 1 if i == 0 else 0) for i in range(n)]
    procs = []
    for i in range(n):
        name = f"C{i}"
        r, g, d = f"r{i}", f"g{i}", f"d{i}"
        tok, nxt = f"tok{i}", f"tok{(i + 1) % n}"
        grant_guard = conj(_eq(r, 1), _eq(g, 0)) if bug and i < 2 else conj(_eq(r, 1), _eq(tok, 1), _eq(g, 0))
        ts = (
            _t(f"work{i}", name, conj(_eq(d, 0), _eq(r, 0), _eq(g, 0)), (d, 1)),
            _t(f"req{i}", name, conj(_eq(d, 1), _eq(r, 0), _eq(g, 0)), (r, 1), (d, 0)),
            _t(f"grant{i}", name, grant_guard, (g, 1)),
            _t(f"rel{i}", name, _eq(g, 1), (g, 0), (r, 0)),
            _t(f"pass{i}", name, conj(_eq(tok, 1), _eq(g, 0), _eq(r, 0)), (tok, 0), (nxt, 1)),
        )
        procs.append(ProcessDef(name, (_b(d, owner=name), _b(g, owner=name), _b(r, owner=name)), ts))
    grants = [f"g{i}" for i in range(n)]
    return print_system(
        SystemDef(f"dme{n}{'bug' if bug else ''}", tuple(shared), tuple(procs), _at_most_one(grants))
    )


def gen_arbiter(n: int, *, bug: bool = False) -> str:
    """Request-driven token ring; the token only moves towards a requester."""
    if n < 2:
        raise ValueError("arbiter needs at least two clients")
    shared = [_b(f"tok{i}", 1 if i == 0 else 0) for i in range(n)]
    shared += [_b(f"req{i}") for i in range(n)]
    procs = []
    for i in range(n):
        name = f"A{i}"
        g = f"g{i}"
        tok, nxt, req = f"tok{i}", f"tok{(i + 1) % n}", f"req{i}"
        grant_guard = conj(_eq(req, 1), _eq(g, 0)) if bug and i < 2 else conj(_eq(req, 1), _eq(tok, 1), _eq(g, 0))
        ts = (
            _t(f"ask{i}", name, conj(_eq(req, 0), _eq(g, 0)), (req, 1)),
            _t(f"grant{i}", name, grant_guard, (g, 1)),
            _t(f"done{i}", name, _eq(g, 1), (g, 0), (req, 0)),
            _t(
                f"fwd{i}",
                name,
                conj(_eq(tok, 1), _eq(g, 0), _eq(req, 0), _eq(f"req{(i + 1) % n}", 1)),
                (tok, 0),
                (nxt, 1),
            ),
        )
        procs.append(ProcessDef(name, (_b(g, owner=name),), ts))
    grants = [f"g{i}" for i in range(n)]
    return print_system(
        SystemDef(f"arb{n}{'bug' if bug else ''}", tuple(shared), tuple(procs), _at_most_one(grants))
    )


def gen_diamond(n: int) -> str:
    """``n`` processes, each with one transition on its own Boolean."""
    procs = tuple(
        ProcessDef(f"P{i}", (_b(f"a{i}", owner=f"P{i}"),), (_t(f"a{i}+", f"P{i}", _eq(f"a{i}", 0), (f"a{i}", 1)),))
        for i in range(n)
    )
    return print_system(SystemDef(f"diamond{n}", (), procs))


FAMILIES = {"fifo": gen_fifo, "arb": gen_arbiter, "dme": gen_dme}


def gen_random(
    seed: int,
    max_processes: int = 4,
    max_vars: int = 3,
    max_transitions: int = 6,
) -> str:
    """Small random system; the same seed always yields the same text."""
    rng = random.Random(seed)
    nproc = rng.randint(1, max_processes)
    nshared = rng.randint(0 if nproc == 1 else 1, 3)
    shared = [
        VariableDecl(f"s{k}", 0, hi, rng.randint(0, hi))
        for k in range(nshared)
        for hi in [2 if rng.random() < 0.2 else 1]
    ]
    procs = []
    allvars: list[VariableDecl] = list(shared)
    for p in range(nproc):
        name = f"P{p}"
        nloc = rng.randint(1 if nshared == 0 else 0, max_vars)
        locs = [
            VariableDecl(f"l{p}{k}", 0, hi, rng.randint(0, hi), name)
            for k in range(nloc)
            for hi in [2 if rng.random() < 0.2 else 1]
        ]
        scope = locs + [v for v in shared if rng.random() < 0.7]
        if not scope:
            scope = locs or [rng.choice(shared)]
        allvars += locs
        trans = []
        for k in range(rng.randint(1, max_transitions)):
            trans.append(_random_transition(rng, f"t{p}{k}", name, scope))
        fail = None
        if rng.random() < 0.08:
            v = rng.choice(scope)
            fail = _eq(v.name, v.hi)
            if v.initial == v.hi:
                fail = _eq(v.name, v.lo) if v.initial != v.lo else None
        procs.append(ProcessDef(name, tuple(locs), tuple(trans), fail))
    safety = None
    if rng.random() < 0.5:
        picks = rng.sample(allvars, min(len(allvars), rng.randint(1, 2)))
        terms = [Cmp(v.name, "!=", rng.randint(v.lo, v.hi)) for v in picks]
        safety = terms[0] if len(terms) == 1 else Or(tuple(terms))
        if not _holds_initially(safety, allvars):
            safety = None
    return print_system(SystemDef(f"rand{seed}", tuple(shared), tuple(procs), safety))


def _holds_initially(expr, decls) -> bool:
    from .model import eval_expr

    return eval_expr(expr, {v.name: v.initial for v in decls})


def _random_transition(rng: random.Random, tid: str, owner: str, scope: list[VariableDecl]) -> TransitionDef:
    guard_terms = []
    for v in rng.sample(scope, rng.randint(0, min(2, len(scope)))):
        op = rng.choice(["==", "==", "!=", "<", ">"])
        guard_terms.append(Cmp(v.name, op, rng.randint(v.lo, v.hi)))
    if guard_terms and rng.random() < 0.15:
        v = rng.choice(scope)
        guard_terms[-1] = Or((guard_terms[-1], _eq(v.name, rng.randint(v.lo, v.hi))))
    targets = rng.sample(scope, rng.randint(1, min(2, len(scope))))
    effects = []
    for v in targets:
        r = rng.random()
        if v.hi - v.lo >= 2 and r < 0.3:
            effects.append(Assign(v.name, "inc"))
            guard_terms.append(Cmp(v.name, "<", v.hi))
        elif v.hi - v.lo >= 2 and r < 0.5:
            effects.append(Assign(v.name, "dec"))
            guard_terms.append(Cmp(v.name, ">", v.lo))
        else:
            effects.append(Assign(v.name, "set", rng.randint(v.lo, v.hi)))
    guard = conj(*guard_terms) if guard_terms else TRUE
    if isinstance(guard, And) and len(guard.terms) == 1:
        guard = guard.terms[0]
    return TransitionDef(tid, owner, guard, tuple(effects))
