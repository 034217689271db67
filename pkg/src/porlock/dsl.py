"""Parser and canonical printer for the ``.pnet`` process-network language.

Example::

    system handshake;
    shared req : 0..1 = 0;
    process client {
      var busy : 0..1 = 0;
      trans req+ : guard busy == 0;          # sugar: req == 0 && busy == 0 -> req := 1
      trans done : guard req == 1 -> busy := 1;
    }
    safety req == 0 || busy == 0;

``name+`` / ``name-`` transition ids without an explicit ``->`` clause expand
to ``name == 0 -> name := 1`` and ``name == 1 -> name := 0``; any ``guard``
given is conjoined.  ``-> skip`` denotes an empty effect list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    TRUE,
    And,
    Assign,
    Cmp,
    Const,
    Expr,
    Or,
    ProcessDef,
    SystemDef,
    TransitionDef,
    VariableDecl,
    conj,
    expr_vars,
)

KEYWORDS = {
    "system", "shared", "process", "var", "fail", "when", "trans",
    "guard", "safety", "true", "false", "skip",
}

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\.\.|->|:=|==|!=|&&|\|\||[;:=,{}()<>+\-])"
)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    line: int
    column: int
    message: str
    token: str = ""

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class DslError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int

    @property
    def end(self) -> int:
        return self.col + len(self.text)


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise DslError([Diagnostic("error", line, col, f"unexpected character {text[pos]!r}", text[pos])])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident" and m.group() in KEYWORDS:
            toks.append(_Tok("kw", m.group(), line, pos - line_start + 1))
        elif kind in ("int", "ident", "op"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.diags: list[Diagnostic] = []
        # name -> token of declaration / references, for located diagnostics
        self.refs: list[tuple[str, str | None, _Tok]] = []
        self.tid_toks: dict[str, _Tok] = {}
        self.proc_toks: dict[str, _Tok] = {}

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise DslError([Diagnostic("error", tok.line, tok.col, msg, tok.text)])

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def take(self, text: str) -> _Tok:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> _Tok:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            self.i += 1
            neg = True
        if self.tok.kind != "int":
            self.error(f"expected integer, found {self.tok.text or 'end of input'!r}")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    # -- grammar -------------------------------------------------------
    def system(self) -> tuple[SystemDef, dict]:
        self.take("system")
        name = self.ident().text
        self.take(";")
        shared: list[VariableDecl] = []
        processes: list[ProcessDef] = []
        safety: Expr | None = None
        decl_toks: dict[str, _Tok] = {}
        while self.tok.kind != "eof":
            if self.at("shared"):
                self.i += 1
                for d, t in self.decl_list(None):
                    shared.append(d)
                    self._declare(decl_toks, d, t)
                self.take(";")
            elif self.at("process"):
                processes.append(self.process(decl_toks))
            elif self.at("safety"):
                t = self.take("safety")
                if safety is not None:
                    self.error("safety predicate given twice", t)
                safety = self.expr(None)
                self.take(";")
            else:
                self.error(f"unexpected {self.tok.text!r}")
        sysdef = SystemDef(
            name,
            tuple(sorted(shared, key=lambda v: v.name)),
            tuple(processes),
            safety,
        )
        return sysdef, decl_toks

    def _declare(self, decl_toks: dict, d: VariableDecl, t: _Tok):
        if d.name in decl_toks:
            self.diags.append(Diagnostic("error", t.line, t.col, f"duplicate variable {d.name!r}", t.text))
        else:
            decl_toks[d.name] = t
        if d.lo > d.hi:
            self.diags.append(Diagnostic("error", t.line, t.col, f"empty domain {d.lo}..{d.hi}", t.text))
        elif not d.lo <= d.initial <= d.hi:
            self.diags.append(
                Diagnostic("error", t.line, t.col, f"initial value {d.initial} of {d.name!r} outside {d.lo}..{d.hi}", t.text)
            )

    def decl_list(self, owner: str | None):
        out = [self.decl(owner)]
        while self.at(","):
            self.i += 1
            out.append(self.decl(owner))
        return out

    def decl(self, owner: str | None) -> tuple[VariableDecl, _Tok]:
        t = self.ident()
        self.take(":")
        lo = self.integer()
        self.take("..")
        hi = self.integer()
        self.take("=")
        init = self.integer()
        return VariableDecl(t.text, lo, hi, init, owner), t

    def process(self, decl_toks: dict) -> ProcessDef:
        self.take("process")
        nametok = self.ident()
        name = nametok.text
        if name in self.proc_toks:
            self.diags.append(Diagnostic("error", nametok.line, nametok.col, f"duplicate process {name!r}", name))
        else:
            self.proc_toks[name] = nametok
        self.take("{")
        locals_: list[VariableDecl] = []
        trans: list[TransitionDef] = []
        fail: Expr | None = None
        while not self.at("}"):
            if self.at("var"):
                self.i += 1
                for d, t in self.decl_list(name):
                    locals_.append(d)
                    self._declare(decl_toks, d, t)
                self.take(";")
            elif self.at("fail"):
                t = self.take("fail")
                self.take("when")
                if fail is not None:
                    self.error("fail condition given twice", t)
                fail = self.expr(name)
                self.take(";")
            elif self.at("trans"):
                trans.append(self.transition(name))
            else:
                self.error(f"unexpected {self.tok.text or 'end of input'!r} in process body")
        self.take("}")
        return ProcessDef(name, tuple(sorted(locals_, key=lambda v: v.name)), tuple(trans), fail)

    def transition(self, owner: str) -> TransitionDef:
        self.take("trans")
        idtok = self.ident()
        tid = idtok.text
        sugar = None
        nxt = self.tok
        if nxt.kind == "op" and nxt.text in "+-" and nxt.line == idtok.line and nxt.col == idtok.end:
            sugar = nxt.text
            tid += nxt.text
            self.i += 1
        guard: Expr = TRUE
        effects: tuple[Assign, ...] | None = None
        if self.at(":"):
            self.i += 1
            if self.at("guard"):
                self.i += 1
                guard = self.expr(owner)
            if self.at("->"):
                self.i += 1
                effects = self.effects(owner)
        self.take(";")
        if tid in self.tid_toks:
            self.diags.append(Diagnostic("error", idtok.line, idtok.col, f"duplicate transition id {tid!r}", tid))
        else:
            self.tid_toks[tid] = idtok
        if effects is None:
            if sugar is None:
                effects = ()
            else:
                var = idtok.text
                self.refs.append((var, owner, idtok))
                old, new = (0, 1) if sugar == "+" else (1, 0)
                guard = conj(Cmp(var, "==", old), guard)
                effects = (Assign(var, "set", new),)
        return TransitionDef(tid, owner, guard, effects)

    def effects(self, owner: str) -> tuple[Assign, ...]:
        if self.at("skip"):
            self.i += 1
            return ()
        out = [self.assign(owner)]
        while self.at(","):
            self.i += 1
            out.append(self.assign(owner))
        return tuple(out)

    def assign(self, owner: str) -> Assign:
        t = self.ident()
        self.refs.append((t.text, owner, t))
        self.take(":=")
        if self.tok.kind == "ident":
            src = self.ident()
            if src.text != t.text:
                self.error(f"increment must read its own target {t.text!r}", src)
            op = self.tok
            if not (self.at("+") or self.at("-")):
                self.error("expected '+' or '-'")
            self.i += 1
            k = self.tok
            if self.integer() != 1:
                self.error("only +1 and -1 steps are supported", k)
            return Assign(t.text, "inc" if op.text == "+" else "dec")
        return Assign(t.text, "set", self.integer())

    def expr(self, owner: str | None) -> Expr:
        terms = [self.conj(owner)]
        while self.at("||"):
            self.i += 1
            terms.append(self.conj(owner))
        return terms[0] if len(terms) == 1 else Or(tuple(terms))

    def conj(self, owner: str | None) -> Expr:
        terms = [self.atom(owner)]
        while self.at("&&"):
            self.i += 1
            terms.append(self.atom(owner))
        return terms[0] if len(terms) == 1 else And(tuple(terms))

    def atom(self, owner: str | None) -> Expr:
        if self.at("("):
            self.i += 1
            e = self.expr(owner)
            self.take(")")
            return e
        if self.at("true") or self.at("false"):
            v = self.tok.text == "true"
            self.i += 1
            return Const(v)
        t = self.ident()
        self.refs.append((t.text, owner, t))
        op = self.tok
        if op.kind != "op" or op.text not in ("==", "!=", "<", ">"):
            self.error(f"expected comparison operator, found {op.text or 'end of input'!r}")
        self.i += 1
        return Cmp(t.text, op.text, self.integer())


def _check(sysdef: SystemDef, parser: _Parser, decl_toks: dict) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    decls = sysdef.variables()
    for p in sysdef.processes:
        for t in p.transitions:
            tok = parser.tid_toks[t.id]
            writes = [a.var for a in t.effects]
            if len(writes) != len(set(writes)):
                diags.append(Diagnostic("error", tok.line, tok.col, f"transition {t.id!r} assigns a variable twice", t.id))
            for a in t.effects:
                d = decls.get(a.var)
                if d is not None and a.kind == "set" and not d.lo <= a.value <= d.hi:
                    diags.append(
                        Diagnostic(
                            "error", tok.line, tok.col, f"transition {t.id!r} assigns {a.value} outside domain of {a.var!r}", t.id
                        )
                    )
    for name, owner, tok in parser.refs:
        d = decls.get(name)
        if d is None:
            diags.append(Diagnostic("error", tok.line, tok.col, f"undeclared variable {name!r}", tok.text))
        elif owner is not None and d.owner is not None and d.owner != owner:
            diags.append(
                Diagnostic("error", tok.line, tok.col, f"{name!r} is local to process {d.owner!r}", tok.text)
            )
    for v in sysdef.shared:
        users = [p.name for p in sysdef.processes if v.name in p.referenced()]
        if len(users) < 2:
            tok = decl_toks.get(v.name)
            line, col = (tok.line, tok.col) if tok else (1, 1)
            diags.append(
                Diagnostic("warning", line, col, f"shared variable {v.name!r} used by {len(users)} process(es)", v.name)
            )
    return diags


def parse_with_diagnostics(text: str) -> tuple[SystemDef | None, list[Diagnostic]]:
    """Parse ``text``; never raises.  Errors imply no system is returned."""
    try:
        parser = _Parser(text)
        sysdef, decl_toks = parser.system()
    except DslError as exc:
        return None, exc.diagnostics
    diags = parser.diags + _check(sysdef, parser, decl_toks)
    if any(d.severity == "error" for d in diags):
        return None, diags
    return sysdef, diags


def parse_system(text: str) -> SystemDef:
    sysdef, diags = parse_with_diagnostics(text)
    if sysdef is None:
        raise DslError([d for d in diags if d.severity == "error"])
    return sysdef


# --------------------------------------------------------------------------
# Printer
# --------------------------------------------------------------------------


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Const):
        return "true" if expr.value else "false"
    if isinstance(expr, Cmp):
        return f"{expr.var} {expr.op} {expr.value}"
    if isinstance(expr, And):
        parts = [f"({format_expr(t)})" if isinstance(t, (And, Or)) else format_expr(t) for t in expr.terms]
        return " && ".join(parts)
    parts = [f"({format_expr(t)})" if isinstance(t, Or) else format_expr(t) for t in expr.terms]
    return " || ".join(parts)


def _decl(v: VariableDecl) -> str:
    return f"{v.name} : {v.lo}..{v.hi} = {v.initial}"


def _assign(a: Assign) -> str:
    if a.kind == "set":
        return f"{a.var} := {a.value}"
    return f"{a.var} := {a.var} {'+' if a.kind == 'inc' else '-'} 1"


def print_system(sysdef: SystemDef) -> str:
    lines = [f"system {sysdef.name};"]
    for v in sorted(sysdef.shared, key=lambda v: v.name):
        lines.append(f"shared {_decl(v)};")
    for p in sysdef.processes:
        lines.append(f"process {p.name} {{")
        for v in sorted(p.locals, key=lambda v: v.name):
            lines.append(f"  var {_decl(v)};")
        if p.fail is not None:
            lines.append(f"  fail when {format_expr(p.fail)};")
        for t in p.transitions:
            eff = ", ".join(_assign(a) for a in t.effects) or "skip"
            lines.append(f"  trans {t.id} : guard {format_expr(t.guard)} -> {eff};")
        lines.append("}")
    if sysdef.safety is not None:
        lines.append(f"safety {format_expr(sysdef.safety)};")
    return "\n".join(lines) + "\n"


__all__ = [
    "Diagnostic",
    "DslError",
    "format_expr",
    "parse_system",
    "parse_with_diagnostics",
    "print_system",
    "expr_vars",
]
