"""Command-line entry point: ``porlock check | analyze | bench | gen``."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .bench import FAMILIES, gen_diamond, gen_random
from .dependence import build_oracle
from .dsl import parse_with_diagnostics
from .model import ModelError, SystemDef, eval_expr
from .por import explore_por
from .reachability import DEFAULT_BUDGET, SearchStats, explore_full, replay
from .semantics import CompiledSystem

EXIT_OK, EXIT_VIOLATION, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3
MODES = {"mono": None, "por": "cond2", "por-cond": "cond2prime"}
BENCH_BUDGET = 10**6


class InputError(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 3), keeping 2 for budget exhaustion."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def load_system(path: str) -> SystemDef:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: cannot read: {exc}") from None
    sysdef, diags = parse_with_diagnostics(text)
    for d in diags:
        if d.severity == "warning":
            print(f"{path}:{d}", file=sys.stderr)
    if sysdef is None:
        raise InputError("\n".join(f"{path}:{d}" for d in diags if d.severity == "error"))
    return sysdef


def run_mode(system: SystemDef, mode: str, budget: int) -> SearchStats:
    """One search; ``time_s`` includes the local-graph analysis for POR modes."""
    t0 = time.perf_counter()
    csys = CompiledSystem(system)
    if MODES[mode] is None:
        _, stats = explore_full(csys, budget=budget, record_graph=False)
    else:
        oracle = build_oracle(csys)
        _, stats = explore_por(csys, oracle, MODES[mode], budget=budget, record_graph=False)
    stats.mode = mode
    stats.time_s = time.perf_counter() - t0
    return stats


def _report_witness(system: SystemDef, stats: SearchStats, out) -> None:
    kind = stats.verdict
    path = stats.witness
    print(f"{kind} witness ({len(path)} steps): {' '.join(path) if path else '(initial state)'}", file=out)
    trace = replay(system, path)
    last = trace[-1]
    if kind == "safety-violation":
        assert not eval_expr(system.safety, last), "witness does not reach a violating state"
    else:
        csys = CompiledSystem(system)
        assert not csys.enabled(csys.layout.pack(last)), "witness does not reach a deadlock"
    print("replayed: " + " ".join(f"{k}={v}" for k, v in sorted(last.items())), file=out)


def cmd_check(args) -> int:
    try:
        system = load_system(args.file)
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    if args.safety == "off":
        system = dataclasses.replace(system, safety=None)
    try:
        stats = run_mode(system, args.mode, args.budget)
    except ModelError as exc:
        print(f"{args.file}: model error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    record = stats.record()
    print(record)
    if args.stats_out:
        try:
            with open(args.stats_out, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(record + "\n")
        except OSError as exc:
            print(f"{args.stats_out}: cannot write: {exc}", file=sys.stderr)
            return EXIT_INPUT
    if stats.verdict == "aborted":
        return EXIT_BUDGET
    if stats.verdict in ("deadlock", "safety-violation"):
        _report_witness(system, stats, sys.stdout)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        system = load_system(args.file)
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    try:
        csys = CompiledSystem(system)
        oracle = build_oracle(csys)
    except ModelError as exc:
        print(f"{args.file}: model error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    names = [p.name for p in system.processes]
    try:
        if args.dump_sgs:
            out = Path(args.dump_sgs)
            out.mkdir(parents=True, exist_ok=True)
            for g in oracle.graphs:
                (out / f"{g.owner}.sg").write_text(g.dump(), encoding="utf-8", newline="\n")
        if args.dump_deps:
            Path(args.dump_deps).write_text(oracle.dump(names), encoding="utf-8", newline="\n")
    except OSError as exc:
        print(f"cannot write dump: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for g in oracle.graphs:
        env = sum(1 for e in g.edges if e[1] is None)
        print(f"sg {g.owner} states={g.num_states} edges={len(g.edges)} env={env}")
    print(f"dep pairs={len(oracle.pairs)} depc={len(oracle.dc_pairs())} visible={len(oracle.visible)}")
    return EXIT_OK


def _bench_cell(cell: tuple[str, int, str, int]) -> tuple[str, int, str, SearchStats]:
    family, size, mode, budget = cell
    from .dsl import parse_system

    stats = run_mode(parse_system(FAMILIES[family](size)), mode, budget)
    return family, size, mode, stats


def format_table(rows: list[tuple[str, int, str, SearchStats]]) -> str:
    """Aligned table, one row per (model, mode); ``-`` marks budget exhaustion."""
    header = ("model", "mode", "time_s", "states", "edges", "verdict")
    body = []
    for family, size, mode, st in rows:
        if st.verdict == "aborted":
            body.append((f"{family}{size}", mode, "-", "-", "-", "aborted"))
        else:
            body.append((f"{family}{size}", mode, f"{st.time_s:.2f}", str(st.states), str(st.edges), st.verdict))
    widths = [max(len(r[k]) for r in [header, *body]) for k in range(len(header))]
    lines = []
    for r in [header, *body]:
        cells = [r[0].ljust(widths[0]), r[1].ljust(widths[1])]
        cells += [c.rjust(w) for c, w in zip(r[2:5], widths[2:5])]
        cells.append(r[5])
        lines.append("  ".join(cells).rstrip())
    return "".join(line + "\n" for line in lines)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_bench(args) -> int:
    try:
        sizes = _int_list(args.sizes)
    except ValueError:
        print(f"bad --sizes {args.sizes!r}", file=sys.stderr)
        return EXIT_INPUT
    modes = [m for m in args.modes.split(",") if m]
    bad = [m for m in modes if m not in MODES]
    if bad:
        print(f"unknown mode(s): {', '.join(bad)}", file=sys.stderr)
        return EXIT_INPUT
    cells = [(args.family, n, m, args.budget) for n in sizes for m in modes]
    try:
        if args.jobs > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(_bench_cell, cells))
        else:
            rows = [_bench_cell(c) for c in cells]
    except ValueError as exc:
        print(f"bad parameter: {exc}", file=sys.stderr)
        return EXIT_INPUT
    table = format_table(rows)
    if args.out:
        try:
            Path(args.out).write_text(table, encoding="utf-8", newline="\n")
        except OSError as exc:
            print(f"{args.out}: cannot write: {exc}", file=sys.stderr)
            return EXIT_INPUT
    sys.stdout.write(table)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        if args.family == "random":
            seed = args.seed if args.seed is not None else int(os.environ.get("PORLOCK_SEED", "0"))
            text = gen_random(seed)
        elif args.family == "diamond":
            text = gen_diamond(args.size)
        else:
            kw = {"bug": True} if args.bug else {}
            if args.bug and args.family == "fifo":
                raise ValueError("fifo has no bug variant")
            text = FAMILIES[args.family](args.size, **kw)
    except ValueError as exc:
        print(f"bad parameter: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgParser(prog="porlock", description="Explicit-state checker with ample-set reduction.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    c = sub.add_parser("check", help="search for deadlocks and safety violations")
    c.add_argument("file")
    c.add_argument("--mode", choices=list(MODES), default="por-cond")
    c.add_argument("--safety", choices=["on", "off"], default="on")
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--stats-out")
    c.set_defaults(func=cmd_check)

    a = sub.add_parser("analyze", help="build local state graphs and the dependence relation")
    a.add_argument("file")
    a.add_argument("--dump-sgs", metavar="DIR")
    a.add_argument("--dump-deps", metavar="PATH")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="run a benchmark family under several modes")
    b.add_argument("--family", choices=sorted(FAMILIES), required=True)
    b.add_argument("--sizes", default="")
    b.add_argument("--modes", default="mono,por,por-cond")
    b.add_argument("--budget", type=int, default=BENCH_BUDGET)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="print a generated model")
    g.add_argument("family", choices=sorted(FAMILIES) + ["diamond", "random"])
    g.add_argument("size", type=int, nargs="?", default=3)
    g.add_argument("--bug", action="store_true")
    g.add_argument("--seed", type=int, help="random family seed (default: $PORLOCK_SEED or 0)")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
