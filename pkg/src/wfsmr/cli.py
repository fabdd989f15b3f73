"""Command-line interface.

Subcommands: ``check`` validates a program (optionally dumping compiled
plans), ``solve`` writes the true/undefined atom files, ``generate`` writes
benchmark fact files, ``bench`` runs the timing harness, and ``wordcount``
runs the engine smoke test.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench as bench_mod
from .fixpoint import SolveOptions, partitions_agree, solve
from .mapreduce import Engine, EngineConfig, wordcount
from .planner import compile_program
from .program import Fact, Program, ProgramError, parse_facts, parse_program
from .store import Database

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

SPILL_ENV = "WFSMR_SPILL_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); remap to 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wfsmr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="validate a program file")
    check.add_argument("--program", required=True)
    check.add_argument("--explain", action="store_true", help="dump compiled plans")

    solve_cmd = sub.add_parser("solve", help="compute the well-founded model")
    solve_cmd.add_argument("--program", required=True)
    solve_cmd.add_argument("--facts", action="append", default=[])
    solve_cmd.add_argument("--out", required=True, help="output path prefix")
    solve_cmd.add_argument("--mode", choices=["naive", "optimized", "both"], default="optimized")
    solve_cmd.add_argument("--workers", type=int, default=1)
    solve_cmd.add_argument("--partitions", type=int, default=0, help="default: workers")
    solve_cmd.add_argument("--trace", action="store_true", help="print per-step trace lines")

    gen = sub.add_parser("generate", help="write a benchmark facts file")
    gen.add_argument("--dist", choices=["cycle", "tree", "chain"], required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, default=0, help="chain stride")
    gen.add_argument("--out", required=True)

    bench = sub.add_parser("bench", help="run the timing harness")
    bench.add_argument("--test", choices=sorted(bench_mod._TESTS), required=True)
    bench.add_argument("--n", type=int, required=True)
    bench.add_argument("--k", type=int, default=0)
    bench.add_argument("--mode", choices=["naive", "optimized"], default="optimized")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--partitions", type=int, default=0, help="default: workers")
    bench.add_argument("--reps", type=int, default=1)
    bench.add_argument("--csv", required=True)
    bench.add_argument("--summary", action="store_true", help="print aggregated means")

    wc = sub.add_parser("wordcount", help="word-frequency smoke test")
    wc.add_argument("files", nargs="+")
    wc.add_argument("--workers", type=int, default=1)
    wc.add_argument("--partitions", type=int, default=0, help="default: workers")
    return parser


def _engine_config(workers: int, partitions: int) -> EngineConfig:
    return EngineConfig(
        workers=workers,
        partitions=partitions if partitions > 0 else workers,
        spill_dir=os.environ.get(SPILL_ENV),
    )


def _load_program(path: str) -> Program:
    return parse_program(Path(path).read_text(encoding="utf-8"))


def _load_facts(paths: Sequence[str]) -> list[Fact]:
    facts: list[Fact] = []
    seen = set()
    for path in paths:
        for fact in parse_facts(Path(path).read_text(encoding="utf-8")):
            if fact not in seen:
                seen.add(fact)
                facts.append(fact)
    return facts


def _write_atoms(path: Path, db: Database) -> None:
    lines = sorted(str(fact) for fact in db.iter_facts())
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def cmd_check(args) -> int:
    program = _load_program(args.program)
    if not program.rules:
        print("warning: empty program", file=sys.stderr)
    plans = compile_program(program)
    print(f"ok: {len(program.rules)} rule(s), {len(plans)} plan(s)")
    if args.explain:
        for plan in plans:
            print(plan.explain())
    return EXIT_OK


def cmd_solve(args) -> int:
    program = _load_program(args.program)
    facts = _load_facts(args.facts)
    config = _engine_config(args.workers, args.partitions)
    modes = ["optimized", "naive"] if args.mode == "both" else [args.mode]
    results = {}
    for mode in modes:
        engine = Engine(config)
        try:
            results[mode] = solve(program, facts, options=SolveOptions(mode=mode), engine=engine)
            if args.trace:
                for line in results[mode].stats.trace_lines():
                    print(f"{mode}: {line}")
                for line in engine.stats_lines():
                    print(f"{mode}: job {line}")
        finally:
            engine.close()
    primary = results[modes[0]]
    out = Path(args.out)
    _write_atoms(out.with_name(out.name + ".true"), primary.true_facts)
    _write_atoms(out.with_name(out.name + ".undef"), primary.undefined_facts)
    print(
        f"true={primary.true_facts.count()} undefined={primary.undefined_facts.count()} "
        f"steps={primary.stats.inference_steps} jobs={primary.stats.jobs_total}"
    )
    if args.mode == "both":
        if partitions_agree(results["optimized"], results["naive"]):
            print("agreement: ok")
        else:
            print("agreement: MISMATCH between naive and optimized drivers", file=sys.stderr)
            return EXIT_RUNTIME
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.dist == "cycle":
        facts = bench_mod.gen_cycle(args.n)
    elif args.dist == "tree":
        facts = bench_mod.gen_tree(args.n)
    else:
        facts = bench_mod.gen_chain(args.n, args.k)
    from .program import facts_to_text

    Path(args.out).write_text(facts_to_text(facts), encoding="utf-8")
    print(f"wrote {len(facts)} facts to {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    config = bench_mod.BenchConfig(
        test=args.test,
        n=args.n,
        k=args.k,
        mode=args.mode,
        workers=args.workers,
        partitions=args.partitions if args.partitions > 0 else args.workers,
        reps=args.reps,
    )
    rows = bench_mod.run_bench(config, csv_path=args.csv)
    for row in rows:
        print(
            f"{row.test} n={row.n} k={row.k} {row.mode} rep={row.rep}: "
            f"{row.wall_ms:.1f} ms, steps={row.steps}, jobs={row.jobs}, "
            f"true={row.true_count}, undefined={row.undefined_count}"
        )
    if args.summary:
        print(bench_mod.summarize(args.csv), end="")
    return EXIT_OK


def cmd_wordcount(args) -> int:
    lines: list[str] = []
    for path in args.files:
        lines.extend(Path(path).read_text(encoding="utf-8").splitlines())
    engine = Engine(_engine_config(args.workers, args.partitions))
    try:
        counts = wordcount(engine, lines)
    finally:
        engine.close()
    for word in sorted(counts):
        print(f"{word}\t{counts[word]}")
    return EXIT_OK


_COMMANDS = {
    "check": cmd_check,
    "solve": cmd_solve,
    "generate": cmd_generate,
    "bench": cmd_bench,
    "wordcount": cmd_wordcount,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except ProgramError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
