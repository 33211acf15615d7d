"""Command-line front end: check, run, and validate grade universes.

Exit codes: 0 success (including a reported divergence), 1 a program was
rejected by the checker, 2 a parse/universe/law failure, 3 an I/O error,
4 an instrumented run got stuck.
"""

from __future__ import annotations

import argparse
import json
import sys

from .hetero import GradeUniverse, UniverseError, check_universe_laws, default_universe, load_universe
from .grades import GradeError, validate_algebra
from .props import stripped_table
from .runtime import Enumerate, GradedConfig, Minimal, StdConfig, graded_run, std_run
from .syntax import Program, SyntaxErrorGFJ, erase, format_expr, parse_program, strip_ascriptions
from .typecheck import (
    CheckError,
    annotate_expr,
    annotate_table,
    check_program,
    check_table,
    elaborate_table,
)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_BAD_INPUT = 2
EXIT_IO = 3
EXIT_STUCK = 4


def _load_universe(path: str | None) -> GradeUniverse:
    if path is None:
        return default_universe()
    return load_universe(path)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def cmd_check(args) -> int:
    try:
        text = _read(args.file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        universe = _load_universe(args.universe)
        program = parse_program(text, universe)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SyntaxErrorGFJ, UniverseError, GradeError, json.JSONDecodeError,
            KeyError, ValueError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    diags = check_table(universe, program.table)
    if not diags:
        try:
            check_program(universe, program.table, program)
        except CheckError as exc:
            diags = [exc.diag]
    if args.json:
        print(json.dumps([d.to_json() for d in diags], sort_keys=True))
    else:
        for d in diags:
            print(d.render(args.file))
    return EXIT_REJECTED if diags else EXIT_OK


def cmd_run(args) -> int:
    try:
        text = _read(args.file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        universe = _load_universe(args.universe)
        program = parse_program(text, universe)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SyntaxErrorGFJ, UniverseError, GradeError, json.JSONDecodeError,
            KeyError, ValueError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    if args.standard:
        return _run_standard(args, universe, program)

    if args.unchecked:
        try:
            ann = annotate_table(universe, program.table)
            main = annotate_expr(universe, program.table, {}, program.main)
        except CheckError as exc:
            print(exc.diag.render(args.file), file=sys.stderr)
            return EXIT_BAD_INPUT
    else:
        diags = check_table(universe, program.table)
        if not diags:
            try:
                result = check_program(universe, program.table, program)
            except CheckError as exc:
                diags = [exc.diag]
        if diags:
            for d in diags:
                print(d.render(args.file), file=sys.stderr)
            return EXIT_REJECTED
        ann = elaborate_table(universe, program.table)
        main = result.elaborated

    policy = Enumerate() if args.policy == "search" else Minimal()
    run = graded_run(universe, ann, GradedConfig.make(main, {}), program.mainGrade,
                     policy, args.fuel, want_trace=args.trace)

    payload = {
        "outcome": run.outcome,
        "steps": run.steps,
        "value": (format_expr(erase(run.config.expr))
                  if run.outcome == "final" else None),
        "env": run.final_env_grades(),
    }
    if run.reason is not None:
        payload["reason"] = run.reason.render()
    if args.trace and run.trace is not None:
        payload["trace"] = [t.render(i, program.mainGrade)
                            for i, t in enumerate(run.trace)]
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        if args.trace and run.trace is not None:
            for line in payload["trace"]:
                print(line)
        if run.outcome == "final":
            print(payload["value"])
            print(" ".join(f"{x}:{g}" for x, g in payload["env"].items()))
        elif run.outcome == "stuck":
            print(f"stuck after {run.steps} steps: {payload['reason']}")
        else:
            print(f"divergent within fuel ({run.steps} steps)")
    return EXIT_STUCK if run.outcome == "stuck" else EXIT_OK


def _run_standard(args, universe, program: Program) -> int:
    table = stripped_table(program.table)
    ann = annotate_table(universe, table)
    main = strip_ascriptions(program.main)
    outcome, cfg, steps = std_run(ann, StdConfig.make(main, {}), args.fuel)
    payload = {"outcome": "final" if outcome == "final" else outcome,
               "steps": steps,
               "value": format_expr(cfg.expr) if outcome == "final" else None}
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    elif outcome == "final":
        print(payload["value"])
    elif outcome == "stuck":
        print(f"stuck after {steps} steps")
    else:
        print(f"divergent within fuel ({steps} steps)")
    return EXIT_STUCK if outcome == "stuck" else EXIT_OK


def cmd_laws(args) -> int:
    try:
        universe = load_universe(args.universe_file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UniverseError, GradeError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"{args.universe_file}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    lines = []
    ok = True
    for kind in sorted(universe.kinds):
        report = validate_algebra(universe.kinds[kind], minimum_samples=args.samples)
        for r in report.results:
            ok = ok and r.ok
            lines.append({"scope": f"kind {kind}", "law": r.law, "ok": r.ok,
                          "witness": list(r.witness) if r.witness else None})
    uni_report = check_universe_laws(universe)
    for r in uni_report.results:
        ok = ok and r.ok
        lines.append({"scope": "universe", "law": r.law, "ok": r.ok,
                      "witness": list(r.witness) if r.witness else None})
    if args.json:
        print(json.dumps(lines, sort_keys=True))
    else:
        for entry in lines:
            status = "PASS" if entry["ok"] else "FAIL"
            suffix = f" witness={entry['witness']}" if entry["witness"] else ""
            print(f"{status} {entry['scope']}: {entry['law']}{suffix}")
    return EXIT_OK if ok else EXIT_BAD_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradefj",
                                     description="Resource-aware Featherweight Java")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="typecheck a program")
    p_check.add_argument("file")
    p_check.add_argument("--universe", help="grade-universe config (JSON)")
    p_check.add_argument("--json", action="store_true")
    p_check.set_defaults(fn=cmd_check)

    p_run = sub.add_parser("run", help="run a program under the instrumented semantics")
    p_run.add_argument("file")
    p_run.add_argument("--universe")
    p_run.add_argument("--policy", choices=["minimal", "search"], default="minimal")
    p_run.add_argument("--fuel", type=int, default=100_000)
    p_run.add_argument("--trace", action="store_true")
    p_run.add_argument("--standard", action="store_true",
                       help="use the grade-free standard semantics")
    p_run.add_argument("--unchecked", action="store_true",
                       help="skip typechecking; run the written annotations")
    p_run.add_argument("--json", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_laws = sub.add_parser("laws", help="validate a grade universe and its laws")
    p_laws.add_argument("universe_file")
    p_laws.add_argument("--samples", type=int, default=1000)
    p_laws.add_argument("--json", action="store_true")
    p_laws.set_defaults(fn=cmd_laws)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "fuel", 1) <= 0:
        parser.error("--fuel must be positive")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
