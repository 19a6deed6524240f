"""Command-line entry point.

Every subcommand prints records with the four fields tick, event, ctx and
detail, as ``tick=.. event=.. ctx=.. detail=..`` lines or as JSON lines.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .dsl import (DiagnosticError, ScenarioDocument, SystemDocument, build_system, link_scenario,
                  parse_atom, parse_scenario, parse_system)
from .logic import GroundingError, ManagementError, UpdateContractError
from .query import EXISTS, FORALL, QuerySpec, decide_query
from .runtime import run_scenario
from .system import SYSTEM, Event, StepError, ValidationError, grounded_equilibrium

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _grade(text: str) -> Optional[int]:
    if text in ("inf", "infinity"):
        return None
    return _positive(text)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("system", help="system description (.mcx)")
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--depth-bound", type=_positive, default=None)
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = _Parser(prog="mcsim", description="Managed multi-context system engine and simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("check", parents=[common], help="parse and validate")
    c.add_argument("--scenario")
    e = sub.add_parser("equilibrium", parents=[common], help="grounded equilibrium of a grade")
    e.add_argument("--grade", type=_grade, default=None, help="positive integer or inf")
    e.add_argument("--cap", type=_positive, default=None)
    r = sub.add_parser("run", parents=[common], help="run a scenario")
    r.add_argument("--scenario", required=True)
    r.add_argument("--persistence", choices=("on", "off"), default="on")
    r.add_argument("--mode", choices=("async", "sync"), default="async")
    q = sub.add_parser("query", parents=[common], help="decide an exists/forall belief query")
    q.add_argument("--ctx", required=True)
    q.add_argument("--belief", required=True)
    q.add_argument("--mode", choices=(EXISTS, FORALL), default=EXISTS)
    q.add_argument("--horizon", type=_positive, required=True)
    q.add_argument("--scenario")
    t = sub.add_parser("trace", parents=[common], help="print run-time versions of a rule")
    t.add_argument("--scenario", required=True)
    t.add_argument("--rule", required=True)
    t.add_argument("--persistence", choices=("on", "off"), default="on")
    return p


class _Out:
    def __init__(self, fmt: str, stream: TextIO):
        self.fmt = fmt
        self.stream = stream

    def event(self, ev: Event) -> None:
        if self.fmt == "json":
            self.stream.write(json.dumps(ev.as_dict(), sort_keys=True) + "\n")
        else:
            self.stream.write(ev.line() + "\n")

    def record(self, tick: int, kind: str, ctx: str, detail: str) -> None:
        self.event(Event(tick, kind, ctx, detail))


def _load(path: str, depth_bound: Optional[int] = None) -> SystemDocument:
    doc = parse_system(Path(path).read_text(encoding="utf-8"))
    if depth_bound is not None:
        doc.config["depth_bound"] = depth_bound
    return doc


def _load_scenario(path: str, doc: SystemDocument) -> ScenarioDocument:
    sc = parse_scenario(Path(path).read_text(encoding="utf-8"))
    problems = link_scenario(sc, doc)
    if problems:
        raise DiagnosticError(problems)
    return sc


def _beliefs(out: _Out, state) -> None:
    for name in sorted(state.beliefs):
        b = state.beliefs[name]
        text = "{" + ", ".join(map(str, b.sorted())) + "}"
        out.record(state.T, "beliefs", name, text + (" truncated" if b.truncated else ""))


def _cmd_check(args, out: _Out) -> int:
    doc = _load(args.system, args.depth_bound)
    build_system(doc)
    if args.scenario:
        _load_scenario(args.scenario, doc)
    out.record(0, "ok", SYSTEM, f"{len(doc.contexts)} contexts")
    return EXIT_OK


def _cmd_equilibrium(args, out: _Out) -> int:
    doc = _load(args.system, args.depth_bound)
    if args.cap is not None:
        doc.config["cap"] = args.cap
    result = grounded_equilibrium(build_system(doc), args.grade)
    _beliefs(out, result.state)
    truncated = any(b.truncated for b in result.state.beliefs.values())
    grade = "inf" if args.grade is None else str(args.grade)
    out.record(result.state.T, "equilibrium", SYSTEM,
               f"grade={grade} steps={result.steps} fixpoint={str(result.reached_fixpoint).lower()} "
               f"truncated={str(truncated).lower()}")
    return EXIT_OK


def _cmd_run(args, out: _Out) -> int:
    doc = _load(args.system, args.depth_bound)
    sc = _load_scenario(args.scenario, doc)
    res = run_scenario(build_system(doc), sc.to_scenario(), seed=args.seed,
                       persistence=args.persistence == "on", mode=args.mode)
    for ev in res.events:
        out.event(ev)
    _beliefs(out, res.state)
    return EXIT_OK


def _cmd_query(args, out: _Out) -> int:
    doc = _load(args.system, args.depth_bound)
    actions = [{} for _ in range(args.horizon)]
    if args.scenario:
        sc = _load_scenario(args.scenario, doc)
        for t in sc.ticks:
            if 1 <= t.tick <= args.horizon:
                actions[t.tick - 1] = t.actions
    spec = QuerySpec(args.ctx, parse_atom(args.belief), args.horizon, actions, args.mode)
    result = decide_query(build_system(doc), spec, args.seed)
    for row in result.table:
        out.record(row.t, "row", args.ctx, f"equilibrium={str(row.equilibrium).lower()} "
                   f"member={str(row.member).lower()} digest={row.digest}")
    for note in result.report:
        out.record(args.horizon, "note", args.ctx, note)
    witness = "none" if result.witness is None else str(result.witness)
    out.record(args.horizon, "answer", args.ctx,
               f"{args.mode}={str(result.answer).lower()} witness={witness} belief={spec.belief}")
    return EXIT_OK


def _cmd_trace(args, out: _Out) -> int:
    doc = _load(args.system, args.depth_bound)
    sc = _load_scenario(args.scenario, doc)
    res = run_scenario(build_system(doc), sc.to_scenario(), seed=args.seed,
                       persistence=args.persistence == "on")
    found = False
    for rv in res.versions:
        rid = rv.rule_id
        if rid == args.rule or rid.startswith(args.rule + "["):
            found = True
            tick = rv.completed if rv.completed is not None else rv.records[-1].tick if rv.records else rv.start
            out.record(tick, "version", rv.owner, f"{rv.exec_id} {rid} {rv.status} {rv}")
    if not found:
        out.record(res.state.T, "version", SYSTEM, f"no run-time versions for {args.rule}")
    return EXIT_OK


COMMANDS = {"check": _cmd_check, "equilibrium": _cmd_equilibrium, "run": _cmd_run,
            "query": _cmd_query, "trace": _cmd_trace}


def run_cli(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
            stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except _Usage as exc:
        stderr.write(parser.format_usage() + str(exc) + "\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    out = _Out(args.format, stdout)
    try:
        return COMMANDS[args.command](args, out)
    except DiagnosticError as exc:
        for d in exc.diagnostics:
            stdout.write(str(d) + "\n")
        return EXIT_DIAGNOSTICS
    except OSError as exc:
        stderr.write(f"mcsim: {exc}\n")
        return EXIT_USAGE
    except (ValidationError, StepError, GroundingError, ManagementError, UpdateContractError,
            ValueError) as exc:
        stdout.write(f"error: {exc}\n")
        return EXIT_DIAGNOSTICS


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
