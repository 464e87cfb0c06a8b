"""Command-line interface: run automata, check files, generate lock benches.

Exit codes: 0 clean end, 1 usage/parse/config error, 2 monitor attach
refused, 3 unhandled nondeterminism, 4 unhandled deadlock, 10 a bad
verdict occurred, 11 an ugly verdict is latched (and no bad), 12
monitoring ended unknown under --strict.
"""

from __future__ import annotations

import argparse
import sys

from .automata import Automaton, is_complete, is_deterministic, state_graph
from .hoa import HoaParseError, format_acceptance, parse, serialize
from .labels import CapacityError
from .locks import LockScenario, ScenarioError, ap_layout, emit_monitors, generate_trace
from .monitoring import MonitorAttachError, Verdict, attach_monitor
from .runtime import (
    Config,
    ConfigError,
    InputClosedError,
    LogEvent,
    StepEvent,
    TraceError,
    VerdictEvent,
    build_universe,
    load_config,
    prepare_runners,
    resolve_bindings,
    run_loop,
)
from .traps import bsccs, build_index

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ATTACH_REFUSED = 2
EXIT_NONDETERMINISM = 3
EXIT_DEADLOCK = 4
EXIT_BAD = 10
EXIT_UGLY = 11
EXIT_UNKNOWN_STRICT = 12


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoarun",
        description="Execute and monitor omega-automata in the HOA format.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute automata against input drivers")
    run.add_argument("hoa", nargs="+", help="HOA files ('-' for standard input)")
    run.add_argument("--config", help="INI run configuration")
    run.add_argument("--trace", help="bind every proposition to this trace file")
    run.add_argument("--steps", type=int, help="stop after N steps")
    run.add_argument("--seed", type=int, help="global seed (overrides config)")
    run.add_argument("--monitor", action="store_true", help="attach acceptance monitors")
    run.add_argument(
        "--complete",
        action="store_true",
        help="complete incomplete automata with stuttering self-loops",
    )
    run.add_argument("--verbose", action="store_true", help="print one STEP line per step")
    run.add_argument(
        "--strict",
        action="store_true",
        help="exit 12 when monitoring ends without a conclusive verdict",
    )
    run.add_argument(
        "--negated",
        action="store_true",
        help="report good verdicts as VIOLATION lines (for monitors that "
        "accept the violating runs, like those from gen-locks)",
    )
    run.add_argument(
        "--allow-empty-accsets",
        action="store_true",
        help="accept conditions over empty acceptance sets (Fin: holds, Inf: fails)",
    )

    check = sub.add_parser("check", help="parse automata and report their properties")
    check.add_argument("hoa", nargs="+", help="HOA files ('-' for standard input)")
    check.add_argument("--allow-empty-accsets", action="store_true")

    locks = sub.add_parser("gen-locks", help="generate a lock-scenario trace and monitors")
    locks.add_argument("--n", type=int, required=True, help="thread/lock count (power of two)")
    locks.add_argument("--len", type=int, required=True, dest="length", help="trace length")
    locks.add_argument("--violations", type=int, default=0, help="faults to inject")
    locks.add_argument(
        "--fault",
        choices=("double-acquire", "unreleased-at-end"),
        default="double-acquire",
        help="kind of fault to inject",
    )
    locks.add_argument("--seed", type=int, default=0)
    locks.add_argument("--out-trace", required=True, help="trace output path")
    locks.add_argument("--out-monitors", required=True, help="HOA output path")
    return parser


def _read_documents(paths, allow_empty_acc_sets):
    automata: list[Automaton] = []
    for path in paths:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, "rb") as handle:
                text = handle.read().decode("utf-8", errors="replace")
        try:
            doc = parse(text, allow_empty_acc_sets=allow_empty_acc_sets)
        except HoaParseError as exc:
            for diagnostic in exc.diagnostics:
                print(f"{path}:{diagnostic}", file=sys.stderr)
            raise
        for diagnostic in doc.warnings:
            print(f"{path}:{diagnostic}", file=sys.stderr)
        automata.extend(doc.automata)
    return automata


def _cmd_run(args) -> int:
    try:
        automata = _read_documents(args.hoa, args.allow_empty_accsets)
    except (HoaParseError, OSError) as exc:
        if isinstance(exc, OSError):
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    config = Config()
    if args.config:
        try:
            config = load_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
    seed = args.seed if args.seed is not None else (config.seed or 0)
    max_steps = args.steps if args.steps is not None else config.max_steps

    if args.monitor:
        monitored = []
        for automaton in automata:
            try:
                completed, monitor = attach_monitor(automaton, complete=args.complete)
            except MonitorAttachError as exc:
                label = automaton.name or str(len(monitored))
                print(f"error: cannot monitor {label}: {exc}", file=sys.stderr)
                return EXIT_ATTACH_REFUSED
            except CapacityError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_ERROR
            monitored.append((completed, monitor))
        automata = [aut for aut, _ in monitored]

    universe = build_universe(automata)
    try:
        runners = prepare_runners(automata, universe, config.hooks)
        if args.monitor:
            for runner, (_, monitor) in zip(runners, monitored):
                runner.monitor = monitor
        bindings = resolve_bindings(
            universe, config, seed=seed, trace_path=args.trace
        )
    except (ConfigError, TraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    good_word = "VIOLATION" if args.negated else None

    def on_event(event) -> None:
        if isinstance(event, VerdictEvent):
            if good_word and event.verdict is Verdict.GOOD:
                print(f"VIOLATION {event.runner} @{event.step}")
            else:
                print(f"VERDICT {event.runner} {event.verdict.value} @{event.step}")
        elif isinstance(event, LogEvent):
            print(f"LOG {event.message}")
        elif args.verbose and isinstance(event, StepEvent):
            states = " ".join(f"{label}:{state}" for label, state in event.states)
            print(f"STEP {event.step} {event.bits} | {states}")

    try:
        report = run_loop(
            runners, bindings, seed=seed, max_steps=max_steps, on_event=on_event
        )
    except (TraceError, ConfigError, InputClosedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if report.reason == "nondeterminism":
        print(
            f"error: unhandled nondeterminism in {report.fatal_runner} "
            f"at step {report.steps}",
            file=sys.stderr,
        )
        return EXIT_NONDETERMINISM
    if report.reason == "deadlock":
        print(
            f"error: deadlock in {report.fatal_runner} at step {report.steps}",
            file=sys.stderr,
        )
        return EXIT_DEADLOCK
    if report.reason == "halt":
        return report.halt_code or 0
    if any(event.verdict is Verdict.BAD for event in report.verdict_events):
        return EXIT_BAD
    if any(summary.final_verdict is Verdict.UGLY for summary in report.runners):
        return EXIT_UGLY
    if args.strict and args.monitor and any(
        summary.final_verdict is Verdict.UNKNOWN for summary in report.runners
    ):
        return EXIT_UNKNOWN_STRICT
    return EXIT_OK


def _yes_no(value: bool) -> str:
    return "yes" if value else "no"


def _cmd_check(args) -> int:
    failed = False
    for path in args.hoa:
        try:
            automata = _read_documents([path], args.allow_empty_accsets)
        except (HoaParseError, OSError) as exc:
            if isinstance(exc, OSError):
                print(f"error: {exc}", file=sys.stderr)
            failed = True
            continue
        for idx, automaton in enumerate(automata):
            label = f"{path}[{idx}]"
            if automaton.name:
                label += f" {automaton.name!r}"
            try:
                deterministic = _yes_no(is_deterministic(automaton))
                complete = _yes_no(is_complete(automaton))
            except CapacityError:
                deterministic = complete = "capacity-exceeded"
            index = build_index(state_graph(automaton), automaton.initial)
            print(
                f"{label}: states={automaton.num_states} "
                f"edges={len(automaton.transitions)} "
                f"deterministic={deterministic} complete={complete} "
                f"bsccs={len(bsccs(index))} "
                f"acceptance={format_acceptance(automaton.condition)}"
            )
    return EXIT_ERROR if failed else EXIT_OK


def _cmd_gen_locks(args) -> int:
    try:
        scenario = LockScenario(
            n=args.n,
            length=args.length,
            violations=args.violations,
            fault_kind=args.fault,
            seed=args.seed,
        )
        trace = generate_trace(scenario)
        monitors = emit_monitors(args.n)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        with open(args.out_trace, "w", encoding="utf-8") as handle:
            handle.write(trace)
        with open(args.out_monitors, "w", encoding="utf-8") as handle:
            handle.write(serialize(monitors))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print("APs: " + " ".join(ap_layout(args.n)))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "gen-locks":
        return _cmd_gen_locks(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_ERROR


def entry() -> None:
    sys.exit(main())
