"""Command line entry point.

Exit codes: 0 consistent, 1 violation or deadlock, 2 input error,
3 exploration limit or resource exhaustion.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .export import grammar_dump, models_dot
from .scenario import Report, Scenario, ScenarioError, build_grammar, load_scenario, run_pipeline, validate_scenario
from .statespace import explore, export_dot, label_states

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3

EXPORT_FILES = {
    "statespace-dot": "statespace.dot",
    "models-dot": "models.dot",
    "grammar-dump": "grammar.txt",
}


def _load(path, err: TextIO) -> Optional[Scenario]:
    try:
        scn = load_scenario(path)
    except ScenarioError as exc:
        _print_violations(exc.violations, err)
        return None
    problems = validate_scenario(scn)
    if problems:
        _print_violations(problems, err)
        return None
    return scn


def _print_violations(violations, err: TextIO) -> None:
    print(f"invalid scenario ({len(violations)} problem(s)):", file=err)
    for v in violations:
        print(f"  - {v}", file=err)


def format_report(report: Report) -> str:
    configs = report.kripke.ts.configurations
    lines = [
        f"states: {report.states}  transitions: {report.transitions}  "
        f"truncated: {'yes' if report.truncated else 'no'}",
    ]
    if report.deadlocks:
        lines.append(f"deadlocks: {len(report.deadlocks)}")
        lines += [f"  s{d}  {configs[d]}" for d in report.deadlocks]
    else:
        lines.append("deadlocks: none")
    tags = {"yes": "HOLDS", "no": "FAILS", "unknown": "UNKNOWN"}
    for c in report.constraints:
        lines.append(f"[{tags[c.verdict.holds]}] {c.name}: {c.text}")
        ev = c.verdict.evidence
        if ev is None:
            continue
        title = "counterexample" if c.verdict.holds == "no" else "witness"
        lines.append(f"  {title} ({ev.kind}):")
        for k, step in enumerate(ev.steps):
            marker = "*" if ev.cycle_start == k else " "
            lines.append(f"   {marker}s{step.state}  {configs[step.state]}")
            if step.rule is not None:
                lines.append(f"      --[{step.rule}]-->")
        if ev.kind == "lasso":
            lines.append(f"      (back to s{ev.steps[ev.cycle_start].state})")
    verdict = "CONSISTENT" if report.consistent else "INCONSISTENT"
    if report.truncated:
        verdict = "UNKNOWN (state space truncated)"
    lines.append(f"result: {verdict}")
    return "\n".join(lines) + "\n"


def run_check(path, as_json: bool = False, dot_dir=None, max_states: Optional[int] = None,
              out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> tuple[Optional[Report], int]:
    scn = _load(path, err)
    if scn is None:
        return None, EXIT_INPUT
    limits = scn.limits if max_states is None else replace(scn.limits, max_states=max_states)
    try:
        report = run_pipeline(scn, limits)
    except MemoryError:
        print("out of memory during exploration", file=err)
        return None, EXIT_LIMIT
    if as_json:
        out.write(json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        out.write(format_report(report))
    if dot_dir is not None:
        Path(dot_dir).mkdir(parents=True, exist_ok=True)
        (Path(dot_dir) / EXPORT_FILES["statespace-dot"]).write_text(export_dot(report.kripke))
    return report, report.exit_code


def run_export(path, target: str, out_dir, max_states: Optional[int] = None,
               err: TextIO = sys.stderr) -> int:
    if target not in EXPORT_FILES:
        print(f"unknown export target {target!r}", file=err)
        return EXIT_INPUT
    scn = _load(path, err)
    if scn is None:
        return EXIT_INPUT
    if target == "models-dot":
        text = models_dot(scn)
    elif target == "grammar-dump":
        text = grammar_dump(build_grammar(scn), scn)
    else:
        limits = scn.limits if max_states is None else replace(scn.limits, max_states=max_states)
        ts = explore(build_grammar(scn), limits)
        text = export_dot(label_states(ts, scn.propositions))
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    (Path(out_dir) / EXPORT_FILES[target]).write_text(text)
    return EXIT_OK


def run_validate(path, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    scn = _load(path, err)
    if scn is None:
        return EXIT_INPUT
    pairs = sum(len(s.pairs) for s in scn.synchronizations)
    print(f"ok: {len(scn.state_machines)} state machine(s), {len(scn.petri_nets)} petri net(s), "
          f"{pairs} synchronized pair(s), {len(scn.constraints)} constraint(s)", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetcons",
                                     description="Behavioral consistency checking for state machines and Petri nets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="explore the composed models and check all constraints")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--dot", metavar="DIR", help="also write the state space as DOT into DIR")
    p.add_argument("--max-states", type=int, metavar="N")

    p = sub.add_parser("export", help="write DOT renderings or the composed grammar")
    p.add_argument("file")
    p.add_argument("--target", required=True, choices=sorted(EXPORT_FILES))
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--max-states", type=int, metavar="N")

    p = sub.add_parser("validate", help="validate a scenario without exploring it")
    p.add_argument("file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "max_states", None) is not None and args.max_states < 1:
        print("--max-states must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    if args.command == "check":
        return run_check(args.file, args.json, args.dot, args.max_states)[1]
    if args.command == "export":
        return run_export(args.file, args.target, args.out, args.max_states)
    return run_validate(args.file)


if __name__ == "__main__":
    sys.exit(main())
