"""Command-line front end.

Exit codes: 0 clean, 1 smells found (detect) or changes applied/pending (fix),
2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import difflib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, TextIO

from smellfix import __version__
from smellfix.detectors import SmellInstance, SmellKind, build_report, detect
from smellfix.errors import RefactoringError, ReparseFailure, UnbalancedDelimiters
from smellfix.model import TestFileModel
from smellfix.parser import parse_test_file
from smellfix.pipeline import (
    discover_test_files,
    format_line_report,
    map_test_to_production,
    read_source,
    run_detection,
    write_csv_artifacts,
    write_line_report,
)
from smellfix.refactoring import DEFAULT_MESSAGE, FixPlanner, Patch, apply_patches, partition_patches, rewrite_file

EXIT_CLEAN, EXIT_FOUND, EXIT_ERROR = 0, 1, 2
MESSAGE_ENV = "SMELLFIX_MESSAGE"


@dataclass
class RunConfig:
    command: str
    paths: list[str] = field(default_factory=list)
    smell: str = "all"
    format: str = "human"
    message_template: str = ""
    write: bool = False
    out_dir: Optional[str] = None
    project: Optional[str] = None
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.message_template:
            self.message_template = os.environ.get(MESSAGE_ENV) or DEFAULT_MESSAGE

    @property
    def kinds(self) -> frozenset[SmellKind]:
        return SmellKind.parse(self.smell)


class _PathError(Exception):
    pass


def _collect(paths: list[str]) -> list[Path]:
    files: set[Path] = set()
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            files.update(discover_test_files(path))
        elif path.is_file():
            files.add(path)
        else:
            raise _PathError(f"no such file or directory: {raw}")
    return sorted(files, key=str)


def _load(path: Path, err: TextIO) -> Optional[TestFileModel]:
    try:
        return parse_test_file(str(path), read_source(path))
    except UnbalancedDelimiters as exc:
        print(f"smellfix: {exc}; file skipped", file=err)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"smellfix: cannot read {path}: {exc}", file=err)
    return None


def _describe(inst: SmellInstance) -> str:
    where = ",".join(map(str, inst.lines))
    head = f"{inst.file}:{where}: {inst.kind.value} in {inst.class_name}.{inst.method_name}"
    if inst.group_key:
        return f"{head}: {inst.group_key}"
    call = inst.assertions[0]
    return f"{head}: {call.method_name} without explanation message"


def cmd_detect(config: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        files = _collect(config.paths)
    except _PathError as exc:
        print(f"smellfix: {exc}", file=err)
        return EXIT_ERROR
    per_file = {}
    for path in files:
        model = _load(path, err)
        if model is not None:
            per_file[model.path] = detect(model, config.kinds)
    report = build_report(config.project or "", per_file)
    if config.format == "human":
        for inst in report.instances:
            print(_describe(inst), file=out)
    else:
        out.write(format_line_report(report, config.format))
    return EXIT_FOUND if report.instances else EXIT_CLEAN


def _plan_file(model: TestFileModel, config: RunConfig) -> tuple[FixPlanner, list[SmellInstance]]:
    return FixPlanner(model, config.message_template), detect(model, config.kinds)


def _diff(path: str, before: str, after: str) -> str:
    return "".join(
        difflib.unified_diff(
            before.splitlines(keepends=True), after.splitlines(keepends=True), path, path
        )
    )


def cmd_fix(config: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        files = _collect(config.paths)
    except _PathError as exc:
        print(f"smellfix: {exc}", file=err)
        return EXIT_ERROR
    status = EXIT_CLEAN
    for path in files:
        model = _load(path, err)
        if model is None:
            continue
        planner, instances = _plan_file(model, config)
        patches: list[Patch] = []
        skipped = 0
        for inst in instances:
            try:
                patches.extend(planner.plan(inst))
            except RefactoringError as exc:
                skipped += 1
                print(f"smellfix: skipped {_describe(inst)} ({exc})", file=err)
        accepted, rejected = partition_patches(patches)
        for patch in rejected:
            print(f"smellfix: skipped overlapping change in {path}: {patch.description}", file=err)
        if not instances:
            continue
        pending = skipped + len(rejected)
        try:
            if config.write:
                if accepted:
                    rewrite_file(path, accepted)
                print(f"{path}: applied {len(accepted)} change(s), {pending} left", file=out)
            else:
                after = apply_patches(model.raw_text, accepted, path=str(path))
                out.write(_diff(str(path), model.raw_text, after))
        except ReparseFailure as exc:
            print(f"smellfix: {exc}", file=err)
            status = EXIT_ERROR
            continue
        if status != EXIT_ERROR and (accepted or pending):
            status = EXIT_FOUND
    return status


def _context(source: str, lines: tuple[int, ...], radius: int = 2) -> str:
    text = source.splitlines()
    lo = max(1, lines[0] - radius)
    hi = min(len(text), lines[-1] + radius)
    marks = set(lines)
    return "\n".join(f"{'>' if n in marks else ' '} {n:5d} | {text[n - 1]}" for n in range(lo, hi + 1))


def cmd_review(
    config: RunConfig,
    input_fn: Optional[Callable[[str], str]] = None,
    out: Optional[TextIO] = None,
    err: Optional[TextIO] = None,
) -> int:
    """Walk through every instance, asking whether to apply its refactoring."""
    out, err = out or sys.stdout, err or sys.stderr
    if input_fn is None:
        if not sys.stdin.isatty():
            print("smellfix: review needs an interactive terminal; use `smellfix fix --write` instead", file=err)
            return EXIT_ERROR
        input_fn = input
    try:
        files = _collect(config.paths)
    except _PathError as exc:
        print(f"smellfix: {exc}", file=err)
        return EXIT_ERROR

    def ask(prompt: str) -> Optional[str]:
        try:
            return input_fn(prompt)
        except EOFError:
            return None

    accepted: dict[Path, list[Patch]] = {}
    accept_rest = False
    quit_ = False
    for path in files:
        if quit_:
            break
        model = _load(path, err)
        if model is None:
            continue
        planner, instances = _plan_file(model, config)
        for inst in instances:
            try:
                patches = planner.plan(inst)
            except RefactoringError as exc:
                print(f"{_describe(inst)}\n  cannot refactor: {exc}", file=out)
                continue
            if not accept_rest:
                preview = apply_patches(model.raw_text, patches, path=str(path), check=False)
                print(_describe(inst), file=out)
                print(_context(model.raw_text, inst.lines), file=out)
                out.write(_diff(str(path), model.raw_text, preview))
                answer = ask("Apply? [y]es, [n]o, [a]ll remaining, [q]uit: ")
                choice = (answer or "q").strip().lower()[:1]
                if choice == "q":
                    quit_ = True
                    break
                if choice == "a":
                    accept_rest = True
                elif choice != "y":
                    continue
                elif inst.kind is SmellKind.ASSERTION_ROULETTE:
                    default = planner.default_message(inst)
                    message = ask(f"Message [{default}]: ")
                    if message and message.strip():
                        patches = planner.plan(inst, message.strip())
            accepted.setdefault(path, []).extend(patches)

    status = EXIT_CLEAN
    for path, patches in accepted.items():
        try:
            rewrite_file(path, patches)
            print(f"{path}: applied {len(partition_patches(patches)[0])} change(s)", file=out)
        except ReparseFailure as exc:
            print(f"smellfix: {exc}", file=err)
            status = EXIT_ERROR
    return status


def cmd_pipeline(config: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if len(config.paths) != 1 or not Path(config.paths[0]).is_dir():
        print("smellfix: pipeline needs exactly one project directory", file=err)
        return EXIT_ERROR
    root = Path(config.paths[0])
    out_dir = Path(config.out_dir or "smellfix-out")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        tests = discover_test_files(root)
        mappings = map_test_to_production(tests, root, config.project)
        report = run_detection(mappings, config.kinds, jobs=config.jobs)
        written = write_csv_artifacts(report, mappings, out_dir)
        fmt = "csv" if config.format == "csv" else "json"
        written[f"smells.{fmt}"] = write_line_report(report, out_dir / f"smells.{fmt}", fmt)
    except OSError as exc:
        print(f"smellfix: cannot write to {out_dir}: {exc}", file=err)
        return EXIT_ERROR
    for note in report.diagnostics:
        print(f"smellfix: {note}", file=err)
    summary = {k.value: v for k, v in report.summary.items()}
    names = ", ".join(sorted(written))
    print(f"{len(tests)} test file(s); {json.dumps(summary)}; wrote {names} to {out_dir}", file=out)
    return EXIT_CLEAN


COMMANDS = {"detect": cmd_detect, "fix": cmd_fix, "review": cmd_review, "pipeline": cmd_pipeline}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smellfix",
        description="Detect and refactor Assertion Roulette and Duplicate Assert in JUnit 4 tests.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, formats: tuple[str, ...] = ("human", "json", "csv")) -> None:
        p.add_argument("paths", nargs="+", help="Java files or directories")
        p.add_argument("--smell", choices=("ar", "da", "all"), default="all", help="smell to handle (default: all)")
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for detection")
        p.add_argument("--project", help="project name used in reports")

    p = sub.add_parser("detect", help="report smells with their lines")
    common(p)
    for name, help_ in (("fix", "refactor every detected smell"), ("review", "refactor interactively")):
        p = sub.add_parser(name, help=help_)
        common(p, ("human",))
        p.add_argument(
            "--message",
            dest="message_template",
            default="",
            help=f"message for AR fixes; {{method}} and {{line}} are substituted (env {MESSAGE_ENV})",
        )
        if name == "fix":
            p.add_argument("--write", action="store_true", help="rewrite files instead of printing a diff")
    p = sub.add_parser("pipeline", help="tsDetect-style batch run writing CSV artifacts")
    common(p, ("json", "csv"))
    p.add_argument("--out-dir", required=True)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="smellfix: %(message)s", stream=sys.stderr
    )
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    config = RunConfig(**fields)
    return COMMANDS[config.command](config)


if __name__ == "__main__":
    sys.exit(main())
