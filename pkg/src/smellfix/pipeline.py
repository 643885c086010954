"""Batch flow: find test files, map them to production classes, detect, serialize.

Output files (all UTF-8, LF line endings, standard CSV quoting):

* ``tests.csv``   one test file path per row, no header
* ``classes.csv`` ``project,test_path,production_path``
* ``results.csv`` ``project,test_path,production_path,AssertionRoulette,DuplicateAssert``
  with ``true``/``false`` per file
* ``smells.json`` / ``smells.csv`` one record per smell instance with its lines

The CSV layouts follow the tsDetect idea but are not bit-compatible with it.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from smellfix.detectors import SmellInstance, SmellKind, SmellReport, build_report, detect, find_nested_duplicates
from smellfix.errors import UnbalancedDelimiters
from smellfix.lexer import TokenKind, lex
from smellfix.parser import parse_test_file

log = logging.getLogger(__name__)

_TEST_NAME = re.compile(r"^(?:Test\w*|\w*Tests?)\.java$")
LINE_REPORT_FIELDS = ("kind", "file", "class", "method", "lines", "group_key")


@dataclass(frozen=True)
class TestProductionMapping:
    project: str
    test_path: str
    production_path: Optional[str] = None

    __test__ = False


def has_test_annotation(source: str) -> bool:
    """True if *source* carries a real ``@Test`` annotation (not in a comment or string)."""
    sig = [t for t in lex(source) if not t.is_trivia]
    for i, tok in enumerate(sig[:-1]):
        if tok.kind is not TokenKind.ANNOTATION:
            continue
        j = i + 1
        name = sig[j].text
        while j + 2 < len(sig) and sig[j + 1].is_punct(".") and sig[j + 2].kind is TokenKind.IDENTIFIER:
            j += 2
            name = sig[j].text
        if name == "Test":
            return True
    return False


def read_source(path: Path | str) -> str:
    """Read a Java file as UTF-8 without newline translation."""
    return Path(path).read_bytes().decode("utf-8")


def discover_test_files(root: Path | str) -> list[Path]:
    root = Path(root)
    found = []

    def _onerror(exc: OSError) -> None:
        log.warning("cannot read %s: %s", exc.filename, exc.strerror)

    for dirpath, dirnames, filenames in os.walk(root, onerror=_onerror):
        dirnames[:] = [d for d in dirnames if not d.startswith(".")]
        for name in filenames:
            if not name.endswith(".java"):
                continue
            path = Path(dirpath, name)
            if _TEST_NAME.match(name):
                found.append(path)
                continue
            try:
                if has_test_annotation(read_source(path)):
                    found.append(path)
            except (OSError, UnicodeDecodeError) as exc:
                log.warning("cannot read %s: %s", path, exc)
    return sorted(found, key=str)


def production_name(test_file: str) -> Optional[str]:
    """``TestFoo.java`` / ``FooTest.java`` / ``FooTests.java`` -> ``Foo.java``."""
    stem = Path(test_file).stem
    for suffix in ("Tests", "Test"):
        if stem.endswith(suffix) and len(stem) > len(suffix):
            return stem[: -len(suffix)] + ".java"
    if stem.startswith("Test") and len(stem) > 4:
        return stem[4:] + ".java"
    return None


def map_test_to_production(
    tests: Sequence[Path | str], root: Path | str, project: Optional[str] = None
) -> list[TestProductionMapping]:
    root = Path(root)
    project = project or root.resolve().name
    by_name: dict[str, list[Path]] = {}
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = [d for d in dirnames if not d.startswith(".")]
        for name in filenames:
            if name.endswith(".java"):
                by_name.setdefault(name, []).append(Path(dirpath, name))
    mappings = []
    for test in tests:
        target = production_name(str(test))
        hits = sorted(by_name.get(target, []), key=str) if target else []
        production = None
        if len(hits) == 1:
            production = str(hits[0])
        elif len(hits) > 1:
            log.warning("%s: ambiguous production class %s (%d candidates)", test, target, len(hits))
        else:
            log.info("%s: no production class found", test)
        mappings.append(TestProductionMapping(project, str(test), production))
    return mappings


def analyze_file(path: str, smells: Iterable[SmellKind]) -> tuple[list[SmellInstance], list[str]]:
    """Parse and detect one file; failures become diagnostics instead of exceptions."""
    try:
        model = parse_test_file(path, read_source(path))
    except UnbalancedDelimiters as exc:
        return [], [f"{exc}; file skipped"]
    except (OSError, UnicodeDecodeError) as exc:
        return [], [f"{path}: cannot read: {exc}"]
    kinds = frozenset(smells)
    diagnostics = []
    if SmellKind.DUPLICATE_ASSERT in kinds:
        diagnostics = [d.describe() for d in find_nested_duplicates(model)]
    return detect(model, kinds), diagnostics


def run_detection(
    mappings: Sequence[TestProductionMapping],
    smells: Iterable[SmellKind] = tuple(SmellKind),
    *,
    project: Optional[str] = None,
    jobs: int = 1,
) -> SmellReport:
    kinds = frozenset(smells)
    if project is None:
        project = mappings[0].project if mappings else ""
    paths = [m.test_path for m in mappings]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: analyze_file(p, kinds), paths))
    else:
        results = [analyze_file(p, kinds) for p in paths]
    per_file = {}
    diagnostics = []
    for path, (instances, notes) in zip(paths, results):
        per_file[path] = instances
        diagnostics.extend(notes)
    return build_report(project, per_file, diagnostics)


def _csv_text(rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.write_bytes(text.encode("utf-8"))
    return path


def _flag(value: bool) -> str:
    return "true" if value else "false"


def write_csv_artifacts(
    report: SmellReport, mappings: Sequence[TestProductionMapping], out_dir: Path | str
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    flags = report.class_flags
    tests = [(m.test_path,) for m in mappings]
    classes = [("project", "test_path", "production_path")]
    classes += [(m.project, m.test_path, m.production_path or "") for m in mappings]
    results = [("project", "test_path", "production_path", *(k.value for k in SmellKind))]
    for m in mappings:
        results.append(
            (
                m.project,
                m.test_path,
                m.production_path or "",
                *(_flag(flags.get((m.test_path, k), False)) for k in SmellKind),
            )
        )
    return {
        "tests.csv": _write(out_dir / "tests.csv", _csv_text(tests)),
        "classes.csv": _write(out_dir / "classes.csv", _csv_text(classes)),
        "results.csv": _write(out_dir / "results.csv", _csv_text(results)),
    }


def format_line_report(report: SmellReport, fmt: str = "json") -> str:
    records = report.records()
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    if fmt == "csv":
        rows = [LINE_REPORT_FIELDS]
        for r in records:
            rows.append(
                (r["kind"], r["file"], r["class"], r["method"], " ".join(map(str, r["lines"])), r["group_key"] or "")
            )
        return _csv_text(rows)
    raise ValueError(f"unsupported line report format {fmt!r}")


def write_line_report(report: SmellReport, out: Path | str, fmt: str = "json") -> Path:
    return _write(Path(out), format_line_report(report, fmt))
