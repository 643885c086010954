"""Assertion Roulette and Duplicate Assert detection over parsed test files."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from smellfix.lexer import TokenKind, lex
from smellfix.model import ArgSpan, AssertionCall, TestFileModel
from smellfix.parser import extract_assertions


class SmellKind(str, enum.Enum):
    ASSERTION_ROULETTE = "AssertionRoulette"
    DUPLICATE_ASSERT = "DuplicateAssert"

    @property
    def short(self) -> str:
        return "ar" if self is SmellKind.ASSERTION_ROULETTE else "da"

    @classmethod
    def parse(cls, value: str) -> frozenset["SmellKind"]:
        """Map a ``--smell`` value (ar, da, all) to a set of kinds."""
        value = value.lower()
        if value == "all":
            return frozenset(cls)
        for kind in cls:
            if value in (kind.short, kind.value.lower()):
                return frozenset({kind})
        raise ValueError(f"unknown smell {value!r}")


AR = SmellKind.ASSERTION_ROULETTE
DA = SmellKind.DUPLICATE_ASSERT


@dataclass(frozen=True)
class SmellInstance:
    kind: SmellKind
    file: str
    class_name: str
    method_name: str
    lines: tuple[int, ...]
    assertions: tuple[AssertionCall, ...] = field(repr=False)
    group_key: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.lines or list(self.lines) != sorted(set(self.lines)):
            raise ValueError("lines must be non-empty, sorted and unique")
        if (self.group_key is not None) != (self.kind is DA):
            raise ValueError("group_key is required for, and only for, DuplicateAssert")
        if self.kind is AR and (len(self.assertions) != 1 or len(self.lines) != 1):
            raise ValueError("an AssertionRoulette instance covers exactly one assertion on one line")
        if self.kind is DA and len(self.assertions) < 2:
            raise ValueError("a DuplicateAssert group needs at least two assertions")

    @property
    def sort_key(self) -> tuple:
        return (self.file, self.lines[0], self.kind.value, self.method_name, self.lines)

    def to_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "file": self.file,
            "class": self.class_name,
            "method": self.method_name,
            "lines": list(self.lines),
            "group_key": self.group_key,
        }


@dataclass(frozen=True)
class NestedDuplicate:
    """Duplicate assertions where at least one sits inside a nested block; never auto-refactored."""

    file: str
    class_name: str
    method_name: str
    lines: tuple[int, ...]
    group_key: str

    def describe(self) -> str:
        where = ",".join(map(str, self.lines))
        owner = f"{self.class_name}.{self.method_name}"
        return f"{self.file}:{where}: non-extractable duplicate {self.group_key} in {owner}"


_WORDISH = (TokenKind.IDENTIFIER, TokenKind.KEYWORD, TokenKind.NUMBER)


def normalize_arg(arg: Union[ArgSpan, str]) -> str:
    """Canonical text of an argument: whitespace and comments removed, literals untouched."""
    text = arg.text if isinstance(arg, ArgSpan) else arg
    out: list[str] = []
    prev = None
    for tok in lex(text):
        if tok.is_trivia:
            continue
        # keep `new Foo` from fusing into `newFoo`
        if prev is not None and prev.kind in _WORDISH and tok.kind in _WORDISH:
            out.append(" ")
        out.append(tok.text)
        prev = tok
    return "".join(out)


def group_key(call: AssertionCall) -> str:
    return call.method_name + "(" + ",".join(normalize_arg(a) for a in call.args) + ")"


def detect_assertion_roulette(model: TestFileModel) -> list[SmellInstance]:
    found = []
    for cls, method in model.iter_methods():
        if not method.is_test:
            continue
        undocumented = [c for c in extract_assertions(method) if not c.has_message]
        if len(undocumented) < 2:
            continue
        for call in undocumented:
            found.append(SmellInstance(AR, model.path, cls.name, method.name, (call.line,), (call,)))
    return found


def _groups(calls: Iterable[AssertionCall]) -> dict[str, list[AssertionCall]]:
    groups: dict[str, list[AssertionCall]] = defaultdict(list)
    for call in calls:
        groups[group_key(call)].append(call)
    return groups


def detect_duplicate_assert(model: TestFileModel) -> list[SmellInstance]:
    found = []
    for cls, method in model.iter_methods():
        if not method.is_test:
            continue
        top_level = [s.assertion for s in method.statements if s.assertion is not None]
        for key, members in _groups(top_level).items():
            if len(members) >= 2:
                lines = tuple(sorted({c.line for c in members}))
                found.append(SmellInstance(DA, model.path, cls.name, method.name, lines, tuple(members), key))
    return found


def find_nested_duplicates(model: TestFileModel) -> list[NestedDuplicate]:
    found = []
    for cls, method in model.iter_methods():
        if not method.is_test:
            continue
        for key, members in _groups(extract_assertions(method)).items():
            if len(members) >= 2 and any(c.nested for c in members):
                lines = tuple(sorted({c.line for c in members}))
                found.append(NestedDuplicate(model.path, cls.name, method.name, lines, key))
    return sorted(found, key=lambda d: (d.lines, d.group_key))


_DETECTORS = {AR: detect_assertion_roulette, DA: detect_duplicate_assert}


def detect(model: TestFileModel, kinds: Iterable[SmellKind] = (AR, DA)) -> list[SmellInstance]:
    """Run the requested detectors; results in (file, line, kind) order."""
    found: list[SmellInstance] = []
    for kind in sorted(set(kinds), key=lambda k: k.value):
        found.extend(_DETECTORS[kind](model))
    return sorted(found, key=lambda s: s.sort_key)


@dataclass(frozen=True)
class SmellReport:
    project: str
    files: tuple[str, ...] = ()
    instances: tuple[SmellInstance, ...] = ()
    diagnostics: tuple[str, ...] = ()

    @property
    def summary(self) -> dict[SmellKind, int]:
        counts = {kind: 0 for kind in SmellKind}
        for inst in self.instances:
            counts[inst.kind] += 1
        return counts

    @property
    def class_flags(self) -> dict[tuple[str, SmellKind], bool]:
        flags = {(f, kind): False for f in self.files for kind in SmellKind}
        for inst in self.instances:
            flags[(inst.file, inst.kind)] = True
        return flags

    @property
    def entries(self) -> list[tuple[str, str, str, tuple[SmellInstance, ...]]]:
        """``(file, class, method, instances)`` rows in report order."""
        rows: dict[tuple[str, str, str], list[SmellInstance]] = {}
        for inst in self.instances:
            rows.setdefault((inst.file, inst.class_name, inst.method_name), []).append(inst)
        return [(f, c, m, tuple(v)) for (f, c, m), v in rows.items()]

    def records(self) -> list[dict]:
        return [inst.to_record() for inst in self.instances]


def build_report(
    project: str,
    per_file: Mapping[str, Iterable[SmellInstance]],
    diagnostics: Iterable[str] = (),
) -> SmellReport:
    files = tuple(sorted(per_file))
    instances = sorted((inst for f in files for inst in per_file[f]), key=lambda s: s.sort_key)
    return SmellReport(project, files, tuple(instances), tuple(sorted(diagnostics)))
