"""Positioned, immutable model of a Java test file.

Offsets are indices into the decoded source string, so ``text[span.start:span.end]``
always reproduces an element's source. Lines are 1-based and counted by ``\\n``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional


@dataclass(frozen=True, slots=True, order=True)
class Span:
    start: int
    end: int
    start_line: int
    end_line: int

    def __post_init__(self) -> None:
        if self.start > self.end or self.start_line > self.end_line:
            raise ValueError(f"malformed span {self!r}")

    @classmethod
    def point(cls, offset: int, line: int) -> "Span":
        return cls(offset, offset, line, line)

    @property
    def lines(self) -> range:
        return range(self.start_line, self.end_line + 1)

    def slice(self, text: str) -> str:
        return text[self.start:self.end]

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        """True if the spans share a character, or an insertion point lies strictly inside the other."""
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True, slots=True)
class ArgSpan:
    text: str
    span: Span
    is_string_literal: bool = False
    string_value: Optional[str] = None


@dataclass(frozen=True, slots=True)
class AssertionCall:
    method_name: str
    args: tuple[ArgSpan, ...]
    has_message: bool
    line: int
    call_span: Span
    paren_span: Span
    qualifier: str = ""
    nested: bool = False
    ambiguous: bool = False

    @property
    def args_open_paren(self) -> int:
        return self.paren_span.start

    @property
    def arity(self) -> int:
        return len(self.args)


class StatementKind(str, enum.Enum):
    LOCAL_DECLARATION = "local-declaration"
    EXPRESSION = "expression"
    ASSERTION = "assertion"
    CONTROL = "control"
    OTHER = "other"


@dataclass(frozen=True, slots=True)
class Statement:
    span: Span
    kind: StatementKind
    text: str
    declared_vars: tuple[tuple[str, str], ...] = ()
    assigned_vars: frozenset[str] = frozenset()
    used_vars: frozenset[str] = frozenset()
    assertion: Optional[AssertionCall] = None
    invoked_on: frozenset[str] = frozenset()

    @property
    def declared_var(self) -> Optional[tuple[str, str]]:
        """``(name, type text)`` of the first declarator, for local declarations."""
        return self.declared_vars[0] if self.declared_vars else None

    @property
    def declared_names(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.declared_vars)


@dataclass(frozen=True, slots=True)
class MethodDecl:
    name: str
    annotations: tuple[str, ...]
    signature_span: Span
    name_span: Span
    body_span: Span
    span: Span
    statements: tuple[Statement, ...]
    is_test: bool
    indent: str = ""
    nested_assertions: tuple[AssertionCall, ...] = ()
    parameters: tuple[str, ...] = ()
    # every name that looks locally declared anywhere in the body, nested blocks included
    nested_declarations: frozenset[str] = frozenset()

    @property
    def end(self) -> int:
        """Offset just past the closing brace."""
        return self.span.end


@dataclass(frozen=True, slots=True)
class ClassDecl:
    name: str
    span: Span
    body_span: Span
    methods: tuple[MethodDecl, ...]
    nested: tuple["ClassDecl", ...] = ()

    def walk(self) -> Iterator["ClassDecl"]:
        yield self
        for inner in self.nested:
            yield from inner.walk()


@dataclass(frozen=True, slots=True)
class TestFileModel:
    path: str
    classes: tuple[ClassDecl, ...]
    raw_text: str = field(repr=False)

    __test__ = False  # keep pytest from collecting this as a test class

    def iter_classes(self) -> Iterator[ClassDecl]:
        for cls in self.classes:
            yield from cls.walk()

    def iter_methods(self) -> Iterator[tuple[ClassDecl, MethodDecl]]:
        for cls in self.iter_classes():
            for method in cls.methods:
                yield cls, method
