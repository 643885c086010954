"""Span-based rewrites: message insertion for AR, extract-method for DA.

Patches never pretty-print. Each one is a handful of text edits against the
original file, so bytes outside the edited regions are left untouched.
"""

from __future__ import annotations

import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Iterable, Optional, Sequence

from smellfix.detectors import AR, DA, SmellInstance
from smellfix.errors import (
    AlreadyDocumented,
    MissingDeclaration,
    NoMessageOverload,
    NonExtractable,
    OverlappingEdits,
    ReparseFailure,
    UnbalancedDelimiters,
)
from smellfix.lexer import encode_string_literal
from smellfix.model import AssertionCall, MethodDecl, Span, Statement, StatementKind, TestFileModel
from smellfix.parser import ASSERTION_ARITIES, message_slot_is_blank, parse_test_file

log = logging.getLogger(__name__)

DEFAULT_MESSAGE = "Add Assertion Explanation here"
EXTRACTED_COMMENT = "/*  Extracted Method  */"


@dataclass(frozen=True)
class Edit:
    span: Span
    replacement: str

    def __post_init__(self) -> None:
        if self.span.start == self.span.end and not self.replacement:
            raise ValueError("edit would not change the text")


@dataclass(frozen=True)
class Patch:
    file: str
    edits: tuple[Edit, ...]
    description: str
    smell: Optional[SmellInstance] = None

    def __post_init__(self) -> None:
        ordered = sorted(self.edits, key=lambda e: (e.span.start, e.span.end))
        for a, b in zip(ordered, ordered[1:]):
            if a.span.overlaps(b.span):
                raise OverlappingEdits(f"{self.file}: edits overlap within one patch")

    def overlaps(self, other: "Patch") -> bool:
        return any(a.span.overlaps(b.span) for a in self.edits for b in other.edits)


@dataclass(frozen=True)
class ExtractionPlan:
    method_name: str
    moved_statements: tuple[Statement, ...]
    copied_declarations: tuple[Statement, ...]
    converted_assignments: tuple[tuple[Statement, str], ...]
    new_method_name: str
    insert_after: Span
    cut_span: Span
    group: Optional[SmellInstance] = None


def render_message(template: str, method: str = "", line: int = 0) -> str:
    return template.replace("{method}", method).replace("{line}", str(line))


# -- Assertion Roulette -------------------------------------------------------


def plan_ar_fix(
    call: AssertionCall,
    message: Optional[str] = None,
    *,
    file: str = "",
    smell: Optional[SmellInstance] = None,
) -> Patch:
    """Give *call* an explanation message.

    A blank message literal already in the message slot is replaced; otherwise
    the message is inserted as the new first argument.
    """
    if call.has_message:
        raise AlreadyDocumented(f"{file}:{call.line}: {call.method_name} already has a message")
    literal = encode_string_literal(DEFAULT_MESSAGE if message is None else message)
    desc = f"add explanation message to {call.method_name} at line {call.line}"
    if message_slot_is_blank(call):
        return Patch(file, (Edit(call.args[0].span, literal),), desc, smell)
    if call.arity + 1 not in ASSERTION_ARITIES[call.method_name][1]:
        raise NoMessageOverload(f"{file}:{call.line}: no {call.method_name} overload takes a message here")
    at = Span.point(call.paren_span.end, call.paren_span.end_line)
    text = literal + ", " if call.args else literal
    return Patch(file, (Edit(at, text),), desc, smell)


# -- Duplicate Assert -----------------------------------------------------------


def _statement_index(method: MethodDecl, call: AssertionCall) -> int:
    for i, stmt in enumerate(method.statements):
        if stmt.assertion is not None and stmt.assertion.call_span == call.call_span:
            return i
    raise NonExtractable(f"assertion at line {call.line} is not a top-level statement of {method.name}")


def _unique_name(base: str, taken: Collection[str]) -> str:
    name, n = base, 1
    while name in taken:
        n += 1
        name = f"{base}{n}"
    return name


def _mutated_by_call(stmt: Statement) -> frozenset[str]:
    """Receivers of method calls that may change them; assertions and declarations only read."""
    if stmt.kind in (StatementKind.ASSERTION, StatementKind.LOCAL_DECLARATION):
        return frozenset()
    return stmt.invoked_on


def plan_da_fix(
    method: MethodDecl,
    group: SmellInstance,
    occurrence_index: int,
    *,
    reserved: Collection[str] = (),
) -> ExtractionPlan:
    """Plan moving duplicate occurrence *occurrence_index* (1-based, >= 2) into a new method.

    The moved region runs from just after the previous occurrence up to and
    including this one. Later occurrences of the same group are assumed to be
    extracted as well; see plan_group_fix.
    """
    if group.kind is not DA:
        raise ValueError("plan_da_fix needs a DuplicateAssert instance")
    if not 2 <= occurrence_index <= len(group.assertions):
        raise ValueError(f"occurrence_index must be in 2..{len(group.assertions)}")
    if any(c.nested for c in group.assertions):
        raise NonExtractable(f"{method.name}: duplicate assertion inside a nested block")
    positions = sorted(_statement_index(method, c) for c in group.assertions)
    stmts = method.statements
    p, q = positions[occurrence_index - 2], positions[occurrence_index - 1]
    region = stmts[p + 1 : q + 1]
    remaining = stmts[positions[-1] + 1 :] if occurrence_index < len(positions) else stmts[q + 1 :]

    decl_at: dict[str, int] = {}
    for i, stmt in enumerate(stmts):
        for name in stmt.declared_names:
            decl_at.setdefault(name, i)

    region_declared: set[str] = set().union(*(s.declared_names for s in region))
    needed: set[str] = set()
    assigned_first: dict[str, Statement] = {}
    seen: set[str] = set()
    for stmt in region:
        for name in sorted((stmt.used_vars | stmt.assigned_vars) - seen - region_declared):
            seen.add(name)
            if name in stmt.used_vars:
                needed.add(name)
            else:
                assigned_first[name] = stmt

    locals_ = set(method.nested_declarations) | set(method.parameters)
    written = region_declared | set().union(*(s.assigned_vars for s in region))
    touched = (written | set().union(*(_mutated_by_call(s) for s in region))) & locals_
    later_reads = set().union(*(s.used_vars | s.invoked_on for s in remaining))
    if touched & later_reads:
        names = ", ".join(sorted(touched & later_reads))
        raise NonExtractable(f"{method.name}: statements after the duplicate depend on {names}")

    copied: set[int] = set()
    work = sorted(needed)
    visited: set[str] = set()
    while work:
        name = work.pop()
        if name in visited:
            continue
        visited.add(name)
        d = decl_at.get(name)
        if d is None or d > p:
            continue  # not a local in scope here: field, constant or class name
        copied.add(d)
        work.extend(sorted(stmts[d].used_vars - visited))

    copied_names = set().union(*(stmts[d].declared_names for d in copied))
    for name in sorted(visited & copied_names):
        for i in range(decl_at[name] + 1, p + 1):
            stmt = stmts[i]
            if i in copied:
                continue
            if name in stmt.assigned_vars or name in _mutated_by_call(stmt):
                raise MissingDeclaration(
                    f"{method.name}: {name} is modified at line {stmt.span.start_line}"
                    " by a statement that is not copied"
                )

    converted: list[tuple[Statement, str]] = []
    for name, stmt in assigned_first.items():
        if name in copied_names:
            continue
        d = decl_at.get(name)
        if d is not None and d <= p:
            type_text = dict(stmts[d].declared_vars)[name]
            converted.append((stmt, type_text))
        elif name in method.parameters:
            continue
        elif name in method.nested_declarations:
            raise MissingDeclaration(f"{method.name}: cannot locate the declaration of {name}")
    converted.sort(key=lambda pair: pair[0].span.start)

    # one conversion per statement; a multi-target statement cannot be rewritten
    if len({id(s) for s, _ in converted}) != len(converted):
        raise NonExtractable(f"{method.name}: statement assigns several variables declared elsewhere")

    taken = set(reserved) | {method.name}
    last = stmts[q]
    prev = stmts[p]
    return ExtractionPlan(
        method_name=method.name,
        moved_statements=tuple(region),
        copied_declarations=tuple(stmts[d] for d in sorted(copied)),
        converted_assignments=tuple(converted),
        new_method_name=_unique_name(method.name + "Extracted", taken),
        insert_after=Span.point(method.span.end, method.span.end_line),
        cut_span=Span(prev.span.end, last.span.end, prev.span.end_line, last.span.end_line),
        group=group,
    )


def _indent_of(source: str, offset: int) -> Optional[str]:
    line_start = source.rfind("\n", 0, offset) + 1
    prefix = source[line_start:offset]
    return prefix if not prefix.strip() else None


def render_extraction(plan: ExtractionPlan, method: MethodDecl, source: str, *, file: str = "") -> Patch:
    """Turn *plan* into a deletion in the original method plus the new method after it."""
    nl = "\r\n" if "\r\n" in source else "\n"
    indent = method.indent
    body_indent = None
    if method.statements:
        body_indent = _indent_of(source, method.statements[0].span.start)
    if body_indent is None:
        body_indent = indent + "    "

    start = plan.moved_statements[0].span.start
    end = plan.moved_statements[-1].span.end
    moved = source[start:end]
    for stmt, type_text in sorted(plan.converted_assignments, key=lambda c: c[0].span.start, reverse=True):
        cut = stmt.span.start - start
        moved = moved[:cut] + type_text + " " + moved[cut:]

    sig = method.signature_span
    signature = (
        source[sig.start : method.name_span.start] + plan.new_method_name + source[method.name_span.end : sig.end]
    )
    lines = ["", "", indent + EXTRACTED_COMMENT]
    lines += [indent + a for a in method.annotations]
    lines.append(f"{indent}{signature} {{")
    lines += [body_indent + d.text for d in plan.copied_declarations]
    lines.append(body_indent + moved)
    lines.append(indent + "}")
    insertion = nl.join(lines)

    group = plan.group
    dup = group.group_key if group is not None else "duplicate assertion"
    return Patch(
        file,
        (Edit(plan.cut_span, ""), Edit(plan.insert_after, insertion)),
        f"extract {dup} from {method.name} into {plan.new_method_name}",
        group,
    )


def plan_group_fix(
    model: TestFileModel,
    method: MethodDecl,
    group: SmellInstance,
    *,
    reserved: Collection[str] = (),
) -> list[Patch]:
    """Extract every occurrence after the first; all-or-nothing for the group.

    Names chosen for the new methods are added to *reserved* when it is a set.
    """
    taken = reserved if isinstance(reserved, set) else set(reserved)
    plans = []
    for k in range(2, len(group.assertions) + 1):
        plan = plan_da_fix(method, group, k, reserved=taken | {p.new_method_name for p in plans})
        plans.append(plan)
    taken.update(p.new_method_name for p in plans)
    return [render_extraction(plan, method, model.raw_text, file=model.path) for plan in plans]


class FixPlanner:
    """Plans patches for the instances of one file, keeping new method names unique per class."""

    def __init__(self, model: TestFileModel, message_template: str = DEFAULT_MESSAGE) -> None:
        self.model = model
        self.message_template = message_template
        self._taken: dict[str, set[str]] = {}
        self._methods: dict[tuple[str, str], MethodDecl] = {}
        for cls, method in model.iter_methods():
            self._taken.setdefault(cls.name, set()).add(method.name)
            self._methods.setdefault((cls.name, method.name), method)

    def default_message(self, inst: SmellInstance) -> str:
        return render_message(self.message_template, inst.method_name, inst.lines[0])

    def plan(self, inst: SmellInstance, message: Optional[str] = None) -> list[Patch]:
        if inst.kind is AR:
            msg = self.default_message(inst) if message is None else message
            return [plan_ar_fix(inst.assertions[0], msg, file=self.model.path, smell=inst)]
        method = self._methods[(inst.class_name, inst.method_name)]
        return plan_group_fix(self.model, method, inst, reserved=self._taken.setdefault(inst.class_name, set()))


# -- application ------------------------------------------------------------------


def partition_patches(patches: Iterable[Patch]) -> tuple[list[Patch], list[Patch]]:
    """Accept patches in order, rejecting any that overlaps an earlier accepted one."""
    accepted: list[Patch] = []
    rejected: list[Patch] = []
    for patch in patches:
        if any(patch.overlaps(a) for a in accepted):
            rejected.append(patch)
        else:
            accepted.append(patch)
    return accepted, rejected


def apply_patches(source: str, patches: Sequence[Patch], *, path: str = "<memory>", check: bool = True) -> str:
    """Apply *patches* to *source* and return the new text.

    Overlapping patches are dropped (earlier ones win). With *check*, the
    result must parse again or ReparseFailure is raised.
    """
    accepted, rejected = partition_patches(patches)
    for patch in rejected:
        log.warning("%s: skipped overlapping patch: %s", path, patch.description)
    edits = [(edit, seq) for seq, patch in enumerate(accepted) for edit in patch.edits]
    edits.sort(key=lambda pair: (pair[0].span.start, pair[0].span.end, pair[1]), reverse=True)
    out = source
    for edit, _ in edits:
        out = out[: edit.span.start] + edit.replacement + out[edit.span.end :]
    if check and accepted:
        try:
            parse_test_file(path, out)
        except UnbalancedDelimiters as exc:
            raise ReparseFailure(f"{path}: refactored text does not parse: {exc}") from exc
    return out


def rewrite_file(path: Path, patches: Sequence[Patch]) -> str:
    """Apply *patches* to the file at *path* in place and return the new text.

    The file is replaced atomically and re-read; if it no longer parses, the
    original bytes are restored and ReparseFailure is raised.
    """
    path = Path(path)
    original = path.read_bytes()
    text = apply_patches(original.decode("utf-8"), patches, path=str(path))
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(text.encode("utf-8"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    try:
        parse_test_file(str(path), path.read_bytes().decode("utf-8"))
    except (UnbalancedDelimiters, UnicodeDecodeError) as exc:
        path.write_bytes(original)
        raise ReparseFailure(f"{path}: written file does not parse, original restored") from exc
    return text
