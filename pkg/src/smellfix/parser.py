"""Structural parser: classes, methods, top-level statements and assertion calls.

This is deliberately not a Java grammar. It works on the significant (non
whitespace, non comment) tokens, pairs up ``()``, ``[]`` and ``{}``, and
recognises declarations and statements by local token patterns.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from smellfix.errors import UnbalancedDelimiters
from smellfix.lexer import PRIMITIVE_TYPES, Token, TokenKind, decode_string_literal, lex
from smellfix.model import (
    ArgSpan,
    AssertionCall,
    ClassDecl,
    MethodDecl,
    Span,
    Statement,
    StatementKind,
    TestFileModel,
)

# JUnit 4 org.junit.Assert: arities without / with the leading message argument.
ASSERTION_ARITIES: dict[str, tuple[frozenset[int], frozenset[int]]] = {
    "assertEquals": (frozenset({2, 3}), frozenset({3, 4})),
    "assertNotEquals": (frozenset({2, 3}), frozenset({3, 4})),
    "assertArrayEquals": (frozenset({2, 3}), frozenset({3, 4})),
    "assertTrue": (frozenset({1}), frozenset({2})),
    "assertFalse": (frozenset({1}), frozenset({2})),
    "assertNull": (frozenset({1}), frozenset({2})),
    "assertNotNull": (frozenset({1}), frozenset({2})),
    "assertSame": (frozenset({2}), frozenset({3})),
    "assertNotSame": (frozenset({2}), frozenset({3})),
    "assertThat": (frozenset({2}), frozenset({3})),
    "fail": (frozenset({0}), frozenset({1})),
}
ASSERTION_NAMES = frozenset(ASSERTION_ARITIES)

_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {v: k for k, v in _OPEN.items()}
_TYPE_KEYWORDS = frozenset({"class", "interface", "enum"})
_CONTROL_KEYWORDS = frozenset({"if", "for", "while", "do", "try", "switch", "synchronized"})
_OTHER_KEYWORDS = frozenset({"return", "throw", "break", "continue", "assert"})
_COMPOUND_OPS = frozenset("+-*/%&|^")


def parse_test_file(path: str, source: str) -> TestFileModel:
    """Build the structural model of one Java source file.

    Raises UnbalancedDelimiters when brackets cannot be paired.
    """
    return _Parser(str(path), source).parse()


def extract_assertions(method: MethodDecl) -> list[AssertionCall]:
    """All JUnit assertion calls in *method*, top-level and nested, in source order."""
    calls = [s.assertion for s in method.statements if s.assertion is not None]
    calls.extend(method.nested_assertions)
    return sorted(calls, key=lambda c: c.call_span.start)


def has_explanation_message(call: AssertionCall) -> bool:
    return message_status(call.method_name, call.args)[0]


def message_status(name: str, args: Sequence[ArgSpan]) -> tuple[bool, bool]:
    """Return ``(has_message, ambiguous)`` for a call of assertion *name* with *args*.

    A leading argument counts as a message only if the arity selects a
    message-bearing overload. When the arity fits both overloads, the first
    argument must look like a String. A blank string literal is no message.
    """
    plain, with_msg = ASSERTION_ARITIES[name]
    n = len(args)
    if n == 0 or n not in with_msg:
        return False, False
    first = args[0]
    if n in plain and not _looks_like_string(first):
        return False, True
    if first.is_string_literal:
        return bool((first.string_value or "").strip()), False
    return True, False


def message_slot_is_blank(call: AssertionCall) -> bool:
    """True if the call already carries an empty or whitespace-only message literal."""
    with_msg = ASSERTION_ARITIES[call.method_name][1]
    if not call.args or call.arity not in with_msg:
        return False
    first = call.args[0]
    return first.is_string_literal and not (first.string_value or "").strip()


def _looks_like_string(arg: ArgSpan) -> bool:
    text = arg.text
    if arg.is_string_literal or text.endswith(".toString()") or text.startswith("String.format("):
        return True
    # "literal" + expr concatenation
    return text.startswith('"') and "+" in text


def _simple_annotation_name(text: str) -> str:
    head = text[1:].split("(", 1)[0]
    return "".join(head.split()).rsplit(".", 1)[-1]


class _Parser:
    def __init__(self, path: str, source: str) -> None:
        self.path = path
        self.source = source
        self.sig: list[Token] = [t for t in lex(source) if not t.is_trivia]
        self.match = self._pair_delimiters()

    # -- infrastructure -------------------------------------------------

    def _pair_delimiters(self) -> dict[int, int]:
        pairs: dict[int, int] = {}
        stack: list[int] = []
        for i, tok in enumerate(self.sig):
            if tok.kind is not TokenKind.PUNCT:
                continue
            if tok.text in _OPEN:
                stack.append(i)
            elif tok.text in _CLOSE:
                if not stack or self.sig[stack[-1]].text != _CLOSE[tok.text]:
                    raise UnbalancedDelimiters(self.path, tok.line, f"unexpected {tok.text!r}")
                j = stack.pop()
                pairs[i] = j
                pairs[j] = i
        if stack:
            tok = self.sig[stack[-1]]
            raise UnbalancedDelimiters(self.path, tok.line, f"unclosed {tok.text!r}")
        return pairs

    def _span(self, i: int, j: int) -> Span:
        a, b = self.sig[i], self.sig[j]
        return Span(a.start, b.end, a.line, b.span.end_line)

    def _text(self, i: int, j: int) -> str:
        return self.source[self.sig[i].start:self.sig[j].end]

    def _is(self, i: int, text: str) -> bool:
        return 0 <= i < len(self.sig) and self.sig[i].text == text and self.sig[i].kind in (
            TokenKind.PUNCT,
            TokenKind.KEYWORD,
            TokenKind.IDENTIFIER,
            TokenKind.ANNOTATION,
        )

    def _kind(self, i: int) -> Optional[TokenKind]:
        return self.sig[i].kind if 0 <= i < len(self.sig) else None

    def _adjacent(self, i: int, j: int) -> bool:
        return self.sig[i].end == self.sig[j].start

    def _skip_group(self, i: int) -> int:
        """Index just past the bracket group opening at *i* (or i + 1)."""
        if self.sig[i].kind is TokenKind.PUNCT and self.sig[i].text in _OPEN:
            return self.match[i] + 1
        return i + 1

    def _line_indent(self, offset: int) -> str:
        line_start = self.source.rfind("\n", 0, offset) + 1
        prefix = self.source[line_start:offset]
        return prefix[: len(prefix) - len(prefix.lstrip())]

    # -- types and members ---------------------------------------------

    def parse(self) -> TestFileModel:
        _, classes = self._members(0, len(self.sig), in_class=False)
        return TestFileModel(self.path, tuple(classes), self.source)

    def _is_type_keyword(self, i: int) -> bool:
        tok = self.sig[i]
        if self._is(i - 1, "."):
            return False
        if tok.kind is TokenKind.KEYWORD and tok.text in _TYPE_KEYWORDS:
            return self._kind(i + 1) is TokenKind.IDENTIFIER
        if tok.kind is TokenKind.IDENTIFIER and tok.text == "record":
            return self._kind(i + 1) is TokenKind.IDENTIFIER and (self._is(i + 2, "(") or self._is(i + 2, "<"))
        return False

    def _annotation_end(self, i: int) -> int:
        """Given '@' at *i*, return the index just past the annotation."""
        j = i + 1
        if self._kind(j) is TokenKind.IDENTIFIER:
            j += 1
            while self._is(j, ".") and self._kind(j + 1) is TokenKind.IDENTIFIER:
                j += 2
        if self._is(j, "("):
            j = self.match[j] + 1
        return j

    def _members(self, lo: int, hi: int, in_class: bool) -> tuple[list[MethodDecl], list[ClassDecl]]:
        methods: list[MethodDecl] = []
        classes: list[ClassDecl] = []
        i = lo
        while i < hi:
            start = i
            annotations: list[str] = []
            while i < hi and self._is(i, "@") and not self._is(i + 1, "interface"):
                end = min(self._annotation_end(i), hi)
                annotations.append(self._text(i, end - 1))
                i = end
            head = i
            j = i
            while j < hi:
                tok = self.sig[j]
                if tok.kind is TokenKind.PUNCT:
                    if tok.text == ";":
                        break
                    if tok.text == "=":
                        j = self._skip_to_semicolon(j, hi)
                        break
                    if tok.text == "{":
                        j = self.match[j]
                        break
                    if tok.text == "(":
                        if in_class and self._kind(j - 1) is TokenKind.IDENTIFIER and j - 1 >= head:
                            j, method = self._method(start, head, j - 1, annotations, hi)
                            if method is not None:
                                methods.append(method)
                            break
                        j = self.match[j]
                    elif tok.text == "[":
                        j = self.match[j]
                elif self._is_type_keyword(j):
                    j, cls = self._class(start, j)
                    classes.append(cls)
                    break
                j += 1
            i = max(j + 1, start + 1)
        return methods, classes

    def _skip_to_semicolon(self, j: int, hi: int) -> int:
        while j < hi and not self._is(j, ";"):
            j = self._skip_group(j) if self.sig[j].text in _OPEN and self.sig[j].kind is TokenKind.PUNCT else j + 1
        return min(j, hi - 1)

    def _class(self, start: int, kw: int) -> tuple[int, ClassDecl]:
        name = self.sig[kw + 1].text
        j = kw + 2
        while j < len(self.sig) and not self._is(j, "{"):
            if self._is(j, ";"):
                # bodyless declaration; tolerate
                span = self._span(start, j)
                return j, ClassDecl(name, span, Span.point(span.end, span.end_line), ())
            j = self._skip_group(j) if self._is(j, "(") else j + 1
        if j >= len(self.sig):
            tok = self.sig[kw]
            raise UnbalancedDelimiters(self.path, tok.line, f"class {name} has no body")
        close = self.match[j]
        methods, nested = self._members(j + 1, close, in_class=True)
        body = Span(self.sig[j].end, self.sig[close].start, self.sig[j].span.end_line, self.sig[close].line)
        return close, ClassDecl(name, self._span(start, close), body, tuple(methods), tuple(nested))

    def _method(
        self, start: int, head: int, name_idx: int, annotations: list[str], hi: int
    ) -> tuple[int, Optional[MethodDecl]]:
        lparen = name_idx + 1
        rparen = self.match[lparen]
        k = rparen + 1
        while k < hi and not (self._is(k, "{") or self._is(k, ";")):
            k = self._skip_group(k)
        if k >= hi or self._is(k, ";"):
            return min(k, hi - 1), None
        close = self.match[k]
        name = self.sig[name_idx].text
        modifiers = {t.text for t in self.sig[head:name_idx]}
        is_test = any(_simple_annotation_name(a) == "Test" for a in annotations) or (
            name.startswith("test")
            and "public" in modifiers
            and self._is(name_idx - 1, "void")
            and rparen == lparen + 1
        )
        params = self._parameter_names(lparen, rparen)
        statements, nested_calls = self._body(k + 1, close)
        body_span = Span(self.sig[k].end, self.sig[close].start, self.sig[k].span.end_line, self.sig[close].line)
        method = MethodDecl(
            name=name,
            annotations=tuple(annotations),
            signature_span=self._span(head, k - 1),
            name_span=self.sig[name_idx].span,
            body_span=body_span,
            span=self._span(start, close),
            statements=tuple(statements),
            is_test=is_test,
            indent=self._line_indent(self.sig[start].start),
            nested_assertions=tuple(nested_calls),
            parameters=tuple(params),
            nested_declarations=self._lexical_declarations(k + 1, close),
        )
        return close, method

    def _parameter_names(self, lparen: int, rparen: int) -> list[str]:
        names = []
        for j in range(lparen + 1, rparen):
            if self._kind(j) is TokenKind.IDENTIFIER and (self._is(j + 1, ",") or j + 1 == rparen):
                prev = self.sig[j - 1]
                if prev.kind is TokenKind.IDENTIFIER or prev.text in PRIMITIVE_TYPES or prev.text in (">", "]", "."):
                    names.append(self.sig[j].text)
        return names

    def _lexical_declarations(self, lo: int, hi: int) -> frozenset[str]:
        """Names that look declared anywhere in a body (over-approximation)."""
        found = set()
        for j in range(lo, hi):
            if self._kind(j) is not TokenKind.IDENTIFIER or j + 1 >= hi:
                continue
            prev = self.sig[j - 1]
            typeish = (
                prev.kind is TokenKind.IDENTIFIER
                or prev.text in PRIMITIVE_TYPES
                or (prev.kind is TokenKind.PUNCT and prev.text in (">", "]"))
            )
            if typeish and self.sig[j + 1].text in ("=", ";", ",", ":", ")") and self._kind(j + 1) is TokenKind.PUNCT:
                if not (self._is(j + 1, "=") and self._is(j + 2, "=")):
                    found.add(self.sig[j].text)
        return frozenset(found)

    # -- statements ------------------------------------------------------

    def _body(self, lo: int, hi: int) -> tuple[list[Statement], list[AssertionCall]]:
        statements: list[Statement] = []
        i = lo
        while i < hi:
            j = min(self._statement_end(i, hi), hi - 1)
            statements.append(self._statement(i, j))
            i = j + 1
        top_level = {s.assertion.call_span.start for s in statements if s.assertion is not None}
        nested = [c for c in self._assertion_calls(lo, hi, nested=True) if c.call_span.start not in top_level]
        return statements, nested

    def _statement_end(self, i: int, hi: int) -> int:
        if i >= hi:
            return hi - 1
        tok = self.sig[i]
        text = tok.text
        if tok.kind is TokenKind.PUNCT:
            if text == "{":
                return self.match[i]
            if text == ";":
                return i
        if tok.kind is TokenKind.KEYWORD:
            if text == "if" and self._is(i + 1, "("):
                j = self._statement_end(self.match[i + 1] + 1, hi)
                if self._is(j + 1, "else") and j + 1 < hi:
                    j = self._statement_end(j + 2, hi)
                return j
            if text in ("for", "while", "switch", "synchronized") and self._is(i + 1, "("):
                return self._statement_end(self.match[i + 1] + 1, hi)
            if text == "do":
                j = self._statement_end(i + 1, hi)
                if self._is(j + 1, "while") and self._is(j + 2, "("):
                    j = self.match[j + 2]
                    return j + 1 if self._is(j + 1, ";") else j
                return j
            if text == "try":
                j = i + 1
                if self._is(j, "("):
                    j = self.match[j] + 1
                if not self._is(j, "{"):
                    return self._simple_end(i, hi)
                j = self.match[j]
                while self._is(j + 1, "catch") and self._is(j + 2, "("):
                    k = self.match[j + 2] + 1
                    if not self._is(k, "{"):
                        return k
                    j = self.match[k]
                if self._is(j + 1, "finally") and self._is(j + 2, "{"):
                    j = self.match[j + 2]
                return j
            if text in _TYPE_KEYWORDS and self._is_type_keyword(i):
                return self._type_end(i, hi)
        if tok.kind is TokenKind.IDENTIFIER:
            if self._is(i + 1, ":") and not self._is(i + 2, ":") and i + 2 < hi:
                return self._statement_end(i + 2, hi)
            if self._is_type_keyword(i):
                return self._type_end(i, hi)
        return self._simple_end(i, hi)

    def _type_end(self, i: int, hi: int) -> int:
        j = i
        while j < hi and not self._is(j, "{"):
            j = self._skip_group(j) if self._is(j, "(") else j + 1
        return self.match[j] if j < hi else hi - 1

    def _simple_end(self, i: int, hi: int) -> int:
        j = i
        while j < hi:
            if self._is(j, ";"):
                return j
            j = self._skip_group(j) if self.sig[j].kind is TokenKind.PUNCT else j + 1
        return hi - 1

    def _statement(self, i: int, j: int) -> Statement:
        span = self._span(i, j)
        text = span.slice(self.source)
        first = self.sig[i]
        assigned, used = self._variables(i, j)
        kind = StatementKind.EXPRESSION
        declared: tuple[tuple[str, str], ...] = ()
        assertion = None
        if first.is_punct("{") or (first.kind is TokenKind.KEYWORD and first.text in _CONTROL_KEYWORDS):
            kind = StatementKind.CONTROL
        elif first.kind is TokenKind.IDENTIFIER and self._is(i + 1, ":") and not self._is(i + 2, ":"):
            kind = StatementKind.CONTROL
        elif first.is_punct(";") or (first.kind is TokenKind.KEYWORD and first.text in _OTHER_KEYWORDS):
            kind = StatementKind.OTHER
        elif self._is_type_keyword(i) or (first.kind is TokenKind.KEYWORD and first.text in ("abstract", "static")):
            kind = StatementKind.OTHER
        else:
            decl = self._declarators(i, j)
            if decl is not None:
                declared, type_idx = decl
                kind = StatementKind.LOCAL_DECLARATION
                names = {n for n, _ in declared}
                used = self._variables(i, j, skip=type_idx | self._declarator_name_indices(i, j, names))[1]
                assigned = assigned | names
            else:
                calls = self._assertion_calls(i, j + 1, nested=False)
                if (
                    calls
                    and self._is(j, ";")
                    and self._index_at(calls[0].call_span.start) == i
                    and self._index_at(calls[0].call_span.end - 1) == j - 1
                ):
                    kind = StatementKind.ASSERTION
                    assertion = calls[0]
        return Statement(
            span=span,
            kind=kind,
            text=text,
            declared_vars=declared,
            assigned_vars=frozenset(assigned),
            used_vars=frozenset(used),
            assertion=assertion,
            invoked_on=frozenset(self._receivers(i, j)),
        )

    def _receivers(self, i: int, j: int) -> set[str]:
        """Identifiers used as the receiver of a method call, as in ``name.call(...)``.

        Calls inside assertion arguments are skipped: an assertion only reads.
        """
        out = set()
        k = i - 1
        while k < j - 3:
            k += 1
            tok = self.sig[k]
            if (
                tok.kind is TokenKind.IDENTIFIER
                and tok.text in ASSERTION_NAMES
                and self._is(k + 1, "(")
                and self._qualifier_start(k) is not None
            ):
                k = self.match[k + 1]
                continue
            if (
                self._kind(k) is TokenKind.IDENTIFIER
                and not self._is(k - 1, ".")
                and self._is(k + 1, ".")
                and self._kind(k + 2) is TokenKind.IDENTIFIER
                and self._is(k + 3, "(")
            ):
                out.add(self.sig[k].text)
        return out

    def _index_at(self, offset: int) -> int:
        lo, hi = 0, len(self.sig)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.sig[mid].start < offset:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.sig) and self.sig[lo].start == offset:
            return lo
        return lo - 1

    def _declarators(self, i: int, j: int) -> Optional[tuple[tuple[tuple[str, str], ...], set[int]]]:
        """Recognise ``[final] Type name [= init] (, name [= init])* ;``."""
        k = i
        while k <= j:
            if self._is(k, "final"):
                k += 1
            elif self._is(k, "@"):
                k = self._annotation_end(k)
            else:
                break
        type_start = k
        tok = self.sig[k] if k <= j else None
        if tok is None or not (
            tok.kind is TokenKind.IDENTIFIER or (tok.kind is TokenKind.KEYWORD and tok.text in PRIMITIVE_TYPES)
        ):
            return None
        k += 1
        while True:
            if self._is(k, ".") and self._kind(k + 1) is TokenKind.IDENTIFIER:
                k += 2
            elif self._is(k, "<"):
                k = self._skip_angles(k, j)
                if k < 0:
                    return None
            elif self._is(k, "[") and self._is(k + 1, "]"):
                k += 2
            elif self._is(k, ".") and self._is(k + 1, ".") and self._is(k + 2, "."):
                return None
            else:
                break
        type_end = k - 1
        if k > j or self._kind(k) is not TokenKind.IDENTIFIER or not self._is_declarator_follow(k + 1):
            return None
        type_text = self._text(type_start, type_end)
        type_idx = set(range(type_start, type_end + 1))
        declared = []
        while k <= j and self._kind(k) is TokenKind.IDENTIFIER and self._is_declarator_follow(k + 1):
            declared.append((self.sig[k].text, type_text))
            k += 1
            while self._is(k, "[") and self._is(k + 1, "]"):
                k += 2
            # skip initializer up to the next top-level comma
            while k <= j and not (self._is(k, ",") or self._is(k, ";")):
                k = self._skip_group(k) if self.sig[k].kind is TokenKind.PUNCT else k + 1
            if not self._is(k, ","):
                break
            k += 1
            # commas inside generic arguments of an initializer are skipped here
            while k <= j and not (self._kind(k) is TokenKind.IDENTIFIER and self._is_declarator_follow(k + 1)):
                if self._is(k, ";"):
                    break
                k = self._skip_group(k) if self.sig[k].kind is TokenKind.PUNCT else k + 1
        return tuple(declared), type_idx

    def _is_declarator_follow(self, k: int) -> bool:
        if self._is(k, "=") and not self._is(k + 1, "="):
            return True
        return self._is(k, ";") or self._is(k, ",") or (self._is(k, "[") and self._is(k + 1, "]"))

    def _declarator_name_indices(self, i: int, j: int, names: set[str]) -> set[int]:
        out = set()
        for k in range(i, j + 1):
            if (
                self._kind(k) is TokenKind.IDENTIFIER
                and self.sig[k].text in names
                and self._is_declarator_follow(k + 1)
            ):
                if not self._is(k - 1, "."):
                    out.add(k)
        return out

    def _skip_angles(self, k: int, j: int) -> int:
        depth = 0
        while k <= j:
            tok = self.sig[k]
            if tok.is_punct("<"):
                depth += 1
            elif tok.is_punct(">"):
                depth -= 1
                if depth == 0:
                    return k + 1
            elif tok.kind is TokenKind.PUNCT and tok.text not in (",", ".", "?", "[", "]", "&"):
                return -1
            elif tok.kind is TokenKind.KEYWORD and tok.text not in PRIMITIVE_TYPES | {"extends", "super"}:
                return -1
            k += 1
        return -1

    def _variables(self, i: int, j: int, skip: Iterable[int] = ()) -> tuple[set[str], set[str]]:
        """Lexical ``(assigned, used)`` identifier sets over tokens i..j."""
        skip = set(skip)
        assigned: set[str] = set()
        used: set[str] = set()
        for k in range(i, j + 1):
            tok = self.sig[k]
            if tok.kind is not TokenKind.IDENTIFIER or k in skip:
                continue
            if self._is(k - 1, ".") or self._is(k - 1, "@") or (self._is(k - 1, ":") and self._is(k - 2, ":")):
                continue
            if self._is(k + 1, "("):
                continue
            name = tok.text
            kind = self._assignment_kind(k, j)
            if kind == "plain":
                assigned.add(name)
                continue
            if kind in ("compound", "element"):
                assigned.add(name)
            used.add(name)
        return assigned, used

    def _assignment_kind(self, k: int, j: int) -> Optional[str]:
        nxt = k + 1
        if nxt > j:
            return None
        if self._is(nxt, "=") and not (self._is(nxt + 1, "=") and self._adjacent(nxt, nxt + 1)):
            return "plain"
        t = self.sig[nxt]
        if t.kind is TokenKind.PUNCT:
            if t.text in _COMPOUND_OPS and self._is(nxt + 1, "=") and self._adjacent(nxt, nxt + 1):
                if not (self._is(nxt + 2, "=") and self._adjacent(nxt + 1, nxt + 2)):
                    return "compound"
            if t.text in "+-" and self._is(nxt + 1, t.text) and self._adjacent(nxt, nxt + 1):
                return "compound"
            if t.text in "<>":
                m = nxt
                while self._is(m, t.text) and self._adjacent(m, m + 1):
                    m += 1
                if m - nxt >= 2 and self._is(m, "="):
                    return "compound"
            if t.text == "[":
                m = self.match[nxt] + 1
                while self._is(m, "["):
                    m = self.match[m] + 1
                if self._is(m, "=") and not (self._is(m + 1, "=") and self._adjacent(m, m + 1)):
                    return "element"
        prev = k - 1
        if self._is(prev, "+") or self._is(prev, "-"):
            if self._is(prev - 1, self.sig[prev].text) and self._adjacent(prev - 1, prev):
                return "compound"
        return None

    # -- assertions ------------------------------------------------------

    def _assertion_calls(self, lo: int, hi: int, nested: bool) -> list[AssertionCall]:
        calls = []
        for k in range(lo, hi):
            tok = self.sig[k]
            if tok.kind is not TokenKind.IDENTIFIER or tok.text not in ASSERTION_NAMES or not self._is(k + 1, "("):
                continue
            qual_start = self._qualifier_start(k)
            if qual_start is None:
                continue
            calls.append(self._assertion_call(qual_start, k, nested))
        return calls

    def _qualifier_start(self, k: int) -> Optional[int]:
        prev = self.sig[k - 1] if k > 0 else None
        if prev is None:
            return k
        if prev.is_punct("."):
            q = k - 2
            if q < 0:
                return None
            qual = self.sig[q]
            if not (qual.text == "this" or (qual.kind is TokenKind.IDENTIFIER and qual.text.endswith("Assert"))):
                return None
            while self._is(q - 1, ".") and self._kind(q - 2) is TokenKind.IDENTIFIER:
                q -= 2
            return q
        if prev.kind is TokenKind.IDENTIFIER or prev.text in ("new", "void") or prev.text in PRIMITIVE_TYPES:
            return None
        if prev.kind is TokenKind.PUNCT and prev.text in (">", "]") or (prev.is_punct(":") and self._is(k - 2, ":")):
            return None
        return k

    def _assertion_call(self, qual_start: int, k: int, nested: bool) -> AssertionCall:
        lparen = k + 1
        rparen = self.match[lparen]
        args = []
        a = lparen + 1
        j = a
        while j <= rparen:
            if j == rparen or self._is(j, ","):
                if j > a:
                    args.append(self._arg(a, j - 1))
                a = j + 1
                j += 1
            else:
                j = self._skip_group(j) if self.sig[j].kind is TokenKind.PUNCT else j + 1
        name = self.sig[k].text
        has_message, ambiguous = message_status(name, args)
        return AssertionCall(
            method_name=name,
            args=tuple(args),
            has_message=has_message,
            line=self.sig[k].line,
            call_span=self._span(qual_start, rparen),
            paren_span=self.sig[lparen].span,
            qualifier=self._text(qual_start, k - 2) if qual_start < k else "",
            nested=nested,
            ambiguous=ambiguous,
        )

    def _arg(self, a: int, b: int) -> ArgSpan:
        span = self._span(a, b)
        tok = self.sig[a]
        literal = a == b and tok.kind is TokenKind.STRING
        return ArgSpan(
            text=span.slice(self.source),
            span=span,
            is_string_literal=literal,
            string_value=decode_string_literal(tok.text) if literal else None,
        )
