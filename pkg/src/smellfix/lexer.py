"""Lossless, error-tolerant tokenizer for Java source.

Every character of the input belongs to exactly one token, so joining the
token texts reproduces the input. Malformed input never raises: an
unterminated string or char literal runs to the end of its line, an
unterminated block comment runs to the end of the file.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from smellfix.model import Span


class TokenKind(str, enum.Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    STRING = "string-literal"
    CHAR = "char-literal"
    NUMBER = "number"
    PUNCT = "punctuation"
    COMMENT = "comment"
    WHITESPACE = "whitespace"
    ANNOTATION = "annotation-marker"


KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
    true false null
    """.split()
)

PRIMITIVE_TYPES = frozenset("boolean byte char short int long float double".split())


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    span: Span

    @property
    def start(self) -> int:
        return self.span.start

    @property
    def end(self) -> int:
        return self.span.end

    @property
    def line(self) -> int:
        return self.span.start_line

    @property
    def is_trivia(self) -> bool:
        return self.kind in (TokenKind.WHITESPACE, TokenKind.COMMENT)

    def is_punct(self, ch: str) -> bool:
        return self.kind is TokenKind.PUNCT and self.text == ch


_WHITESPACE = re.compile(r"\s+")
_LINE_COMMENT = re.compile(r"//[^\n]*")
_BLOCK_COMMENT = re.compile(r"/\*.*?(?:\*/|\Z)", re.S)
_TEXT_BLOCK = re.compile(r'"""(?:\\.|[^\\])*?(?:"""|\Z)', re.S)
_STRING = re.compile(r'"(?:\\.|[^"\\\n])*(?:"|(?=\n)|\Z)')
_CHAR = re.compile(r"'(?:\\.|[^'\\\n])*(?:'|(?=\n)|\Z)")
_NUMBER = re.compile(
    r"""
    0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?\d+)?[lLfFdD]?
    | 0[bB][01_]+[lL]?
    | (?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d+)?[lLfFdD]?
    """,
    re.X,
)
_IDENT = re.compile(r"(?:[^\W\d]|\$)[\w$]*")


def lex(source: str) -> list[Token]:
    """Split *source* into tokens; the concatenation of their texts is *source*."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    n = len(source)
    while pos < n:
        ch = source[pos]
        nxt = source[pos + 1] if pos + 1 < n else ""
        m = None
        if ch.isspace():
            m = _WHITESPACE.match(source, pos)
            kind = TokenKind.WHITESPACE
        elif ch == "/" and nxt == "/":
            m = _LINE_COMMENT.match(source, pos)
            kind = TokenKind.COMMENT
        elif ch == "/" and nxt == "*":
            m = _BLOCK_COMMENT.match(source, pos)
            kind = TokenKind.COMMENT
        elif ch == '"':
            m = _TEXT_BLOCK.match(source, pos) if source.startswith('"""', pos) else None
            m = m or _STRING.match(source, pos)
            kind = TokenKind.STRING
        elif ch == "'":
            m = _CHAR.match(source, pos)
            kind = TokenKind.CHAR
        elif ch.isdigit() or (ch == "." and nxt.isdigit()):
            m = _NUMBER.match(source, pos)
            kind = TokenKind.NUMBER
        elif ch == "@":
            kind = TokenKind.ANNOTATION
        else:
            m = _IDENT.match(source, pos)
            if m:
                kind = TokenKind.KEYWORD if m.group() in KEYWORDS else TokenKind.IDENTIFIER
            else:
                kind = TokenKind.PUNCT
        end = m.end() if m and m.end() > pos else pos + 1
        text = source[pos:end]
        newlines = text.count("\n")
        last_line = line + newlines - (1 if text.endswith("\n") else 0)
        tokens.append(Token(kind, text, Span(pos, end, line, last_line)))
        line += newlines
        pos = end
    return tokens


_ESCAPES = {"n": "\n", "t": "\t", "b": "\b", "r": "\r", "f": "\f", "s": " ", '"': '"', "'": "'", "\\": "\\"}
_ESCAPE_RE = re.compile(r"\\(u+[0-9a-fA-F]{4}|[0-7]{1,3}|.)", re.S)


def decode_string_literal(text: str) -> str:
    """Return the value of a Java string (or text block) literal token."""
    if text.startswith('"""'):
        body = text[3:-3] if text.endswith('"""') and len(text) >= 6 else text[3:]
        # drop the mandatory line terminator after the opening delimiter
        body = body.split("\n", 1)[1] if "\n" in body else body
    else:
        body = text[1:-1] if len(text) >= 2 and text.endswith('"') else text[1:]

    def _sub(m: re.Match[str]) -> str:
        esc = m.group(1)
        if esc[0] == "u":
            return chr(int(esc.lstrip("u"), 16))
        if esc[0] in "01234567":
            return chr(int(esc, 8))
        return _ESCAPES.get(esc, esc)

    return _ESCAPE_RE.sub(_sub, body)


def encode_string_literal(value: str) -> str:
    """Quote *value* as a Java string literal."""
    out = value.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    return f'"{out}"'
