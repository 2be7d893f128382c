"""Tokenizer for QML quality-model sources."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from qproc.diagnostics import Diagnostic, SourceSpan

KEYWORDS = frozenset(
    """
    model process input output product part customer receives supplier supplies
    requirement on characteristic proof observation measurement test control
    validation checking checks conformity nonconformity detected by cause of
    action treats true false shape space time machine method material manpower
    environment corrective preventive scheduled conditional predictive
    """.split()
)

IDENT = re.compile(r"[^\W\d]\w*\Z")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<word>[^\W\d]\w*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[{}\[\]=,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # word | string | number | punct | eof
    text: str
    line: int
    column: int
    first_on_line: bool = False

    @property
    def is_keyword(self) -> bool:
        return self.kind == "word" and self.text in KEYWORDS

    def is_(self, text: str) -> bool:
        """True for the bare keyword or punctuation ``text``."""
        return self.kind in ("word", "punct") and self.text == text

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.column, len(self.text))

    def value(self):
        """Decoded literal value of a string, number or boolean token."""
        if self.kind == "string":
            return json.loads(self.text)
        if self.kind == "number":
            if any(c in self.text for c in ".eE"):
                return float(self.text)
            return int(self.text)
        if self.text in ("true", "false"):
            return self.text == "true"
        raise ValueError(self.text)


def tokenize(text: str, file: str, diagnostics: list[Diagnostic]) -> list[Token]:
    """Split ``text`` into tokens.  Bad characters are reported and skipped."""
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    first = True
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        column = pos - line_start + 1
        if m is None:
            bad = text[pos]
            if bad == '"':
                end = text.find("\n", pos)
                end = len(text) if end < 0 else end
                msg = "unterminated string"
            else:
                end = pos + 1
                msg = f"unexpected character {bad!r}"
            diagnostics.append(
                Diagnostic.of("QML-001", msg, SourceSpan(file, line, column, end - pos))
            )
            pos = end
            continue
        group = m.lastgroup
        if group == "nl":
            line += 1
            line_start = m.end()
            first = True
        elif group == "string":
            try:
                json.loads(m.group())
            except json.JSONDecodeError:
                diagnostics.append(
                    Diagnostic.of(
                        "QML-001",
                        "invalid escape in string",
                        SourceSpan(file, line, column, m.end() - pos),
                    )
                )
            else:
                tokens.append(Token("string", m.group(), line, column, first))
            first = False
        elif group not in ("ws", "comment"):
            tokens.append(Token(group, m.group(), line, column, first))
            first = False
        pos = m.end()
    last_line, last_col = (tokens[-1].line, tokens[-1].column) if tokens else (line, 1)
    tokens.append(Token("eof", "", last_line, last_col, True))
    return tokens

