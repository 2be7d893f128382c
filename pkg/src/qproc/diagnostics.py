"""Diagnostics shared by the parser, the rule engine and the tools."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Union


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Rule:
    code: str
    severity: Severity
    step: int | None
    description: str


@lru_cache(maxsize=None)
def rule_catalog() -> dict[str, Rule]:
    raw = json.loads(resources.files("qproc").joinpath("rules.json").read_text("utf-8"))
    return {
        r["code"]: Rule(r["code"], Severity(r["severity"]), r["step"], r["description"])
        for r in raw
    }


Subject = Union[str, SourceSpan, None]


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    subject: Subject = None
    step: int | None = None

    @classmethod
    def of(cls, code: str, message: str, subject: Subject = None, step: int | None = None):
        """Build a diagnostic whose severity comes from the rule catalog."""
        rule = rule_catalog()[code]
        if step is None:
            step = rule.step
        return cls(rule.severity, code, message, subject, step)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def to_dict(self) -> dict:
        subject = self.subject
        if isinstance(subject, SourceSpan):
            subject = {"file": subject.file, "line": subject.line, "column": subject.column,
                       "length": subject.length}
        return {
            "severity": self.severity.value,
            "code": self.code,
            "message": self.message,
            "subject": subject,
            "step": self.step,
        }


def has_errors(diagnostics) -> bool:
    return any(d.is_error for d in diagnostics)
