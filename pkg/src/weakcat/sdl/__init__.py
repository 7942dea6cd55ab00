"""Scenario description language: parse, check, lower, serialize."""
from __future__ import annotations

from typing import Optional, Union

from .ast import Diagnostic, ScenarioDoc
from .lower import lower
from .parser import parse_syntax
from .serialize import serialize

__all__ = [
    "Diagnostic",
    "ScenarioDoc",
    "SdlError",
    "check",
    "lower",
    "lower_text",
    "parse",
    "serialize",
]


class SdlError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


def check(text: str) -> tuple[Optional[ScenarioDoc], list[Diagnostic]]:
    """Syntax and semantic diagnostics; the doc is None when any error is found."""
    doc, diags = parse_syntax(text)
    if diags:
        return None, diags
    _, sem = lower(doc)
    if any(d.severity == "error" for d in sem):
        return None, sem
    return doc, sem


def parse(text: str) -> Union[ScenarioDoc, list[Diagnostic]]:
    doc, diags = check(text)
    return doc if doc is not None else [d for d in diags if d.severity == "error"]


def lower_text(text: str, interpretation: Optional[str] = None, default_name: str = "unnamed"):
    doc, diags = parse_syntax(text)
    if diags:
        raise SdlError(diags)
    scenario, sem = lower(doc, interpretation=interpretation, default_name=default_name)
    if scenario is None:
        raise SdlError([d for d in sem if d.severity == "error"])
    return scenario
