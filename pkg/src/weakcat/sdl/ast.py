"""Syntax tree for scenario description files.

Every node records its source line/column; positions are excluded from
equality so that round-tripped documents compare structurally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: Union[int, float]
    pos: tuple = _pos()


@dataclass(frozen=True)
class Imag:
    pos: tuple = _pos()


@dataclass(frozen=True)
class Pi:
    pos: tuple = _pos()


@dataclass(frozen=True)
class Sqrt:
    arg: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class Ket:
    labels: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class Call:
    """Operator atom: ``proj(path=3)``, ``sigma(dn)``, ``id()``."""
    name: str
    args: tuple = ()
    kwargs: tuple = ()
    pos: tuple = _pos()


Expr = Union[Num, Imag, Pi, Sqrt, Ket, Neg, Bin, Call]


@dataclass(frozen=True)
class ScenarioName:
    name: str
    pos: tuple = _pos()


@dataclass(frozen=True)
class Summary:
    text: str
    pos: tuple = _pos()


@dataclass(frozen=True)
class BasisDecl:
    name: str
    levels: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class StateDecl:
    name: str
    expr: Expr
    pos: tuple = _pos()


@dataclass(frozen=True)
class ComponentNode:
    kind: str
    labels: tuple
    angle: Optional[Expr] = None
    pos: tuple = _pos()


@dataclass(frozen=True)
class CircuitDecl:
    components: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class ObserveDecl:
    name: str
    expr: Expr
    pos: tuple = _pos()


@dataclass(frozen=True)
class ClaimDecl:
    name: str
    expr: Expr
    ref: str = ""
    pos: tuple = _pos()


@dataclass(frozen=True)
class InterpretationDecl:
    value: str
    pos: tuple = _pos()


Statement = Union[ScenarioName, Summary, BasisDecl, StateDecl, CircuitDecl, ObserveDecl, ClaimDecl, InterpretationDecl]


@dataclass(frozen=True)
class ScenarioDoc:
    statements: tuple = ()

    def of_type(self, kind) -> list:
        return [s for s in self.statements if isinstance(s, kind)]

    @property
    def name(self) -> Optional[str]:
        names = self.of_type(ScenarioName)
        return names[-1].name if names else None

    @property
    def interpretation(self) -> Optional[str]:
        decls = self.of_type(InterpretationDecl)
        return decls[-1].value if decls else None

    def with_interpretation(self, value: str) -> "ScenarioDoc":
        stmts = [s for s in self.statements if not isinstance(s, InterpretationDecl)]
        stmts.append(InterpretationDecl(value))
        return ScenarioDoc(tuple(stmts))
