"""Render a ScenarioDoc back to ``.sdl`` text.

Parentheses are emitted wherever the left-associative grammar would
otherwise rebuild a different tree, so ``parse(serialize(doc)) == doc``.
"""
from __future__ import annotations

from . import ast

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_ATOM = 4


def format_number(v) -> str:
    if isinstance(v, bool):
        v = int(v)
    if isinstance(v, int):
        return str(v)
    text = format(v, ".17g")
    if "e" in text or "E" in text:
        mant, _, exp = text.lower().partition("e")
        if "." not in mant:
            mant += ".0"
        return f"{mant}e{exp}"
    if "." not in text:
        text += ".0"
    return text


def _prec(node) -> int:
    if isinstance(node, ast.Bin):
        return _PREC[node.op]
    if isinstance(node, ast.Neg):
        return 3
    return _ATOM


def expr_text(node) -> str:
    if isinstance(node, ast.Num):
        if node.value < 0:
            return f"({format_number(node.value)})"
        return format_number(node.value)
    if isinstance(node, ast.Imag):
        return "i"
    if isinstance(node, ast.Pi):
        return "pi"
    if isinstance(node, ast.Sqrt):
        return f"sqrt({expr_text(node.arg)})"
    if isinstance(node, ast.Ket):
        return "|" + ",".join(node.labels) + ">"
    if isinstance(node, ast.Call):
        args = list(node.args) + [f"{k}={v}" for k, v in node.kwargs]
        return f"{node.name}({', '.join(args)})"
    if isinstance(node, ast.Neg):
        inner = expr_text(node.operand)
        if _prec(node.operand) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, ast.Bin):
        p = _PREC[node.op]
        left = expr_text(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = expr_text(node.right)
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"cannot serialize {node!r}")


def _component_text(c: ast.ComponentNode) -> str:
    lab = c.labels
    if c.kind == "bfield":
        return f"bfield({lab[0]} -> {lab[1]}, {lab[2]})"
    args = list(lab)
    if c.angle is not None:
        args.append(expr_text(c.angle))
    return f"{c.kind}({', '.join(args)})"


def statement_text(st) -> str:
    if isinstance(st, ast.ScenarioName):
        return f"scenario {st.name}"
    if isinstance(st, ast.Summary):
        return f"summary {st.text}"
    if isinstance(st, ast.BasisDecl):
        return f"basis {st.name} = {' '.join(st.levels)}"
    if isinstance(st, ast.StateDecl):
        return f"state {st.name} = {expr_text(st.expr)}"
    if isinstance(st, ast.CircuitDecl):
        return "circuit = " + "; ".join(_component_text(c) for c in st.components)
    if isinstance(st, ast.ObserveDecl):
        return f"observe {st.name} = {expr_text(st.expr)}"
    if isinstance(st, ast.ClaimDecl):
        line = f"claim {st.name} = {expr_text(st.expr)}"
        return f"{line}  # {st.ref}" if st.ref else line
    if isinstance(st, ast.InterpretationDecl):
        return f"interpretation = {st.value}"
    raise TypeError(f"cannot serialize {st!r}")


def serialize(doc: ast.ScenarioDoc) -> str:
    return "".join(statement_text(st).rstrip() + "\n" for st in doc.statements)
