"""Line-oriented recursive-descent parser for ``.sdl`` scenario files.

Grammar (one statement per line, ``#`` starts a comment)::

    scenario <name>
    summary <free text>
    basis <subsystem> = <level> <level> ...
    state <name> = <expr>
    circuit = <component> ; <component> ...
    observe <name> = <expr>
    claim <name> = <expr>   # provenance note, kept as the claim reference
    interpretation = literal | evolved

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/' | <juxtaposition>) unary)*
    unary   := ('-' | '+') unary | primary
    primary := NUMBER | 'i' | 'pi' | 'sqrt' '(' expr ')' | 'sqrt' DIGITS
             | KET | IDENT '(' args ')' | '(' expr ')'

Single-token lookahead throughout.  Syntax errors are reported per line and
parsing resumes on the next line, so one file can yield many diagnostics.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from . import ast

KEYWORDS = ("scenario", "summary", "basis", "state", "circuit", "observe", "claim", "interpretation")
INTERPRETATIONS = ("literal", "evolved")
MAX_DEPTH = 64
MAX_HEIGHT = 200
MAX_DIGITS = 64

COMPONENT_SIGNATURES = {
    "bfield": ("label", "->", "label", ",", "label"),
    "bs": ("label", ",", "label", "[,expr]"),
    "phase": ("label", ",", "expr"),
    "spinturner": ("label", ",", "label", ",", "expr"),
    "analyzer": ("label", ",", "label"),
    "detector": ("label", ",", "label"),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f\v]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_](?:[A-Za-z0-9_]|(?<=_)-)*)
  | (?P<ket>\|[^|>\n]*>)
  | (?P<op>->|[-+*/(),=;])
    """,
    re.VERBOSE,
)
_LABEL_RE = re.compile(r"[A-Za-z0-9_.+\-]+\Z")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_SQRT_N_RE = re.compile(r"sqrt(\d+)\Z")


class _Error(Exception):
    def __init__(self, message: str, col: int):
        super().__init__(message)
        self.message = message
        self.col = col


@dataclass
class Token:
    kind: str
    text: str
    col: int


def tokenize(text: str, col0: int = 1) -> list[Token]:
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            ch = text[i]
            if ch == "|":
                raise _Error("unterminated ket (missing '>')", col0 + i)
            raise _Error(f"unexpected character {ch!r}", col0 + i)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), col0 + i))
        i = m.end()
    out.append(Token("eof", "", col0 + len(text)))
    return out


class _ExprParser:
    def __init__(self, tokens: list[Token], line: int):
        self.toks = tokens
        self.i = 0
        self.line = line
        self.depth = 0
        self.heights: dict[int, int] = {}

    def node(self, node, *children):
        h = 1 + max((self.heights.get(id(c), 1) for c in children), default=0)
        if h > MAX_HEIGHT:
            raise _Error(f"expression too complex (more than {MAX_HEIGHT} nested operations)", node.pos[1])
        self.heights[id(node)] = h
        return node

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def pos(self, tok: Token) -> tuple:
        return (self.line, tok.col)

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        if not self.at(kind, text):
            t = self.tok
            found = "end of line" if t.kind == "eof" else repr(t.text)
            raise _Error(f"expected {what or text or kind}, found {found}", t.col)
        return self.advance()

    def expect_end(self):
        if not self.at("eof"):
            raise _Error(f"unexpected {self.tok.text!r}", self.tok.col)

    def expr(self) -> ast.Expr:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise _Error("expression nested too deeply", self.tok.col)
        try:
            left = self.term()
            while self.at("op", "+") or self.at("op", "-"):
                op = self.advance()
                right = self.term()
                left = self.node(ast.Bin(op.text, left, right, self.pos(op)), left, right)
            return left
        finally:
            self.depth -= 1

    def _starts_primary(self) -> bool:
        t = self.tok
        return t.kind in ("num", "ident", "ket") or (t.kind == "op" and t.text == "(")

    def term(self) -> ast.Expr:
        left = self.unary()
        while True:
            if self.at("op", "*") or self.at("op", "/"):
                op = self.advance()
                right = self.unary()
                left = self.node(ast.Bin(op.text, left, right, self.pos(op)), left, right)
            elif self._starts_primary():
                t = self.tok
                right = self.unary()
                left = self.node(ast.Bin("*", left, right, self.pos(t)), left, right)
            else:
                return left

    def unary(self) -> ast.Expr:
        if self.at("op", "-") or self.at("op", "+"):
            op = self.advance()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                raise _Error("expression nested too deeply", op.col)
            try:
                operand = self.unary()
            finally:
                self.depth -= 1
            if op.text == "-":
                return self.node(ast.Neg(operand, self.pos(op)), operand)
            return operand
        return self.primary()

    def primary(self) -> ast.Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return ast.Num(parse_number(t), self.pos(t))
        if t.kind == "ket":
            self.advance()
            return ast.Ket(parse_ket_labels(t), self.pos(t))
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect("op", ")")
            return inner
        if t.kind == "ident":
            self.advance()
            if t.text == "i":
                return ast.Imag(self.pos(t))
            if t.text == "pi":
                return ast.Pi(self.pos(t))
            m = _SQRT_N_RE.match(t.text)
            if m:
                n = ast.Num(parse_number(Token("num", m.group(1), t.col + 4)), (self.line, t.col + 4))
                return ast.Sqrt(n, self.pos(t))
            if t.text == "sqrt":
                self.expect("op", "(", what="'(' after sqrt")
                inner = self.expr()
                self.expect("op", ")")
                return self.node(ast.Sqrt(inner, self.pos(t)), inner)
            if self.at("op", "("):
                return self.call(t)
            raise _Error(f"unknown identifier '{t.text}'", t.col)
        found = "end of line" if t.kind == "eof" else repr(t.text)
        raise _Error(f"expected a value, found {found}", t.col)

    def label(self, what: str = "label") -> str:
        t = self.tok
        if t.kind in ("num", "ident"):
            self.advance()
            return t.text
        found = "end of line" if t.kind == "eof" else repr(t.text)
        raise _Error(f"expected {what}, found {found}", t.col)

    def call(self, name: Token) -> ast.Call:
        self.expect("op", "(")
        args, kwargs = [], []
        if not self.at("op", ")"):
            while True:
                key = self.label("argument")
                if self.at("op", "="):
                    self.advance()
                    kwargs.append((key, self.label("level label")))
                else:
                    args.append(key)
                if self.at("op", ","):
                    self.advance()
                    continue
                break
        self.expect("op", ")")
        return ast.Call(name.text, tuple(args), tuple(kwargs), self.pos(name))

    def component(self) -> ast.ComponentNode:
        name = self.tok
        if name.kind != "ident":
            found = "end of line" if name.kind == "eof" else repr(name.text)
            raise _Error(f"expected component name, found {found}", name.col)
        self.advance()
        sig = COMPONENT_SIGNATURES.get(name.text)
        if sig is None:
            raise _Error(
                f"unknown component '{name.text}' (expected one of {', '.join(COMPONENT_SIGNATURES)})",
                name.col,
            )
        self.expect("op", "(")
        labels, angle = [], None
        for part in sig:
            if part == "label":
                labels.append(self.label())
            elif part == "expr":
                angle = self.expr()
            elif part == "[,expr]":
                if self.at("op", ","):
                    self.advance()
                    angle = self.expr()
            else:
                self.expect("op", part)
        self.expect("op", ")")
        return ast.ComponentNode(name.text, tuple(labels), angle, self.pos(name))


def parse_number(t: Token):
    digits = sum(ch.isdigit() for ch in t.text)
    if digits > MAX_DIGITS:
        raise _Error("numeric literal too long", t.col)
    if re.fullmatch(r"\d+", t.text):
        return int(t.text)
    v = float(t.text)
    if not math.isfinite(v):
        raise _Error("numeric literal out of range", t.col)
    return v


def parse_ket_labels(t: Token) -> tuple:
    body = t.text[1:-1]
    parts = [p.strip() for p in body.split(",")]
    col = t.col + 1
    for p in parts:
        if not _LABEL_RE.match(p):
            raise _Error(f"malformed ket label {p!r}", col)
    return tuple(parts)


def _split_comment(line: str) -> tuple[str, str | None]:
    k = line.find("#")
    if k < 0:
        return line, None
    return line[:k], line[k + 1:]


def _parse_line(line: str, lineno: int):
    code, comment = _split_comment(line)
    stripped = code.strip()
    if not stripped:
        return None
    lead = len(code) - len(code.lstrip())
    m = re.match(r"[A-Za-z_]+", stripped)
    if m is None or m.group() not in KEYWORDS:
        word = stripped.split()[0] if m is None else m.group()
        raise _Error(f"unknown statement '{word}'", lead + 1)
    kw = m.group()
    rest_off = lead + m.end()
    rest = code[rest_off:]
    pos = (lineno, lead + 1)

    if kw in ("scenario", "summary"):
        if rest and not rest[0].isspace():
            raise _Error(f"unknown statement '{stripped.split()[0]}'", lead + 1)
        text = rest.strip()
        if not text:
            raise _Error(f"'{kw}' needs a value", rest_off + 1)
        if kw == "scenario":
            if not _LABEL_RE.match(text):
                raise _Error(f"malformed scenario name {text!r}", rest_off + 1 + (len(rest) - len(rest.lstrip())))
            return ast.ScenarioName(text, pos)
        return ast.Summary(text, pos)

    if kw == "basis":
        mm = re.match(r"\s+([A-Za-z_][A-Za-z0-9_]*)\s*=(.*)\Z", rest)
        if mm is None:
            raise _Error("expected 'basis <name> = <levels>'", rest_off + 1)
        levels_text = mm.group(2)
        levels = levels_text.split()
        if not levels:
            raise _Error("basis needs at least one level", rest_off + mm.start(2) + 1)
        for lv in levels:
            if not _LABEL_RE.match(lv):
                col = rest_off + mm.start(2) + levels_text.index(lv) + 1
                raise _Error(f"malformed level label {lv!r}", col)
        return ast.BasisDecl(mm.group(1), tuple(levels), pos)

    toks = tokenize(rest, rest_off + 1)
    p = _ExprParser(toks, lineno)

    if kw in ("state", "observe", "claim"):
        name = p.expect("ident", what=f"{kw} name")
        p.expect("op", "=")
        expr = p.expr()
        p.expect_end()
        if kw == "state":
            return ast.StateDecl(name.text, expr, pos)
        if kw == "observe":
            return ast.ObserveDecl(name.text, expr, pos)
        return ast.ClaimDecl(name.text, expr, (comment or "").strip(), pos)

    if kw == "circuit":
        p.expect("op", "=")
        comps = []
        if not p.at("eof"):
            comps.append(p.component())
            while p.at("op", ";"):
                p.advance()
                if p.at("eof"):
                    break
                comps.append(p.component())
        p.expect_end()
        return ast.CircuitDecl(tuple(comps), pos)

    # interpretation
    p.expect("op", "=")
    val = p.expect("ident", what="'literal' or 'evolved'")
    if val.text not in INTERPRETATIONS:
        raise _Error(f"interpretation must be 'literal' or 'evolved', got '{val.text}'", val.col)
    p.expect_end()
    return ast.InterpretationDecl(val.text, pos)


def parse_syntax(text: str) -> tuple[ast.ScenarioDoc, list[ast.Diagnostic]]:
    """Syntax-only pass: the statement list plus any syntax diagnostics."""
    stmts, diags = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        try:
            st = _parse_line(line, lineno)
        except _Error as e:
            diags.append(ast.Diagnostic("error", e.message, lineno, e.col))
            continue
        if st is not None:
            stmts.append(st)
    return ast.ScenarioDoc(tuple(stmts)), diags
