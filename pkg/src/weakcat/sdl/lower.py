"""Semantic pass: resolve a ScenarioDoc into a Scenario, collecting diagnostics."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .. import optics
from ..qstate import CompositeBasis, LinearOperator, QStateError, StateVector
from ..scenarios import Claim, Scenario, ScenarioError
from . import ast
from .exact import ONE, PI, I, Exact

# cap on operator entries materialized per document (keeps hostile inputs bounded)
ENTRY_BUDGET = 4_000_000
SIGMA_ARGS = ("up", "dn", "x", "y", "z")
_PAULI = {
    "x": ((0, 1), (1, 0)),
    "y": ((0, -1j), (1j, 0)),
    "z": ((1, 0), (0, -1)),
}


class SemanticError(Exception):
    def __init__(self, message: str, pos: tuple):
        super().__init__(message)
        self.message = message
        self.pos = pos if pos and pos[0] else (1, 1)


class Kets(dict):
    """Sparse ket: composite index -> Exact coefficient."""


class _Lowering:
    def __init__(self, doc: ast.ScenarioDoc):
        self.doc = doc
        self.subsystems: list[tuple[str, tuple]] = []
        self.basis: Optional[CompositeBasis] = None
        self.budget = ENTRY_BUDGET
        self.diags: list[ast.Diagnostic] = []

    def error(self, msg: str, pos: tuple):
        pos = pos if pos and pos[0] else (1, 1)
        self.diags.append(ast.Diagnostic("error", msg, pos[0], pos[1]))

    def warn(self, msg: str, pos: tuple):
        pos = pos if pos and pos[0] else (1, 1)
        self.diags.append(ast.Diagnostic("warning", msg, pos[0], pos[1]))

    def need_basis(self, pos) -> CompositeBasis:
        if self.basis is None:
            if not self.subsystems:
                raise SemanticError("basis not declared", pos)
            try:
                self.basis = CompositeBasis(tuple(self.subsystems))
            except QStateError as e:
                raise SemanticError(str(e), pos) from None
        return self.basis

    def spend(self, entries: int, pos):
        self.budget -= entries
        if self.budget < 0:
            raise SemanticError("document too large (operator entry budget exhausted)", pos)

    # expression evaluation -------------------------------------------------
    def eval(self, node):
        if isinstance(node, ast.Num):
            return Exact(node.value)
        if isinstance(node, ast.Imag):
            return I
        if isinstance(node, ast.Pi):
            return PI
        if isinstance(node, ast.Sqrt):
            arg = self.eval(node.arg)
            if not isinstance(arg, Exact):
                raise SemanticError("sqrt needs a scalar argument", node.pos)
            return self.finite(arg.sqrt(), node.pos)
        if isinstance(node, ast.Ket):
            basis = self.need_basis(node.pos)
            try:
                return Kets({basis.index(node.labels): ONE})
            except QStateError as e:
                raise SemanticError(str(e), node.pos) from None
        if isinstance(node, ast.Neg):
            return self.mul(Exact(-1), self.eval(node.operand), node.pos)
        if isinstance(node, ast.Bin):
            left, right = self.eval(node.left), self.eval(node.right)
            if node.op == "+":
                return self.add(left, right, node.pos)
            if node.op == "-":
                return self.add(left, self.mul(Exact(-1), right, node.pos), node.pos)
            if node.op == "*":
                return self.mul(left, right, node.pos)
            return self.div(left, right, node.pos)
        if isinstance(node, ast.Call):
            return self.call(node)
        raise SemanticError(f"unsupported expression {type(node).__name__}", getattr(node, "pos", (1, 1)))

    def finite(self, x: Exact, pos) -> Exact:
        z = complex(x)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise SemanticError("non-finite coefficient", pos)
        return x

    def add(self, a, b, pos):
        if isinstance(a, Exact) and isinstance(b, Exact):
            return self.finite(a + b, pos)
        if isinstance(a, Kets) and isinstance(b, Kets):
            out = Kets(a)
            for k, v in b.items():
                out[k] = self.finite(out[k] + v, pos) if k in out else v
            return out
        if isinstance(a, LinearOperator) and isinstance(b, LinearOperator):
            return self.checked_op(a.matrix + b.matrix, pos)
        raise SemanticError(f"cannot add {_kind(a)} and {_kind(b)}", pos)

    def mul(self, a, b, pos):
        if isinstance(a, Exact) and isinstance(b, Exact):
            return self.finite(a * b, pos)
        if isinstance(a, Exact) and isinstance(b, Kets):
            a, b = b, a
        if isinstance(a, Kets) and isinstance(b, Exact):
            return Kets({k: self.finite(v * b, pos) for k, v in a.items()})
        if isinstance(a, Exact) and isinstance(b, LinearOperator):
            a, b = b, a
        if isinstance(a, LinearOperator) and isinstance(b, Exact):
            return self.checked_op(a.matrix * complex(b), pos)
        if isinstance(a, LinearOperator) and isinstance(b, LinearOperator):
            self.spend(a.dim ** 2, pos)
            return self.checked_op(a.matrix @ b.matrix, pos)
        if isinstance(a, LinearOperator) and isinstance(b, Kets):
            vec = np.zeros(a.dim, dtype=complex)
            for k, v in b.items():
                vec[k] = complex(v)
            out = a.matrix @ vec
            if not np.all(np.isfinite(out)):
                raise SemanticError("non-finite coefficient", pos)
            return Kets({int(k): Exact.float(out[k]) for k in np.flatnonzero(out)})
        raise SemanticError(f"cannot multiply {_kind(a)} by {_kind(b)}", pos)

    def div(self, a, b, pos):
        if not isinstance(b, Exact):
            raise SemanticError(f"cannot divide by {_kind(b)}", pos)
        if b.is_zero():
            raise SemanticError("division by zero", pos)
        try:
            inv = ONE / b
        except (ZeroDivisionError, OverflowError):
            raise SemanticError("division by zero", pos) from None
        return self.mul(a, self.finite(inv, pos), pos)

    def checked_op(self, m, pos) -> LinearOperator:
        if not np.all(np.isfinite(m)):
            raise SemanticError("non-finite operator entry", pos)
        self.spend(m.size, pos)
        return LinearOperator(self.basis, m)

    def call(self, node: ast.Call) -> LinearOperator:
        basis = self.need_basis(node.pos)
        self.spend(basis.dim ** 2, node.pos)
        name = node.name
        if name == "id":
            if node.args or node.kwargs:
                raise SemanticError("id() takes no arguments", node.pos)
            return LinearOperator(basis, np.eye(basis.dim, dtype=complex))
        if name == "proj":
            if node.args or not node.kwargs:
                raise SemanticError("proj needs subsystem=level arguments, e.g. proj(path=3)", node.pos)
            keys = [k for k, _ in node.kwargs]
            if len(set(keys)) != len(keys):
                raise SemanticError("proj names a subsystem twice", node.pos)
            diag = np.ones(1)
            for sub, levels in basis.subsystems:
                f = np.ones(len(levels))
                for k, v in node.kwargs:
                    if k == sub:
                        if v not in levels:
                            raise SemanticError(f"unknown level '{v}' in subsystem '{sub}'", node.pos)
                        f = np.zeros(len(levels))
                        f[levels.index(v)] = 1.0
                diag = np.kron(diag, f)
            for k in keys:
                if k not in basis.names:
                    raise SemanticError(f"unknown subsystem '{k}'", node.pos)
            return LinearOperator(basis, np.diag(diag.astype(complex)))
        if name == "sigma":
            if len(node.args) != 1 or node.kwargs or node.args[0] not in SIGMA_ARGS:
                raise SemanticError(f"sigma takes one of {', '.join(SIGMA_ARGS)}", node.pos)
            if optics.PROP not in basis.names:
                raise SemanticError(f"sigma needs a '{optics.PROP}' subsystem", node.pos)
            levels = basis.levels(optics.PROP)
            for t in (optics.SPIN_UP, optics.SPIN_DN):
                if t not in levels:
                    raise SemanticError(f"sigma needs property token '{t}' in the basis", node.pos)
            arg = node.args[0]
            local = np.zeros((len(levels), len(levels)), dtype=complex)
            iu, idn = levels.index(optics.SPIN_UP), levels.index(optics.SPIN_DN)
            if arg == "up":
                local[iu, iu] = 1
            elif arg == "dn":
                local[idn, idn] = 1
            else:
                # Pauli matrix on the spin pair, zero on spinless tokens
                local[np.ix_([iu, idn], [iu, idn])] = _PAULI[arg]
            mats = [np.eye(n) for n in basis.shape]
            mats[basis.position(optics.PROP)] = local
            out = np.ones((1, 1), dtype=complex)
            for m in mats:
                out = np.kron(out, m)
            return LinearOperator(basis, out)
        raise SemanticError(f"unknown operator '{name}' (expected proj, sigma or id)", node.pos)

    # statements ------------------------------------------------------------
    def state(self, st: ast.StateDecl) -> Optional[StateVector]:
        val = self.eval(st.expr)
        if not isinstance(val, Kets):
            raise SemanticError(f"state '{st.name}' must be a sum of kets, got {_kind(val)}", st.pos)
        amps = np.zeros(self.basis.dim, dtype=complex)
        for k, v in val.items():
            amps[k] = complex(v)
        n2 = float(np.vdot(amps, amps).real)
        if not np.isfinite(n2):
            raise SemanticError(f"state '{st.name}' has non-finite norm", st.pos)
        if n2 <= 1e-28:
            raise SemanticError(f"state '{st.name}' is the null vector", st.pos)
        if abs(n2 - 1) > 1e-12:
            self.warn(f"state '{st.name}' renormalized (norm^2 = {n2:.17g})", st.pos)
            amps = amps / np.sqrt(n2)
        return StateVector(self.basis, amps)

    def component(self, c: ast.ComponentNode):
        angle = None
        if c.angle is not None:
            val = self.eval(c.angle)
            if not isinstance(val, Exact):
                raise SemanticError(f"{c.kind} angle must be a scalar", c.pos)
            z = complex(val)
            if abs(z.imag) > 1e-12:
                raise SemanticError(f"{c.kind} angle must be real", c.pos)
            angle = z.real
        lab = c.labels
        if c.kind == "bfield":
            comp = optics.MagneticField(lab[0], lab[1], lab[2])
        elif c.kind == "bs":
            comp = optics.BeamSplitter(lab[0], lab[1]) if angle is None else optics.BeamSplitter(lab[0], lab[1], angle)
        elif c.kind == "phase":
            comp = optics.PhaseShifter(lab[0], angle)
        elif c.kind == "spinturner":
            comp = optics.SpinTurner(lab[0], lab[1], angle)
        elif c.kind == "analyzer":
            comp = optics.Analyzer(lab[0], lab[1])
        elif c.kind == "detector":
            comp = optics.Detector(lab[0], lab[1])
        else:
            raise SemanticError(f"unknown component '{c.kind}'", c.pos)
        basis = self.need_basis(c.pos)
        self.spend(basis.dim ** 2, c.pos)
        try:
            optics.component_operator(comp, basis)
        except (optics.OpticsError, QStateError) as e:
            raise SemanticError(str(e), c.pos) from None
        if isinstance(comp, optics.Analyzer):
            raise SemanticError("non-unitary circuit element 'analyzer' in scenario evolution", c.pos)
        return comp

    def run(self, default_name: str, interpretation: Optional[str]) -> Optional[Scenario]:
        states: dict[str, StateVector] = {}
        seen_states: set[str] = set()
        observables: dict[str, LinearOperator] = {}
        observe_pos: dict[str, tuple] = {}
        claims: list[tuple[ast.ClaimDecl, Exact]] = []
        comps: list = []
        comp_nodes: list = []
        name = summary = interp = None
        used_basis = False

        for st in self.doc.statements:
            try:
                if isinstance(st, ast.ScenarioName):
                    if name is not None:
                        raise SemanticError("scenario name declared twice", st.pos)
                    name = st.name
                elif isinstance(st, ast.Summary):
                    summary = st.text if summary is None else summary + " " + st.text
                elif isinstance(st, ast.BasisDecl):
                    if self.basis is not None or used_basis:
                        raise SemanticError("basis declared after first use", st.pos)
                    if any(n == st.name for n, _ in self.subsystems):
                        raise SemanticError(f"subsystem '{st.name}' declared twice", st.pos)
                    if len(set(st.levels)) != len(st.levels):
                        raise SemanticError(f"duplicate level labels in subsystem '{st.name}'", st.pos)
                    dim = len(st.levels)
                    for _, lv in self.subsystems:
                        dim *= len(lv)
                    if dim > 4096:
                        raise SemanticError(f"dimension {dim} exceeds engine bound 4096", st.pos)
                    self.subsystems.append((st.name, st.levels))
                elif isinstance(st, ast.StateDecl):
                    used_basis = True
                    if st.name in seen_states:
                        raise SemanticError(f"state '{st.name}' declared twice", st.pos)
                    seen_states.add(st.name)
                    self.need_basis(st.pos)
                    states[st.name] = self.state(st)
                    if st.name not in ("pre", "post"):
                        self.warn(f"state '{st.name}' is not used (only 'pre' and 'post' are)", st.pos)
                elif isinstance(st, ast.CircuitDecl):
                    used_basis = True
                    for c in st.components:
                        try:
                            comps.append(self.component(c))
                            comp_nodes.append(c)
                        except SemanticError as e:
                            self.error(e.message, e.pos)
                elif isinstance(st, ast.ObserveDecl):
                    used_basis = True
                    if st.name in observe_pos:
                        raise SemanticError(f"observable '{st.name}' declared twice", st.pos)
                    observe_pos[st.name] = st.pos
                    val = self.eval(st.expr)
                    if not isinstance(val, LinearOperator):
                        raise SemanticError(f"observable '{st.name}' must be an operator, got {_kind(val)}", st.pos)
                    if not val.is_hermitian(1e-10):
                        self.warn(f"observable '{st.name}' is not Hermitian", st.pos)
                    observables[st.name] = val
                elif isinstance(st, ast.ClaimDecl):
                    val = self.eval(st.expr)
                    if not isinstance(val, Exact):
                        raise SemanticError(f"claim for '{st.name}' must be a scalar, got {_kind(val)}", st.pos)
                    claims.append((st, val))
                elif isinstance(st, ast.InterpretationDecl):
                    if interp is not None:
                        raise SemanticError("interpretation declared twice", st.pos)
                    interp = st.value
            except SemanticError as e:
                self.error(e.message, e.pos)

        claimed = set()
        claim_objs = []
        for st, val in claims:
            if st.name not in observe_pos:
                self.error(f"claim names unknown observable '{st.name}'", st.pos)
            elif st.name in claimed:
                self.error(f"observable '{st.name}' claimed twice", st.pos)
            else:
                claimed.add(st.name)
                claim_objs.append(Claim(st.name, complex(val), st.ref))

        if not self.subsystems and not self.diags:
            self.error("basis not declared", (1, 1))
        for need in ("pre", "post"):
            if need not in seen_states:
                self.error(f"missing 'state {need}'", (1, 1))

        circuit = None
        if comps:
            dets = [isinstance(c, optics.Detector) for c in comps]
            if any(d and not later for d, later in zip(dets, dets[1:])):
                first_bad = next(n for n, d, later in zip(comp_nodes, dets, dets[1:]) if d and not later)
                self.error("detectors may only appear at the end of a circuit", first_bad.pos)
            else:
                try:
                    circuit = optics.Circuit(self.basis, tuple(comps))
                except (optics.OpticsError, QStateError) as e:
                    self.error(str(e), comp_nodes[0].pos)

        if any(d.severity == "error" for d in self.diags):
            return None
        try:
            return Scenario(
                name=name or default_name,
                basis=self.basis,
                pre=states["pre"],
                post=states["post"],
                evolution=circuit,
                observables=tuple(observables.items()),
                claims=tuple(claim_objs),
                interpretation=interpretation or interp or "literal",
                summary=summary or "",
                doc=self.doc if interpretation is None else self.doc.with_interpretation(interpretation),
            )
        except ScenarioError as e:
            self.error(str(e), (1, 1))
            return None


def _kind(v) -> str:
    if isinstance(v, Exact):
        return "a scalar"
    if isinstance(v, Kets):
        return "a ket"
    return "an operator"


def lower(doc: ast.ScenarioDoc, interpretation: Optional[str] = None,
          default_name: str = "unnamed") -> tuple[Optional[Scenario], list[ast.Diagnostic]]:
    """Resolve ``doc``; ``interpretation`` overrides the document's own flag."""
    lw = _Lowering(doc)
    scenario = lw.run(default_name, interpretation)
    diags = sorted(lw.diags, key=lambda d: (d.line, d.column))
    return scenario, diags
