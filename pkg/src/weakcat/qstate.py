"""Dense complex states and operators over small labeled composite bases.

A basis is an ordered list of named subsystems, each with ordered level
labels.  Composite indices are row-major over the subsystems, so the last
subsystem varies fastest (the Kronecker convention used by ``numpy.kron``).
All values are immutable; every operation returns a new object.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-12
MAX_DIM = 4096


class QStateError(ValueError):
    pass


@dataclass(frozen=True)
class CompositeBasis:
    subsystems: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        subs = tuple((str(name), tuple(str(lv) for lv in levels)) for name, levels in self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        if not subs:
            raise QStateError("basis needs at least one subsystem")
        names = [name for name, _ in subs]
        if len(set(names)) != len(names):
            raise QStateError(f"duplicate subsystem names in {names}")
        for name, levels in subs:
            if not levels:
                raise QStateError(f"subsystem '{name}' has no levels")
            if len(set(levels)) != len(levels):
                raise QStateError(f"duplicate level labels in subsystem '{name}'")
        if self.dim > MAX_DIM:
            raise QStateError(f"dimension {self.dim} exceeds engine bound {MAX_DIM}")

    @classmethod
    def of(cls, *subsystems: tuple[str, Iterable[str]]) -> "CompositeBasis":
        return cls(tuple((name, tuple(levels)) for name, levels in subsystems))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.subsystems)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(levels) for _, levels in self.subsystems)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    def levels(self, name: str) -> tuple[str, ...]:
        for sub, levels in self.subsystems:
            if sub == name:
                return levels
        raise QStateError(f"unknown subsystem '{name}'")

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise QStateError(f"unknown subsystem '{name}'") from None

    def index(self, labels: Sequence[str]) -> int:
        if len(labels) != len(self.subsystems):
            raise QStateError(
                f"expected {len(self.subsystems)} labels ({', '.join(self.names)}), got {len(labels)}"
            )
        idx = []
        for (name, levels), label in zip(self.subsystems, labels):
            try:
                idx.append(levels.index(str(label)))
            except ValueError:
                raise QStateError(f"unknown level '{label}' in subsystem '{name}'") from None
        return int(np.ravel_multi_index(idx, self.shape))

    def labels(self, index: int) -> tuple[str, ...]:
        idx = np.unravel_index(index, self.shape)
        return tuple(levels[i] for (_, levels), i in zip(self.subsystems, idx))

    def all_labels(self) -> list[tuple[str, ...]]:
        return list(itertools.product(*(levels for _, levels in self.subsystems)))


def _check_same(a: CompositeBasis, b: CompositeBasis):
    if a != b:
        raise QStateError(f"basis mismatch: {a.names}{a.shape} vs {b.names}{b.shape}")


def _frozen(arr, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: CompositeBasis
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = _frozen(self.amps).reshape(-1)
        if amps.shape[0] != self.basis.dim:
            raise QStateError(f"amplitude length {amps.shape[0]} != basis dimension {self.basis.dim}")
        if not np.all(np.isfinite(amps)):
            raise QStateError("non-finite amplitude")
        object.__setattr__(self, "amps", amps)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm2))

    @property
    def normalized(self) -> bool:
        return abs(self.norm2 - 1.0) <= TOL

    def amplitude(self, *labels: str) -> complex:
        return complex(self.amps[self.basis.index(labels)])

    def terms(self, tol: float = 0.0) -> list[tuple[tuple[str, ...], complex]]:
        """Nonzero (labels, amplitude) pairs in basis order."""
        return [
            (self.basis.labels(k), complex(a))
            for k, a in enumerate(self.amps)
            if abs(a) > tol
        ]

    def allclose(self, other: "StateVector", tol: float = TOL) -> bool:
        _check_same(self.basis, other.basis)
        return bool(np.max(np.abs(self.amps - other.amps), initial=0.0) <= tol)

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same(self.basis, other.basis)
        return StateVector(self.basis, self.amps + other.amps)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_same(self.basis, other.basis)
        return StateVector(self.basis, self.amps - other.amps)

    def __mul__(self, c: complex) -> "StateVector":
        return StateVector(self.basis, self.amps * complex(c))

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> "StateVector":
        return StateVector(self.basis, self.amps / complex(c))

    def __neg__(self) -> "StateVector":
        return StateVector(self.basis, -self.amps)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    basis: CompositeBasis
    matrix: np.ndarray = field(repr=False)
    projector: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.basis.dim
        if m.shape != (d, d):
            raise QStateError(f"operator shape {m.shape} does not match basis dimension {d}")
        if not np.all(np.isfinite(m)):
            raise QStateError("non-finite operator entry")
        object.__setattr__(self, "matrix", m)
        if self.projector and not self.is_projector():
            raise QStateError("operator flagged projector fails P = P^dagger = P^2")
        if self.unitary and not self.is_unitary():
            raise QStateError("operator flagged unitary fails U^dagger U = I")

    @property
    def dim(self) -> int:
        return self.basis.dim

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix.conj().T, self.projector, self.unitary)

    def is_hermitian(self, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def is_projector(self, tol: float = TOL) -> bool:
        m = self.matrix
        return self.is_hermitian(tol) and bool(np.max(np.abs(m @ m - m), initial=0.0) <= tol)

    def is_unitary(self, tol: float = TOL) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(self.dim)), initial=0.0) <= tol)

    def allclose(self, other: "LinearOperator", tol: float = TOL) -> bool:
        _check_same(self.basis, other.basis)
        return bool(np.max(np.abs(self.matrix - other.matrix), initial=0.0) <= tol)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return apply(self, other)
        _check_same(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix @ other.matrix)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        _check_same(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        _check_same(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix - other.matrix)

    def __mul__(self, c: complex) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix * complex(c))

    __rmul__ = __mul__

    def __neg__(self) -> "LinearOperator":
        return LinearOperator(self.basis, -self.matrix)


def basis_ket(basis: CompositeBasis, labels: Sequence[str]) -> StateVector:
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index(labels)] = 1.0
    return StateVector(basis, amps)


def superpose(terms: Sequence[tuple[complex, StateVector]]) -> StateVector:
    """Linear combination of states sharing one basis; not normalized."""
    if not terms:
        raise QStateError("empty term list")
    basis = terms[0][1].basis
    amps = np.zeros(basis.dim, dtype=complex)
    for c, s in terms:
        _check_same(basis, s.basis)
        amps += complex(c) * s.amps
    return StateVector(basis, amps)


def inner(bra: StateVector, ket: StateVector) -> complex:
    _check_same(bra.basis, ket.basis)
    return complex(np.vdot(bra.amps, ket.amps))


def normalize(s: StateVector) -> StateVector:
    n = s.norm
    if n <= 1e-14:
        raise QStateError("cannot normalize null state")
    return StateVector(s.basis, s.amps / n)


def _joined(a: CompositeBasis, b: CompositeBasis) -> CompositeBasis:
    dim = a.dim * b.dim
    if dim > MAX_DIM:
        raise QStateError(f"dimension {dim} exceeds engine bound {MAX_DIM}")
    return CompositeBasis(a.subsystems + b.subsystems)


def tensor_state(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(_joined(a.basis, b.basis), np.kron(a.amps, b.amps))


def tensor_op(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    return LinearOperator(_joined(a.basis, b.basis), np.kron(a.matrix, b.matrix))


def identity(basis: CompositeBasis) -> LinearOperator:
    return LinearOperator(basis, np.eye(basis.dim), projector=True, unitary=True)


def outer(ket: StateVector, bra: StateVector) -> LinearOperator:
    _check_same(ket.basis, bra.basis)
    return LinearOperator(ket.basis, np.outer(ket.amps, bra.amps.conj()))


def projector_onto(states: Sequence[StateVector], tol: float = 1e-10) -> LinearOperator:
    if not states:
        raise QStateError("empty state list")
    basis = states[0].basis
    for s in states:
        _check_same(basis, s.basis)
    vecs = np.array([s.amps for s in states])
    gram = vecs.conj() @ vecs.T
    if np.max(np.abs(gram - np.eye(len(states))), initial=0.0) > tol:
        raise QStateError("projector_onto requires orthonormal states")
    return LinearOperator(basis, vecs.T @ vecs.conj(), projector=True)


def level_projector(basis: CompositeBasis, **levels: str) -> LinearOperator:
    """Projector onto the given levels of the named subsystems, identity on the rest.

    ``level_projector(b, path="3")`` is the arm projector on path 3;
    ``level_projector(b, path="4", prop="s_dn")`` restricts the property too.
    """
    factors = []
    for name, lv in basis.subsystems:
        if name in levels:
            diag = np.zeros(len(lv))
            label = str(levels[name])
            if label not in lv:
                raise QStateError(f"unknown level '{label}' in subsystem '{name}'")
            diag[lv.index(label)] = 1.0
        else:
            diag = np.ones(len(lv))
        factors.append(diag)
    for name in levels:
        basis.position(name)
    diag = factors[0]
    for f in factors[1:]:
        diag = np.kron(diag, f)
    return LinearOperator(basis, np.diag(diag.astype(complex)), projector=True)


def embed(basis: CompositeBasis, subsystem: str, local: np.ndarray) -> LinearOperator:
    """Lift a single-subsystem matrix to the full basis (identity elsewhere)."""
    pos = basis.position(subsystem)
    mats = [np.eye(n) for n in basis.shape]
    local = np.asarray(local, dtype=complex)
    if local.shape != (basis.shape[pos],) * 2:
        raise QStateError(f"local operator shape {local.shape} does not fit subsystem '{subsystem}'")
    mats[pos] = local
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return LinearOperator(basis, out)


def apply(op: LinearOperator, s: StateVector) -> StateVector:
    _check_same(op.basis, s.basis)
    return StateVector(s.basis, op.matrix @ s.amps)
