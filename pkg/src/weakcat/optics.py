"""Interferometer components compiled to operators on a path (x) property basis.

Conventions: the path subsystem is named ``path`` and the internal-degree
subsystem ``prop``; spin tokens are ``s_up`` / ``s_dn``.  A 50:50 beam
splitter is ``theta = pi/4`` with matrix ``[[cos, i sin], [i sin, cos]]`` on
the two arms.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .qstate import (
    CompositeBasis,
    LinearOperator,
    QStateError,
    StateVector,
    apply,
    identity,
    level_projector,
)

PATH = "path"
PROP = "prop"
SPIN_UP = "s_up"
SPIN_DN = "s_dn"

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OpticsError(ValueError):
    pass


@dataclass(frozen=True)
class BeamSplitter:
    path_a: str
    path_b: str
    theta: float = np.pi / 4


@dataclass(frozen=True)
class PhaseShifter:
    path: str
    phi: float


@dataclass(frozen=True)
class SpinTurner:
    path: str
    axis: str
    angle: float


@dataclass(frozen=True)
class MagneticField:
    in_path: str
    up_out_path: str
    down_out_path: str


@dataclass(frozen=True)
class Analyzer:
    path: str
    spin_level: str


@dataclass(frozen=True)
class Detector:
    name: str
    path: str


Component = Union[BeamSplitter, PhaseShifter, SpinTurner, MagneticField, Analyzer, Detector]


def _path_index(basis: CompositeBasis, path: str) -> int:
    levels = basis.levels(PATH)
    if str(path) not in levels:
        raise OpticsError(f"unknown level '{path}' in subsystem '{PATH}'")
    return levels.index(str(path))


def _require_spin(basis: CompositeBasis):
    levels = basis.levels(PROP)
    missing = [t for t in (SPIN_UP, SPIN_DN) if t not in levels]
    if missing:
        raise OpticsError(f"component needs property tokens absent from basis: {', '.join(missing)}")


def _index(basis: CompositeBasis, path: str, prop: str) -> int:
    labels = []
    for name, _ in basis.subsystems:
        if name == PATH:
            labels.append(path)
        elif name == PROP:
            labels.append(prop)
        else:
            raise OpticsError(f"optics basis may only hold '{PATH}' and '{PROP}' subsystems")
    return basis.index(labels)


def _check_basis(basis: CompositeBasis):
    if PATH not in basis.names:
        raise OpticsError(f"basis has no '{PATH}' subsystem")
    extra = set(basis.names) - {PATH, PROP}
    if extra:
        raise OpticsError(f"optics basis may only hold '{PATH}' and '{PROP}' subsystems")


def component_operator(c: Component, basis: CompositeBasis) -> LinearOperator:
    _check_basis(basis)
    props = basis.levels(PROP) if PROP in basis.names else ()
    if isinstance(c, Detector):
        _path_index(basis, c.path)
        return level_projector(basis, **{PATH: c.path})
    if isinstance(c, Analyzer):
        _path_index(basis, c.path)
        if c.spin_level not in props:
            raise OpticsError(f"component needs property token absent from basis: {c.spin_level}")
        m = np.zeros((basis.dim, basis.dim), dtype=complex)
        k = _index(basis, c.path, c.spin_level)
        m[k, k] = 1.0
        return LinearOperator(basis, m, projector=True)

    m = np.eye(basis.dim, dtype=complex)
    if isinstance(c, BeamSplitter):
        if str(c.path_a) == str(c.path_b):
            raise OpticsError("beam splitter needs two distinct paths")
        _path_index(basis, c.path_a)
        _path_index(basis, c.path_b)
        cs, sn = np.cos(c.theta), np.sin(c.theta)
        for p in props:
            a, b = _index(basis, c.path_a, p), _index(basis, c.path_b, p)
            m[a, a], m[a, b], m[b, a], m[b, b] = cs, 1j * sn, 1j * sn, cs
    elif isinstance(c, PhaseShifter):
        _path_index(basis, c.path)
        for p in props:
            k = _index(basis, c.path, p)
            m[k, k] = np.exp(1j * c.phi)
    elif isinstance(c, SpinTurner):
        _path_index(basis, c.path)
        _require_spin(basis)
        if c.axis not in _PAULI:
            raise OpticsError(f"spin turner axis must be x, y or z, got '{c.axis}'")
        rot = np.cos(c.angle / 2) * np.eye(2) - 1j * np.sin(c.angle / 2) * _PAULI[c.axis]
        idx = [_index(basis, c.path, SPIN_UP), _index(basis, c.path, SPIN_DN)]
        m[np.ix_(idx, idx)] = rot
    elif isinstance(c, MagneticField):
        for p in (c.in_path, c.up_out_path, c.down_out_path):
            _path_index(basis, p)
        _require_spin(basis)
        if str(c.up_out_path) == str(c.down_out_path):
            raise OpticsError("magnetic field needs distinct up and down output paths")
        m = np.eye(basis.dim)
        # one transposition per spin level: |in,s> <-> |out_s,s>
        for spin, out in ((SPIN_UP, c.up_out_path), (SPIN_DN, c.down_out_path)):
            if str(out) == str(c.in_path):
                continue
            a, b = _index(basis, c.in_path, spin), _index(basis, out, spin)
            m[[a, b]] = m[[b, a]]
        m = m.astype(complex)
    else:
        raise OpticsError(f"unknown component {c!r}")
    return LinearOperator(basis, m, unitary=True)


@dataclass(frozen=True, eq=False)
class Circuit:
    basis: CompositeBasis
    elements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        seen_detector = False
        names = set()
        for c in self.elements:
            if isinstance(c, Detector):
                seen_detector = True
                if c.name in names:
                    raise OpticsError(f"duplicate detector '{c.name}'")
                names.add(c.name)
            elif seen_detector:
                raise OpticsError("detectors may only appear at the end of a circuit")
        # compile once to surface invalid components early
        object.__setattr__(self, "_ops", tuple(component_operator(c, self.basis) for c in self.elements))

    @property
    def detectors(self) -> dict[str, Detector]:
        return {c.name: c for c in self.elements if isinstance(c, Detector)}

    @property
    def is_unitary(self) -> bool:
        return not any(isinstance(c, Analyzer) for c in self.elements)

    def operator(self) -> LinearOperator:
        """Product of all non-detector stages, first element applied first."""
        out = identity(self.basis)
        for c, op in zip(self.elements, self._ops):
            if not isinstance(c, Detector):
                out = op @ out
        return LinearOperator(self.basis, out.matrix, unitary=self.is_unitary)


def run_circuit(c: Circuit, state: StateVector) -> StateVector:
    if state.basis != c.basis:
        raise QStateError("basis mismatch between circuit and input state")
    if abs(state.norm2 - 1) > 1e-10:
        raise OpticsError("circuit input must be unit-normalized")
    out = state
    for comp, op in zip(c.elements, c._ops):
        if not isinstance(comp, Detector):
            out = apply(op, out)
    return out


def detector_click_probability(c: Circuit, state: StateVector, detector_name: str) -> float:
    det = c.detectors.get(detector_name)
    if det is None:
        raise OpticsError(f"unknown detector '{detector_name}'")
    out = run_circuit(c, state)
    return float(min(apply(component_operator(det, c.basis), out).norm2, 1.0))


def path_projectors(basis: CompositeBasis) -> list[tuple[str, LinearOperator]]:
    return [(p, level_projector(basis, **{PATH: p})) for p in basis.levels(PATH)]


def helicity_detector_circuit(basis: CompositeBasis) -> Circuit:
    """Stern-Gerlach split of arm 2, then a post-selecting stage recombining
    arms 1 and 3 onto detector D1.

    Port assignment is a choice, not a given: a -pi/2 phase on path 3
    followed by the splitter on paths 1 and 3 sends ``(|1> + |3>)/sqrt2`` out
    entirely on path 1; the analyzer keeps ``(1, s_up)``; ``D1`` watches path 1
    and ``D2`` path 3.  Path and property tokens never mix, so D1 selects
    ``(|1,s_up> + |3,s_up>)/sqrt2`` at the splitter input, the closest
    realizable analogue of a post-selection with ``L_p`` on arm 1.
    """
    return Circuit(basis, (
        MagneticField("2", "3", "4"),
        PhaseShifter("3", -np.pi / 2),
        BeamSplitter("1", "3"),
        Analyzer("1", SPIN_UP),
        Detector("D1", "1"),
        Detector("D2", "3"),
    ))


def post_state_of(c: Circuit, detector_name: str, prop_level: str) -> StateVector:
    """The state selected by a detector that fires on ``(detector path, prop_level)``:
    ``C^dagger |path, prop_level>`` with ``C`` the unitary stages only."""
    det = c.detectors.get(detector_name)
    if det is None:
        raise OpticsError(f"unknown detector '{detector_name}'")
    U = identity(c.basis)
    for comp, op in zip(c.elements, c._ops):
        if not isinstance(comp, (Detector, Analyzer)):
            U = op @ U
    ket = np.zeros(c.basis.dim, dtype=complex)
    ket[_index(c.basis, det.path, prop_level)] = 1.0
    return StateVector(c.basis, U.matrix.conj().T @ ket)
