"""Built-in pre/post-selection scenarios and their evaluation.

Each built-in ships in two interpretations:

``literal``
    the printed pre- and post-selected states, renormalized, with the weak
    measurement made directly on the pre-selected state;
``evolved``
    the scenario's optical circuit applied between pre-selection and the
    measurement plane.

Claimed values are carried as metadata only and never enter a computation;
reports show them next to the computed values with the absolute deviation.
"""
from __future__ import annotations

import dataclasses
import enum
import functools
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .optics import PATH, PROP, Circuit, path_projectors
from .qstate import (
    CompositeBasis,
    LinearOperator,
    StateVector,
    basis_ket,
    inner,
)
from .weakval import (
    PrePostEnsemble,
    postselect_probability,
    reversed_weak_value,
    weak_value,
)

INTERPRETATIONS = ("literal", "evolved")
BUILTIN_NAMES = ("helicity-sign", "helicity-preserving", "helicity-reversing", "cheshire-cat")
VARIANT_NAMES = ("helicity-sign-printed",)
COMPLETENESS_TOL = 1e-10
VERDICT_TOL = 1e-10


class ScenarioError(ValueError):
    pass


class Helicity(enum.IntEnum):
    NEGATIVE = -1
    POSITIVE = 1


def helicity_sign(spin_axis: Sequence[float], momentum_axis: Sequence[float]) -> Helicity:
    """Sign of the spin projection on the momentum direction."""
    s = np.asarray(spin_axis, dtype=float)
    p = np.asarray(momentum_axis, dtype=float)
    if s.shape != (3,) or p.shape != (3,):
        raise ScenarioError("helicity needs two 3-vectors")
    ns, npp = np.linalg.norm(s), np.linalg.norm(p)
    if ns == 0 or npp == 0:
        raise ScenarioError("helicity needs nonzero spin and momentum vectors")
    dot = float(s @ p)
    if abs(dot) <= 1e-12 * ns * npp:
        raise ScenarioError("helicity undefined for transverse spin")
    return Helicity.POSITIVE if dot > 0 else Helicity.NEGATIVE


@dataclass(frozen=True)
class Claim:
    observable: str
    value: complex
    ref: str = ""


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    basis: CompositeBasis
    pre: StateVector
    post: StateVector
    evolution: Optional[Circuit] = None
    observables: tuple = ()
    claims: tuple = ()
    interpretation: str = "literal"
    summary: str = ""
    doc: object = None

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "claims", tuple(self.claims))
        if self.interpretation not in INTERPRETATIONS:
            raise ScenarioError(f"unknown interpretation '{self.interpretation}'")
        for label, s in (("pre", self.pre), ("post", self.post)):
            if s.basis != self.basis:
                raise ScenarioError(f"{label} state is not on the scenario basis")
            if not s.normalized:
                raise ScenarioError(f"{label} state is not unit-normalized")
        names = [n for n, _ in self.observables]
        if len(set(names)) != len(names):
            raise ScenarioError("duplicate observable names")
        for n, op in self.observables:
            if op.basis != self.basis:
                raise ScenarioError(f"observable '{n}' is not on the scenario basis")
        for c in self.claims:
            if c.observable not in names:
                raise ScenarioError(f"claim names unknown observable '{c.observable}'")
        if self.evolution is not None:
            if self.evolution.basis != self.basis:
                raise ScenarioError("evolution circuit is not on the scenario basis")
            if not self.evolution.is_unitary:
                raise ScenarioError("evolution circuit contains a non-unitary element")

    @property
    def mid_evolution(self) -> Optional[LinearOperator]:
        if self.interpretation == "evolved" and self.evolution is not None:
            return self.evolution.operator()
        return None

    def ensemble(self) -> PrePostEnsemble:
        return PrePostEnsemble(self.pre, self.post, self.mid_evolution)

    def observable(self, name: str) -> LinearOperator:
        for n, op in self.observables:
            if n == name:
                return op
        raise ScenarioError(
            f"unknown observable '{name}' (available: {', '.join(n for n, _ in self.observables) or 'none'})"
        )

    def claim_for(self, name: str) -> Optional[Claim]:
        for c in self.claims:
            if c.observable == name:
                return c
        return None

    def with_interpretation(self, interpretation: str) -> "Scenario":
        doc = self.doc.with_interpretation(interpretation) if self.doc is not None else None
        return dataclasses.replace(self, interpretation=interpretation, doc=doc)

    def without_claims(self) -> "Scenario":
        return dataclasses.replace(self, claims=())


@dataclass(frozen=True)
class ObservableReport:
    name: str
    weak_value: Optional[complex]
    reversed: Optional[complex]
    claimed: Optional[complex]
    claim_ref: str
    deviation: Optional[float]


@dataclass(frozen=True)
class Finding:
    check: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AuditRecord:
    scenario: str
    interpretation: str
    findings: tuple

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.findings)


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    interpretation: str
    feasible: bool
    postselect_prob: float
    observables: tuple
    helicity: Optional[str] = None
    audit: tuple = ()

    @property
    def status(self) -> str:
        return "ok" if self.feasible else "post-selection impossible"

    def observable(self, name: str) -> ObservableReport:
        for o in self.observables:
            if o.name == name:
                return o
        raise KeyError(name)


def _helicity_verdict(w: Optional[complex]) -> Optional[str]:
    # detector D1 on path 3 clicks <=> weak value 1; no click <=> 0
    if w is None:
        return None
    if abs(w - 1) <= VERDICT_TOL:
        return "positive"
    if abs(w) <= VERDICT_TOL:
        return "negative"
    return "indeterminate"


def evaluate_scenario(s: Scenario) -> ScenarioReport:
    e = s.ensemble()
    prob = postselect_probability(e)
    feasible = not e.orthogonal
    rows = []
    for name, op in s.observables:
        claim = s.claim_for(name)
        if feasible:
            w = weak_value(op, e, name).value
            r = reversed_weak_value(op, e)
        else:
            w = r = None
        dev = abs(w - claim.value) if (claim is not None and w is not None) else None
        rows.append(ObservableReport(
            name=name,
            weak_value=w,
            reversed=r,
            claimed=claim.value if claim else None,
            claim_ref=claim.ref if claim else "",
            deviation=dev,
        ))
    helicity = None
    if any(o.name == "P3" for o in rows):
        helicity = _helicity_verdict(next(o.weak_value for o in rows if o.name == "P3"))
    return ScenarioReport(
        scenario=s.name,
        interpretation=s.interpretation,
        feasible=feasible,
        postselect_prob=prob,
        observables=tuple(rows),
        helicity=helicity,
        audit=consistency_audit(s).findings,
    )


def consistency_audit(s: Scenario) -> AuditRecord:
    e = s.ensemble()
    findings = []
    if e.orthogonal:
        findings.append(Finding("feasibility", False, "post-selection impossible"))
        return AuditRecord(s.name, s.interpretation, tuple(findings))
    findings.append(Finding("feasibility", True, f"postselect_prob={postselect_probability(e):.12g}"))

    names = s.basis.names
    if PATH in names and PROP in names and "2" in s.basis.levels(PATH) and "L_p" in s.basis.levels(PROP):
        labels = [("2" if n == PATH else "L_p") for n in names]
        ov = inner(basis_ket(s.basis, labels), s.post)
        findings.append(Finding(
            "arm2-orthogonality",
            ov == 0,
            f"<2,L_p|post> = {ov.real:.17g}{ov.imag:+.17g}i",
        ))
    if PATH in names:
        total = sum(weak_value(P, e).value for _, P in path_projectors(s.basis))
        findings.append(Finding(
            "completeness",
            abs(total - 1) <= COMPLETENESS_TOL,
            f"sum of path weak values = {total.real:.15g}{total.imag:+.15g}i",
        ))
    return AuditRecord(s.name, s.interpretation, tuple(findings))


def _builtin_text(name: str) -> str:
    return resources.files("weakcat.builtin").joinpath(f"{name}.sdl").read_text(encoding="utf-8")


@functools.lru_cache(maxsize=None)
def _load(name: str, interpretation: str) -> Scenario:
    from .sdl import lower_text

    return lower_text(_builtin_text(name), interpretation=interpretation)


def builtin_scenarios() -> list[Scenario]:
    return [_load(n, i) for n in BUILTIN_NAMES for i in INTERPRETATIONS]


def variant_scenarios() -> list[Scenario]:
    return [_load(n, i) for n in VARIANT_NAMES for i in INTERPRETATIONS]


def builtin(name: str, interpretation: str = "literal") -> Scenario:
    if name not in BUILTIN_NAMES + VARIANT_NAMES:
        raise ScenarioError(f"unknown built-in scenario '{name}'")
    if interpretation not in INTERPRETATIONS:
        raise ScenarioError(f"unknown interpretation '{interpretation}'")
    return _load(name, interpretation)


def builtin_source(name: str) -> str:
    if name not in BUILTIN_NAMES + VARIANT_NAMES:
        raise ScenarioError(f"unknown built-in scenario '{name}'")
    return _builtin_text(name)
