"""Pre/post-selected ensembles, weak values, and projective (strong) measurement."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .qstate import (
    LinearOperator,
    QStateError,
    StateVector,
    apply,
    inner,
    normalize,
)

ORTHOGONAL_TOL = 1e-12
HERMITIAN_TOL = 1e-10
EIGEN_CLUSTER_TOL = 1e-9


class WeakValueError(ValueError):
    pass


class PostSelectionImpossible(WeakValueError):
    def __init__(self, msg="post-selection impossible: <Psi_f|Psi_i> = 0"):
        super().__init__(msg)


@dataclass(frozen=True, eq=False)
class PrePostEnsemble:
    pre: StateVector
    post: StateVector
    mid_evolution: Optional[LinearOperator] = None

    def __post_init__(self):
        if self.pre.basis != self.post.basis:
            raise QStateError("basis mismatch between pre- and post-selected states")
        for label, s in (("pre", self.pre), ("post", self.post)):
            if not s.normalized:
                raise WeakValueError(f"{label}-selected state is not unit-normalized (norm^2={s.norm2!r})")
        U = self.mid_evolution
        if U is not None:
            if U.basis != self.pre.basis:
                raise QStateError("basis mismatch between evolution and states")
            if not U.is_unitary():
                raise WeakValueError("mid evolution is not unitary")

    @classmethod
    def from_states(cls, pre: StateVector, post: StateVector, mid_evolution=None) -> "PrePostEnsemble":
        return cls(normalize(pre), normalize(post), mid_evolution)

    @property
    def evolved_pre(self) -> StateVector:
        if self.mid_evolution is None:
            return self.pre
        return apply(self.mid_evolution, self.pre)

    @property
    def overlap(self) -> complex:
        return inner(self.post, self.evolved_pre)

    @property
    def orthogonal(self) -> bool:
        return abs(self.overlap) < ORTHOGONAL_TOL


@dataclass(frozen=True)
class WeakValue:
    value: complex
    observable_name: str
    overlap: complex
    postselect_prob: float

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


def raw_weak_value(A: LinearOperator, pre: StateVector, post: StateVector,
                   mid_evolution: Optional[LinearOperator] = None) -> complex:
    """<post|A U|pre> / <post|U|pre> on arbitrary (unnormalized) states."""
    ket = pre if mid_evolution is None else apply(mid_evolution, pre)
    den = inner(post, ket)
    if abs(den) < ORTHOGONAL_TOL * max(post.norm * ket.norm, 1e-300):
        raise PostSelectionImpossible()
    return inner(post, apply(A, ket)) / den


def weak_value(A: LinearOperator, e: PrePostEnsemble, name: str = "A") -> WeakValue:
    if A.basis != e.pre.basis:
        raise QStateError("basis mismatch between observable and ensemble")
    ov = e.overlap
    if abs(ov) < ORTHOGONAL_TOL:
        raise PostSelectionImpossible()
    ket = e.evolved_pre
    value = inner(e.post, apply(A, ket)) / ov
    return WeakValue(complex(value), name, ov, min(abs(ov) ** 2, 1.0))


def reversed_weak_value(A: LinearOperator, e: PrePostEnsemble) -> complex:
    """Weak value with the pre-selected state in the bra: <U pre|A|post> / <U pre|post>.

    Equals the complex conjugate of :func:`weak_value` for Hermitian ``A``.
    """
    if A.basis != e.pre.basis:
        raise QStateError("basis mismatch between observable and ensemble")
    ket = e.evolved_pre
    den = inner(ket, e.post)
    if abs(den) < ORTHOGONAL_TOL:
        raise PostSelectionImpossible()
    return inner(ket, apply(A, e.post)) / den


def postselect_probability(e: PrePostEnsemble) -> float:
    return min(abs(e.overlap) ** 2, 1.0)


def _require_hermitian(A: LinearOperator):
    if not A.is_hermitian(HERMITIAN_TOL):
        raise WeakValueError("observable is not Hermitian")


def _require_unit(s: StateVector):
    if abs(s.norm2 - 1.0) > 1e-10:
        raise WeakValueError(f"state is not unit-normalized (norm^2={s.norm2!r})")


def expectation(A: LinearOperator, s: StateVector) -> float:
    _require_hermitian(A)
    _require_unit(s)
    val = inner(s, apply(A, s))
    if abs(val.imag) > HERMITIAN_TOL:
        raise WeakValueError(f"expectation has imaginary residue {val.imag!r}")
    return val.real


def spectral_projectors(A: LinearOperator, tol: float = EIGEN_CLUSTER_TOL) -> list[tuple[float, LinearOperator]]:
    """Distinct eigenvalues of a Hermitian operator with their eigenspace projectors.

    Eigenvalues closer than ``tol`` to their sorted neighbour are merged into
    one degenerate cluster; the cluster value is the mean of its members.
    """
    _require_hermitian(A)
    m = (A.matrix + A.matrix.conj().T) / 2
    evals, evecs = np.linalg.eigh(m)
    groups: list[list[int]] = []
    for k, lam in enumerate(evals):
        if groups and lam - evals[groups[-1][-1]] <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    out = []
    for g in groups:
        v = evecs[:, g]
        out.append((float(np.mean(evals[g])), LinearOperator(A.basis, v @ v.conj().T)))
    return out


def born_distribution(A: LinearOperator, s: StateVector):
    """Eigenvalues, Born probabilities, and eigenspace projectors for measuring A on s."""
    _require_unit(s)
    spec = spectral_projectors(A)
    probs = np.array([apply(P, s).norm2 for _, P in spec])
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    return [lam for lam, _ in spec], probs, [P for _, P in spec]


def sample_outcomes(A: LinearOperator, s: StateVector, shots: int, seed: int) -> np.ndarray:
    """Draw ``shots`` strong-measurement eigenvalues of A on s with one seeded generator."""
    evals, probs, _ = born_distribution(A, s)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(evals), size=shots, p=probs)
    return np.asarray(evals)[picks]


def strong_measure(A: LinearOperator, s: StateVector, seed: int) -> tuple[float, StateVector]:
    evals, probs, projs = born_distribution(A, s)
    rng = np.random.default_rng(seed)
    k = int(rng.choice(len(evals), p=probs))
    return evals[k], normalize(apply(projs[k], s))
