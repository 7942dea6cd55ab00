"""Von Neumann pointer model for weak measurements (hbar = 1).

The meter is a Gaussian ``psi(x) ~ exp(-x^2 / (4 sigma^2))`` on a uniform
periodic grid, so ``Var(x) = sigma^2`` and ``Var(p) = 1 / (4 sigma^2)``.
The impulsive coupling ``exp(-i g A (x) p)`` is applied branch by branch:
each eigenspace component of the system state carries a copy of the pointer
translated by ``g * lambda``, with the translation done as a phase ramp in
momentum space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qstate import LinearOperator, QStateError
from .weakval import (
    PrePostEnsemble,
    WeakValueError,
    spectral_projectors,
    weak_value,
)

NORM_TOL = 1e-10


class PointerError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PointerState:
    x: np.ndarray = field(repr=False)
    amps: np.ndarray = field(repr=False)
    sigma: float = 1.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        amps = np.array(self.amps, dtype=complex)
        if x.shape != amps.shape or x.ndim != 1:
            raise PointerError("grid and amplitudes must be 1-d arrays of equal length")
        x.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "amps", amps)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def p(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def norm2(self) -> float:
        return _norm2(self.amps, self.dx)

    def mean_position(self) -> float:
        return _mean_x(self.amps, self.x, self.dx)

    def mean_momentum(self) -> float:
        return _mean_p(self.amps, self.p)

    def position_variance(self) -> float:
        return _moment_x(self.amps, self.x, self.dx, 2) - self.mean_position() ** 2

    def momentum_variance(self) -> float:
        prob = np.abs(np.fft.fft(self.amps)) ** 2
        prob /= prob.sum()
        return float(np.sum(self.p ** 2 * prob) - np.sum(self.p * prob) ** 2)

    def translated(self, shift: float) -> np.ndarray:
        """Amplitudes of ``psi(x - shift)``."""
        return np.fft.ifft(np.fft.fft(self.amps) * np.exp(-1j * self.p * shift))


def _norm2(amps, dx) -> float:
    return float(np.sum(np.abs(amps) ** 2) * dx)


def _moment_x(amps, x, dx, k) -> float:
    w = np.abs(amps) ** 2
    return float(np.sum(x ** k * w) / np.sum(w))


def _mean_x(amps, x, dx) -> float:
    return _moment_x(amps, x, dx, 1)


def _mean_p(amps, p) -> float:
    prob = np.abs(np.fft.fft(amps)) ** 2
    return float(np.sum(p * prob) / np.sum(prob))


def gaussian_pointer(sigma: float = 1.0, n: int = 256, span: float | None = None) -> PointerState:
    """Minimum-uncertainty Gaussian meter on the grid ``[-span, span)``.

    ``span`` is the half-width and defaults to ``16 * sigma``.
    """
    if not sigma > 0:
        raise PointerError("sigma must be positive")
    if span is None:
        span = 16.0 * sigma
    if not (64 <= n <= 512) or n & (n - 1):
        raise PointerError(f"grid size must be a power of two in [64, 512], got {n}")
    if span < 8 * sigma:
        raise PointerError(f"grid half-width {span} smaller than 8 sigma = {8 * sigma}")
    dx = 2 * span / n
    x = -span + dx * np.arange(n)
    amps = np.exp(-x ** 2 / (4 * sigma ** 2)).astype(complex)
    amps /= np.sqrt(_norm2(amps, dx))
    return PointerState(x, amps, float(sigma))


@dataclass(frozen=True)
class CouplingResult:
    mean_position_shift: float
    mean_momentum_shift: float
    success_prob: float
    g: float
    joint_norm_check: float


def _branches(A: LinearOperator, e: PrePostEnsemble):
    if A.basis != e.pre.basis:
        raise QStateError("basis mismatch between observable and ensemble")
    if not A.is_hermitian(1e-10):
        raise WeakValueError("observable is not Hermitian")
    ket = e.evolved_pre.amps
    return [(lam, P.matrix @ ket) for lam, P in spectral_projectors(A)]


def joint_state(A: LinearOperator, e: PrePostEnsemble, ptr: PointerState, g: float) -> np.ndarray:
    """System (x) pointer amplitudes after the coupling, shape ``(dim, n)``."""
    if g < 0:
        raise PointerError("coupling strength must be non-negative")
    branches = _branches(A, e)
    span = (ptr.x[-1] - ptr.x[0] + ptr.dx) / 2
    if max(abs(g * lam) for lam, _ in branches) > span / 4:
        raise PointerError("pointer grid overflow")
    joint = np.zeros((e.pre.basis.dim, ptr.n), dtype=complex)
    for lam, branch in branches:
        joint += np.outer(branch, ptr.translated(g * lam))
    return joint


def couple_and_postselect(A: LinearOperator, e: PrePostEnsemble, ptr: PointerState, g: float) -> CouplingResult:
    joint = joint_state(A, e, ptr, g)
    dx = ptr.dx
    cond = e.post.amps.conj() @ joint
    success = _norm2(cond, dx)
    if success < 1e-300:
        return CouplingResult(float("nan"), float("nan"), 0.0, float(g), _norm2(joint, dx))
    return CouplingResult(
        mean_position_shift=_mean_x(cond, ptr.x, dx) - ptr.mean_position(),
        mean_momentum_shift=_mean_p(cond, ptr.p) - ptr.mean_momentum(),
        success_prob=min(success, 1.0),
        g=float(g),
        joint_norm_check=_norm2(joint, dx),
    )


@dataclass(frozen=True)
class WeakLimitRow:
    g: float
    position_shift: float
    momentum_shift: float
    predicted_pos: float
    predicted_mom: float
    success_prob: float

    @property
    def position_error(self) -> float:
        return abs(self.position_shift - self.predicted_pos)

    @property
    def momentum_error(self) -> float:
        return abs(self.momentum_shift - self.predicted_mom)


def weak_limit_report(A: LinearOperator, e: PrePostEnsemble, sigma: float, g_list: Sequence[float],
                      n: int = 256, span: float | None = None) -> list[WeakLimitRow]:
    """Pointer shifts against first-order weak-value predictions for each g."""
    gs = [float(g) for g in g_list]
    if not gs or any(g <= 0 for g in gs):
        raise PointerError("g_list must hold positive values")
    if any(b >= a for a, b in zip(gs, gs[1:])):
        raise PointerError("g_list must be strictly descending")
    wv = weak_value(A, e).value
    ptr = gaussian_pointer(sigma, n, span)
    var_p = ptr.momentum_variance()
    rows = []
    for g in gs:
        r = couple_and_postselect(A, e, ptr, g)
        rows.append(WeakLimitRow(
            g=g,
            position_shift=r.mean_position_shift,
            momentum_shift=r.mean_momentum_shift,
            predicted_pos=g * wv.real,
            predicted_mom=2 * g * var_p * wv.imag,
            success_prob=r.success_prob,
        ))
    return rows
