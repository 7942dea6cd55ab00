import math

import numpy as np
import pytest
from scipy.linalg import expm

from weakcat.qstate import CompositeBasis, LinearOperator, StateVector, identity, outer, tensor_op
from weakcat.scenarios import builtin
from weakcat.vonneumann import (
    PointerError,
    couple_and_postselect,
    gaussian_pointer,
    joint_state,
    weak_limit_report,
)
from weakcat.weakval import PrePostEnsemble, weak_value

AB = CompositeBasis.of(("q", "ab"))


def qubit(a, b):
    s = StateVector(AB, [a, b])
    return s / s.norm


def complex_wv_ensemble():
    """A = 2|a><a|, pre (|a>+|b>)/sqrt2, post (|a>+i|b>)/sqrt2: A_w = 1 + i."""
    A = outer(qubit(1, 0), qubit(1, 0)) * 2
    return A, PrePostEnsemble(qubit(1, 1), qubit(1, 1j))


@pytest.mark.parametrize("sigma,var_p", [(1.0, 0.25), (2.0, 1 / 16), (0.5, 1.0)])
def test_gaussian_moments(sigma, var_p):
    ptr = gaussian_pointer(sigma, 256)
    assert abs(ptr.norm2 - 1) < 1e-12
    assert abs(ptr.mean_position()) < 1e-6
    assert abs(ptr.position_variance() - sigma ** 2) < 1e-6
    assert abs(ptr.momentum_variance() - var_p) < 1e-6


def test_grid_validation():
    with pytest.raises(PointerError):
        gaussian_pointer(1, 100)
    with pytest.raises(PointerError):
        gaussian_pointer(1, 1024)
    with pytest.raises(PointerError):
        gaussian_pointer(1, 256, span=4)
    with pytest.raises(PointerError):
        gaussian_pointer(0)


def test_zero_coupling():
    A, e = complex_wv_ensemble()
    r = couple_and_postselect(A, e, gaussian_pointer(), 0.0)
    assert abs(r.mean_position_shift) < 1e-12 and abs(r.mean_momentum_shift) < 1e-12
    assert r.success_prob == pytest.approx(abs(e.overlap) ** 2, abs=1e-12)


def test_eigenstate_gives_classical_kick():
    A = LinearOperator(AB, np.diag([0.7, -1.3]))
    s = qubit(0, 1)
    r = couple_and_postselect(A, PrePostEnsemble(s, s), gaussian_pointer(), 0.01)
    assert r.mean_position_shift == pytest.approx(-0.013, abs=1e-8)
    assert abs(r.mean_momentum_shift) < 1e-8


def test_overflow_rejected():
    A, e = complex_wv_ensemble()
    with pytest.raises(PointerError, match="pointer grid overflow"):
        couple_and_postselect(A, e, gaussian_pointer(1, 256), 2.5)


def test_non_hermitian_rejected():
    A = LinearOperator(AB, [[0, 1], [0, 0]])
    _, e = complex_wv_ensemble()
    with pytest.raises(ValueError, match="not Hermitian"):
        couple_and_postselect(A, e, gaussian_pointer(), 0.01)


def test_joint_norm_preserved_for_all_g():
    sc = builtin("cheshire-cat")
    e = sc.ensemble()
    ptr = gaussian_pointer()
    for g in (0, 0.001, 0.1, 1.0, 3.0):
        for name, A in sc.observables:
            assert abs(couple_and_postselect(A, e, ptr, g).joint_norm_check - 1) < 1e-10


def test_cheshire_position_readout():
    sc = builtin("cheshire-cat")
    e = sc.ensemble()
    A = sc.observable("PL")
    r = couple_and_postselect(A, e, gaussian_pointer(1.0), 0.01)
    assert abs(r.mean_position_shift / 0.01 - weak_value(A, e).value.real) < 1e-3


def test_branch_translation_matches_matrix_exponential():
    # exp(-i g A (x) p) built as a dense matrix on a 64-point grid
    A, e = complex_wv_ensemble()
    ptr = gaussian_pointer(1.0, 64, span=8.0)
    grid = CompositeBasis.of(("x", [str(k) for k in range(64)]))
    F = np.fft.fft(np.eye(64), axis=0)
    pmat = np.linalg.inv(F) @ np.diag(ptr.p) @ F
    H = tensor_op(A, LinearOperator(grid, pmat))
    g = 0.3
    U = expm(-1j * g * H.matrix)
    psi0 = np.kron(e.pre.amps, ptr.amps)
    direct = (U @ psi0).reshape(2, 64)
    assert np.max(np.abs(direct - joint_state(A, e, ptr, g))) < 1e-10
    assert tensor_op(identity(AB), identity(grid)).allclose(identity(H.basis))


def test_real_weak_value_has_no_momentum_shift():
    sc = builtin("cheshire-cat")
    rows = weak_limit_report(sc.observable("PL"), sc.ensemble(), 1.0, [0.04, 0.02, 0.01])
    assert all(abs(r.momentum_shift) < 1e-8 for r in rows)


def test_halving_g_halves_shift():
    A = outer(qubit(1, 0), qubit(1, 0))
    e = PrePostEnsemble(qubit(1, 1), qubit(2, -1))
    rows = weak_limit_report(A, e, 1.0, [0.05, 0.025, 0.0125])
    for a, b in zip(rows, rows[1:]):
        assert b.position_shift / a.position_shift == pytest.approx(0.5, rel=0.05)


def test_richardson_limit():
    A = outer(qubit(1, 0), qubit(1, 0))
    e = PrePostEnsemble(qubit(1, 1), qubit(2, -1))
    rows = weak_limit_report(A, e, 1.0, [0.02, 0.01, 0.005])
    r = [row.position_shift / row.g for row in rows]
    extrapolated = (4 * r[2] - r[1]) / 3
    assert abs(extrapolated - weak_value(A, e).value.real) <= 1e-3


def test_first_order_error_is_quadratic():
    # generic ensemble (A_w = 2) where the O(g^2) term does not vanish
    A = outer(qubit(1, 0), qubit(1, 0))
    e = PrePostEnsemble(qubit(1, 1), qubit(2, -1))
    rows = weak_limit_report(A, e, 1.0, [0.02, 0.01])
    assert rows[0].position_error / rows[1].position_error >= 3.5


def test_imaginary_part_readout():
    A, e = complex_wv_ensemble()
    ptr = gaussian_pointer(1.0)
    r = couple_and_postselect(A, e, ptr, 0.01)
    ratio = r.mean_momentum_shift / (2 * 0.01 * ptr.momentum_variance())
    assert abs(ratio - weak_value(A, e).value.imag) < 1e-2


def test_momentum_ratio_constant_across_sigma():
    A, e = complex_wv_ensemble()
    ratios = []
    for sigma in (0.5, 1.0, 2.0):
        row = weak_limit_report(A, e, sigma, [0.005])[0]
        ratios.append(row.momentum_shift / row.predicted_mom)
    assert max(ratios) / min(ratios) - 1 < 0.02


def test_success_probability_sums_to_one_over_post_basis():
    A, e = complex_wv_ensemble()
    ptr = gaussian_pointer()
    for g in (0.0, 0.2, 1.5):
        total = 0.0
        for post in (qubit(1, 1j), qubit(1, -1j)):
            total += couple_and_postselect(A, PrePostEnsemble(e.pre, post), ptr, g).success_prob
        assert abs(total - 1) < 1e-8


def test_report_validation():
    A, e = complex_wv_ensemble()
    with pytest.raises(PointerError, match="descending"):
        weak_limit_report(A, e, 1.0, [0.01, 0.02])
    with pytest.raises(PointerError, match="positive"):
        weak_limit_report(A, e, 1.0, [])
    row = weak_limit_report(A, e, 1.0, [0.01])[0]
    assert row.predicted_pos == pytest.approx(0.01)
    assert row.predicted_mom == pytest.approx(2 * 0.01 * 0.25)
    assert math.isfinite(row.momentum_error)
