import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from weakcat.qstate import (
    CompositeBasis,
    LinearOperator,
    QStateError,
    StateVector,
    apply,
    basis_ket,
    identity,
    inner,
    level_projector,
    outer,
    superpose,
)
from weakcat.scenarios import builtin
from weakcat.weakval import (
    PostSelectionImpossible,
    PrePostEnsemble,
    WeakValueError,
    born_distribution,
    expectation,
    postselect_probability,
    raw_weak_value,
    reversed_weak_value,
    sample_outcomes,
    spectral_projectors,
    strong_measure,
    weak_value,
)

R2 = math.sqrt(2)
AB = CompositeBasis.of(("q", "ab"))
B20 = CompositeBasis.of(("path", "12345"), ("prop", ["L_p", "L_-p", "s_up", "s_dn"]))


def qubit(a, b):
    return StateVector(AB, [a, b])


def ens(pre, post, U=None):
    return PrePostEnsemble.from_states(pre, post, U)


def test_eigenvector_gives_eigenvalue():
    A = LinearOperator(AB, np.diag([3.0, -1.0]))
    s = qubit(0, 1)
    assert weak_value(A, ens(s, s)).value == -1


def test_identity_gives_one():
    e = ens(qubit(1, 2j), qubit(0.3, 1))
    assert weak_value(identity(AB), e).value == pytest.approx(1)


def test_value_outside_spectrum():
    A = outer(qubit(1, 0), qubit(1, 0))
    e = ens(qubit(1, 1), qubit(2, -1))
    assert weak_value(A, e).value == pytest.approx(2, abs=1e-12)


def test_canonical_cheshire_direct():
    # 4-dim L/R x H/V space, written out directly
    b = CompositeBasis.of(("arm", "LR"), ("pol", "HV"))
    k = lambda a, p: basis_ket(b, (a, p))
    pre = superpose([(1j / R2, k("L", "H")), (1 / R2, k("R", "H"))])
    post = superpose([(1 / R2, k("L", "H")), (1 / R2, k("R", "V"))])
    e = PrePostEnsemble(pre, post)
    PL, PR = level_projector(b, arm="L"), level_projector(b, arm="R")
    sy = np.array([[0, -1j], [1j, 0]])
    circ = LinearOperator(b, np.kron(np.eye(2), sy))
    vals = [weak_value(A, e).value for A in (PL, PR, circ @ PL, circ @ PR)]
    assert np.allclose(vals, [1, 0, 0, 1], atol=1e-12)


def test_orthogonal_ensemble_refused():
    e = ens(qubit(1, 0), qubit(0, 1))
    assert e.orthogonal
    with pytest.raises(PostSelectionImpossible, match=r"post-selection impossible: <Psi_f\|Psi_i> = 0"):
        weak_value(identity(AB), e)
    assert postselect_probability(e) == 0


def test_ensemble_validation():
    with pytest.raises(WeakValueError, match="not unit-normalized"):
        PrePostEnsemble(qubit(1, 1), qubit(1, 0))
    with pytest.raises(WeakValueError, match="not unitary"):
        PrePostEnsemble(qubit(1, 0), qubit(1, 0), LinearOperator(AB, np.diag([1, 2])))
    with pytest.raises(QStateError, match="basis mismatch"):
        PrePostEnsemble(qubit(1, 0), basis_ket(B20, ("1", "L_p")))


def test_postselect_probability():
    s = qubit(0.6, 0.8)
    assert postselect_probability(ens(s, s)) == pytest.approx(1)
    e = builtin("helicity-preserving", "literal").ensemble()
    # <post|pre> = (1/2)<5,L_-p|5,L_-p> = 1/2 by hand
    assert postselect_probability(e) == pytest.approx(0.25, abs=1e-12)


def test_reversed_is_conjugate_for_hermitian():
    e = ens(qubit(1, 1), qubit(1, 1j))
    A = outer(qubit(1, 0), qubit(1, 0)) * 2
    assert weak_value(A, e).value == pytest.approx(1 + 1j)
    assert reversed_weak_value(A, e) == pytest.approx(1 - 1j)


def test_raw_weak_value_accepts_unnormalized():
    A = outer(qubit(1, 0), qubit(1, 0))
    assert raw_weak_value(A, qubit(5, 5), qubit(2, -1)) == pytest.approx(2)
    with pytest.raises(PostSelectionImpossible):
        raw_weak_value(A, qubit(3, 0), qubit(0, 7))


def test_expectation_and_hermitian_check():
    assert expectation(LinearOperator(AB, np.diag([1, -1])), qubit(0.6, 0.8)) == pytest.approx(0.36 - 0.64)
    with pytest.raises(WeakValueError, match="not Hermitian"):
        expectation(LinearOperator(AB, [[0, 1], [0, 0]]), qubit(1, 0))


def test_spectral_clusters_degenerate_projectors():
    P3 = level_projector(B20, path="3")
    spec = spectral_projectors(P3)
    assert [lam for lam, _ in spec] == pytest.approx([0, 1])
    assert spec[1][1].allclose(P3)


def test_strong_measure_eigenvector():
    A = LinearOperator(AB, np.diag([2.0, 5.0]))
    s = qubit(0, 1j)
    for seed in range(20):
        lam, col = strong_measure(A, s, seed)
        assert lam == pytest.approx(5)
        assert abs(inner(col, s)) == pytest.approx(1)


def test_strong_measure_is_seeded():
    A = LinearOperator(AB, np.diag([0.0, 1.0]))
    s = qubit(1 / R2, 1 / R2)
    assert [strong_measure(A, s, k)[0] for k in range(50)] == [strong_measure(A, s, k)[0] for k in range(50)]


def test_strong_measure_equal_superposition_1e4():
    A = LinearOperator(AB, np.diag([0.0, 1.0]))
    s = qubit(1 / R2, 1 / R2)
    ones = sum(strong_measure(A, s, seed)[0] for seed in range(10_000))
    assert abs(ones / 10_000 - 0.5) <= 0.02


def test_path2_never_found_after_magnetic_field():
    sc = builtin("helicity-sign", "evolved")
    state = sc.ensemble().evolved_pre
    P2 = sc.observable("P2")
    evals, probs, _ = born_distribution(P2, state)
    assert probs[evals.index(1.0)] == 0
    assert not np.any(sample_outcomes(P2, state, 5000, seed=7) == 1.0)


def test_sampling_within_binomial_bounds():
    A = LinearOperator(B20, np.diag(np.arange(20.0)))
    rng = np.random.default_rng(11)
    s = StateVector(B20, rng.normal(size=20) + 1j * rng.normal(size=20))
    s = s / s.norm
    evals, probs, _ = born_distribution(A, s)
    n = 100_000
    draws = sample_outcomes(A, s, n, seed=0)
    for lam, p in zip(evals, probs):
        f = np.mean(draws == lam)
        assert abs(f - p) <= 3 * math.sqrt(p * (1 - p) / n) + 1e-12


# properties ------------------------------------------------------------------

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cvec = arrays(np.float64, 40, elements=finite).map(lambda v: v[:20] + 1j * v[20:])


def _ensemble(a, b):
    pre, post = StateVector(B20, a), StateVector(B20, b)
    if pre.norm < 1e-3 or post.norm < 1e-3:
        return None
    e = PrePostEnsemble.from_states(pre, post)
    return None if abs(e.overlap) < 1e-3 else e


def _herm(v):
    m = np.outer(v, v.conj())
    return LinearOperator(B20, m + np.diag(v.real))


@settings(max_examples=60, deadline=None)
@given(cvec, cvec, cvec, cvec, finite, finite)
def test_linearity(a, b, u, v, alpha, beta):
    e = _ensemble(a, b)
    if e is None:
        return
    A, B = _herm(u), _herm(v)
    lhs = weak_value(A * alpha + B * beta, e).value
    rhs = alpha * weak_value(A, e).value + beta * weak_value(B, e).value
    assert abs(lhs - rhs) <= 1e-10 * max(1, abs(lhs))


@settings(max_examples=60, deadline=None)
@given(cvec, cvec)
def test_sum_rule(a, b):
    e = _ensemble(a, b)
    if e is None:
        return
    total = sum(weak_value(level_projector(B20, path=p), e).value for p in "12345")
    assert abs(total - 1) <= 1e-10
    total = sum(weak_value(level_projector(B20, prop=q), e).value for q in B20.levels("prop"))
    assert abs(total - 1) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(cvec, cvec, cvec, st.complex_numbers(min_magnitude=0.1, max_magnitude=10), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_scale_phase_invariance(a, b, u, c1, c2):
    pre, post = StateVector(B20, a), StateVector(B20, b)
    if pre.norm < 1e-3 or post.norm < 1e-3 or abs(inner(post, pre)) < 1e-3 * pre.norm * post.norm:
        return
    A = _herm(u)
    w = raw_weak_value(A, pre, post)
    assert abs(raw_weak_value(A, pre * c1, post * c2) - w) <= 1e-12 * max(1, abs(w)) * 10


@settings(max_examples=60, deadline=None)
@given(cvec, cvec)
def test_pre_equals_post_gives_expectation(a, u):
    s = StateVector(B20, a)
    if s.norm < 1e-3:
        return
    s = s / s.norm
    A = _herm(u)
    w = weak_value(A, PrePostEnsemble(s, s)).value
    assert abs(w - expectation(A, s)) <= 1e-10 * max(1, abs(w))
    assert abs(w.imag) <= 1e-10 * max(1, abs(w))


def test_evolution_applied_between():
    U = LinearOperator(AB, [[0, 1], [1, 0]], unitary=True)
    e = PrePostEnsemble(qubit(1, 0), qubit(0, 1), U)
    assert e.evolved_pre.allclose(qubit(0, 1))
    assert weak_value(LinearOperator(AB, np.diag([0, 1])), e).value == 1
    assert apply(U, qubit(1, 0)).allclose(qubit(0, 1))
