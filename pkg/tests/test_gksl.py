import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilindblad import gksl as K

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def _rng(seed=0):
    return np.random.default_rng(seed)


def test_vec_convention():
    rng = _rng()
    A, X, B = (K.random_matrix(rng, 3) for _ in range(3))
    assert np.allclose(K.vec(A @ X @ B), np.kron(B.T, A) @ K.vec(X))
    assert np.allclose(K.unvec(K.vec(X), 3), X)


def test_generator_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        K.GKSLGenerator(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        K.GKSLGenerator(SZ, (np.eye(3),))
    with pytest.raises(K.DimensionError):
        K.GKSLGenerator(np.eye(K.MAX_DIM + 1))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 5))
def test_superoperator_matches_direct_formula(seed, d):
    rng = _rng(seed)
    G = K.random_generator(rng, d)
    rho = K.random_density(rng, d)
    A = K.random_matrix(rng, d)
    assert np.allclose(K.to_superoperator(G).apply(rho), K.lindblad_apply(G, rho), atol=1e-12)
    assert np.allclose(K.to_superoperator(G, "heisenberg").apply(A), K.heisenberg_apply(G, A), atol=1e-12)
    assert K.adjoint_pairing_residual(G, rho, A) < 1e-12


def test_structure_properties_random_generator():
    rng = _rng(5)
    G = K.random_generator(rng, 6)
    rho = K.random_density(rng, 6)
    out = K.lindblad_apply(G, rho)
    assert abs(np.trace(out)) < 1e-12
    assert K.opnorm(out - K.dag(out)) < 1e-12
    assert K.opnorm(K.heisenberg_apply(G, np.eye(6))) < 1e-12
    P = K.propagator
    assert K.opnorm(P(G, 0.4).matrix @ P(G, 0.6).matrix - P(G, 1.0).matrix) < 1e-9
    assert K.cp_check(P(G, 1.0))


def test_propagator_against_taylor_series():
    rng = _rng(2)
    G = K.random_generator(rng, 3)
    M = K.to_superoperator(G).matrix
    t = 0.05
    series = np.eye(9, dtype=complex)
    term = np.eye(9, dtype=complex)
    for k in range(1, 30):
        term = term @ (t * M) / k
        series = series + term
    assert np.allclose(K.propagator(G, t).matrix, series, atol=1e-13)


def test_negative_time_rejected():
    G = K.GKSLGenerator(SZ)
    with pytest.raises(ValueError):
        K.evolve(G, SZ, -1.0)


def test_qubit_dephasing_closed_form():
    g, w = 0.5, 1.0
    G = K.GKSLGenerator(w / 2 * SZ, (np.sqrt(g) * SZ,))
    assert K.opnorm(K.heisenberg_apply(G, SX) - (-2 * g * SX - w * SY)) < 1e-14
    for t in np.linspace(0, 5, 11):
        want = np.exp(-2 * g * t) * (np.cos(w * t) * SX - np.sin(w * t) * SY)
        assert K.opnorm(K.evolve(G, SX, t, "heisenberg") - want) < 1e-12
    assert len(K.kernel_of_adjoint(G)) == 2


def test_kernel_dimensions():
    assert len(K.kernel_of_adjoint(K.GKSLGenerator(np.zeros((3, 3))))) == 9
    # amplitude damping: only multiples of the identity are conserved
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    G = K.GKSLGenerator(SZ, (sm,))
    ker = K.kernel_of_adjoint(G)
    assert len(ker) == 1
    k = ker[0] / ker[0][0, 0]
    assert np.allclose(k, np.eye(2))


def test_commutant_and_invariant_algebra():
    G = K.GKSLGenerator(SZ, (0.3 * SZ,))
    assert K.commutant_membership(G, SZ)
    assert not K.commutant_membership(G, SX)
    rep = K.invariant_algebra_check(G, [SZ])
    assert rep.passed and rep.dimension == 2


def test_choi_of_transpose_is_not_positive():
    d = 2
    M = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1
            M[:, K.vec(E).argmax()] = K.vec(E.T)
    S = K.Superoperator(M, "schrodinger")
    assert K.choi_min_eigenvalue(S) == pytest.approx(-0.5)
    assert not K.cp_check(S)


def test_convex_combination_is_affine():
    rng = _rng(9)
    G0, G1 = K.random_generator(rng, 3), K.random_generator(rng, 3)
    M0, M1 = K.to_superoperator(G0).matrix, K.to_superoperator(G1).matrix
    for lam in (0.0, 0.3, 1.0):
        M = K.to_superoperator(K.convex_combine(G0, G1, lam)).matrix
        assert np.allclose(M, (1 - lam) * M0 + lam * M1, atol=1e-12)
    assert len(K.convex_combine(G0, G1, 0.0).lindblads) == len(G0.lindblads)
    with pytest.raises(ValueError):
        K.convex_combine(G0, G1, 1.5)


def test_bilindblad_qubit_pencil():
    G0 = K.GKSLGenerator(0.5 * SZ)
    G1 = K.GKSLGenerator(1.0 * SZ, (np.sqrt(0.5) * SZ,))
    rep = K.bilindblad_check(G0, G1, [SZ], [0, 0.25, 0.5, 0.75, 1])
    assert rep.passed
    half = K.convex_combine(G0, G1, 0.5)
    assert len(half.lindblads) == 1
    assert np.allclose(half.lindblads[0], np.sqrt(0.25) * SZ)
    # sigma_x is not a common integral
    assert not K.bilindblad_check(G0, G1, [SX]).passed
