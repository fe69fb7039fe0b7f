import numpy as np
import pytest

from bilindblad import gksl as K
from bilindblad.models import EULER_GRID
from bilindblad.sectors import (NonCommutingError, SectorPreconditionError, coherence_trajectory, dephasing_rates,
                                diagonal_block_drift, functional_calculus, joint_sectors, sector_scalars)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def euler_integrals():
    I0 = np.diag([np.sqrt(1 + a * a + b * b) for a, b in EULER_GRID]).astype(complex)
    I1 = np.diag([np.sqrt(1 + a * b) for a, b in EULER_GRID]).astype(complex)
    return I0, I1


def test_euler_grid_sectors():
    S = joint_sectors(euler_integrals())
    assert S.dim == 9
    # the grid has four distinct joint values; multiplicities add up to the dimension
    labels = S.labels()
    assert labels == sorted(labels)
    assert np.allclose(labels, [(1, 1), (np.sqrt(2), 1), (np.sqrt(3), 0), (np.sqrt(3), np.sqrt(2))])
    assert [s.multiplicity for s in S] == [1, 4, 2, 2]
    assert np.allclose(sum(s.projector for s in S), np.eye(9))


def test_sectors_in_rotated_basis():
    rng = np.random.default_rng(1)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    A = Q @ np.diag([1.0, 1.0, 2.0, 3.0]) @ Q.conj().T
    B = Q @ np.diag([0.0, 5.0, 5.0, 5.0]) @ Q.conj().T
    S = joint_sectors([A, B])
    assert np.allclose([s.values for s in S], [(1, 0), (1, 5), (2, 5), (3, 5)])
    for s in S:
        assert np.allclose(s.projector @ s.projector, s.projector, atol=1e-10)


def test_non_commuting_rejected():
    with pytest.raises(NonCommutingError) as info:
        joint_sectors([SZ, SX])
    assert info.value.pair == (0, 1)


def test_functional_calculus_and_scalars():
    S = joint_sectors([SZ])
    F = functional_calculus(S, lambda v: v[0] ** 2 + 1)
    assert np.allclose(F, 2 * np.eye(2))
    assert sector_scalars(SZ, S) == pytest.approx([-1, 1])
    with pytest.raises(SectorPreconditionError, match="sector"):
        sector_scalars(SX, S)


def test_dephasing_rates_closed_form():
    g = 0.5
    G = K.GKSLGenerator(SZ, (np.sqrt(g) * SZ,))
    rates = dephasing_rates(G, joint_sectors([SZ]))
    assert np.allclose(rates, [[0, 2 * g], [2 * g, 0]])


def test_euler_coherences_follow_rate_law():
    I0, I1 = euler_integrals()
    S = joint_sectors([I0, I1])
    phis = (lambda v: v[0], lambda v: v[1], lambda v: v[0] * v[1])
    Ls = tuple(np.sqrt(g) * functional_calculus(S, f) for g, f in zip((0.5, 0.25, 0.1), phis))
    G = K.GKSLGenerator(I0, Ls)
    rho0 = K.random_density(np.random.default_rng(4), 9)
    tab = coherence_trajectory(G, rho0, S, [0.1, 0.5, 1.0, 2.0])
    assert tab.predicted
    assert tab.max_offdiag_rel_error() < 1e-8
    assert tab.max_diagonal_drift() < 1e-10
    assert diagonal_block_drift(G, rho0, S, [0.5, 2.0]) < 1e-10
    csv = tab.to_csv(S.labels()).splitlines()
    assert csv[0] == "t,sector_nu,sector_mu,block_norm,predicted_norm"
    assert len(csv) == 1 + 4 * 16


def test_no_prediction_when_hamiltonian_mixes_sectors():
    G = K.GKSLGenerator(SX, (SZ,))
    tab = coherence_trajectory(G, np.eye(2) / 2, joint_sectors([SZ]), [0.5])
    assert not tab.predicted
