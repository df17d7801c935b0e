import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tavis_cummings.operators import (
    SIGMA_PLUS,
    ModelParams,
    casimir,
    collective_spin,
    commutator,
    contained_mask,
    excitation_operator,
    excitation_values,
    hamiltonian,
    interaction_A,
    ladder,
    photon_numbers,
    site_pauli,
)


def test_ladder_small():
    np.testing.assert_array_equal(ladder("annihilate", 1), [[0, 1], [0, 0]])
    np.testing.assert_array_equal(ladder("number", 2), np.diag([0, 1, 2]))
    np.testing.assert_array_equal(ladder("create", 3), ladder("annihilate", 3).T)


@pytest.mark.parametrize("nmax", [0, 1, 5, 20])
def test_number_is_create_annihilate(nmax):
    a = ladder("annihilate", nmax)
    np.testing.assert_allclose(a.conj().T @ a, ladder("number", nmax), atol=1e-14)
    # a a^dagger = N + 1 fails only in the truncation corner
    diff = a @ a.conj().T - ladder("number", nmax) - np.eye(nmax + 1)
    diff[nmax, nmax] = 0
    assert np.max(np.abs(diff)) < 1e-14


def test_ladder_rejects_bad_input():
    with pytest.raises(ValueError):
        ladder("annihilate", -1)
    with pytest.raises(ValueError):
        ladder("displace", 3)


def test_site_pauli():
    np.testing.assert_array_equal(site_pauli(1, 1, "plus"), SIGMA_PLUS)
    np.testing.assert_array_equal(site_pauli(2, 2, "three"), np.diag([1, -1, 1, -1]))
    # sigma_+ (x) 1 times 1 (x) sigma_+ = sigma_+ (x) sigma_+ : |dd> -> |uu>
    expected = np.zeros((4, 4))
    expected[0, 3] = 1
    np.testing.assert_array_equal(site_pauli(2, 1, "plus") @ site_pauli(2, 2, "plus"), expected)


@pytest.mark.parametrize("args", [(2, 0, "plus"), (2, 3, "plus"), (5, 1, "plus"), (2, 1, "x")])
def test_site_pauli_errors(args):
    with pytest.raises(ValueError):
        site_pauli(*args)


def test_collective_spin_single_atom():
    sp, sm, s3 = collective_spin(1)
    np.testing.assert_array_equal(sp, [[0, 1], [0, 0]])
    np.testing.assert_array_equal(sm, [[0, 0], [1, 0]])
    np.testing.assert_array_equal(s3, np.diag([0.5, -0.5]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_su2_relations_exact(n):
    sp, sm, s3 = collective_spin(n)
    assert np.array_equal(commutator(s3, sp), sp)
    assert np.array_equal(commutator(s3, sm), -sm)
    assert np.array_equal(commutator(sp, sm), 2 * s3)


def test_s3_four_atoms_popcount():
    _, _, s3 = collective_spin(4)
    expected = [2 - bin(k).count("1") for k in range(16)]
    np.testing.assert_array_equal(np.diag(s3).real, expected)
    assert np.trace(s3) == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_representation_is_reducible(n):
    eig = np.unique(np.round(np.linalg.eigvalsh(casimir(n)), 10))
    assert len(eig) > 1
    # eigenvalues are 2 j (j + 1) for the spins present
    spins = {2: [0, 1], 3: [0.5, 1.5], 4: [0, 1, 2]}[n]
    np.testing.assert_allclose(eig, sorted(2 * j * (j + 1) for j in spins))


def test_interaction_one_atom_block_form():
    nmax = 4
    A = interaction_A(1, nmax)
    P = nmax + 1
    a = ladder("annihilate", nmax)
    np.testing.assert_array_equal(A[:P, P:], a)
    np.testing.assert_array_equal(A[P:, :P], a.T)
    np.testing.assert_array_equal(A[:P, :P], 0)


def test_interaction_three_atoms_pattern():
    # the 8x8 atomic layout: 'a' wherever atom column has one more ground atom
    A = interaction_A(3, 3).reshape(8, 4, 8, 4)
    a = ladder("annihilate", 3)
    for r, c in itertools.product(range(8), range(8)):
        diff = r ^ c
        block = A[r, :, c, :]
        if bin(diff).count("1") == 1 and c & diff:
            np.testing.assert_array_equal(block, a)
        elif bin(diff).count("1") == 1 and r & diff:
            np.testing.assert_array_equal(block, a.T)
        else:
            np.testing.assert_array_equal(block, 0)


def test_interaction_vacuum_cutoff():
    A = interaction_A(2, 0)
    # with only the vacuum retained every ladder term vanishes
    np.testing.assert_array_equal(A, 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_hermitian(n):
    A = interaction_A(n, 7)
    H = hamiltonian(ModelParams(n, omega=1.3, delta=0.4, g=0.8, nmax=7))
    assert np.max(np.abs(A - A.conj().T)) < 1e-14
    assert np.max(np.abs(H - H.conj().T)) < 1e-14


def test_hamiltonian_limits():
    H = hamiltonian(ModelParams(2, omega=1.5, delta=0.0, g=0.0, nmax=3))
    np.testing.assert_allclose(H, np.diag(1.5 * photon_numbers(2, 3)))
    H = hamiltonian(ModelParams(1, omega=0.0, delta=0.0, g=1.0, nmax=5))
    np.testing.assert_array_equal(H, interaction_A(1, 5))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_resonant_hamiltonian_conserves_excitation(n):
    nmax = 6
    H = hamiltonian(ModelParams(n, omega=0.9, delta=0.9, g=1.1, nmax=nmax))
    C = commutator(H, excitation_operator(n, nmax))
    keep = photon_numbers(n, nmax) < nmax
    assert np.max(np.abs(C[np.ix_(keep, keep)])) < 1e-13


def test_excitation_values():
    assert excitation_values(1, 3)[0] == 0.5  # excited atom, vacuum
    # all four atoms ground with 3 photons
    assert excitation_values(4, 5)[15 * 6 + 3] == 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_interaction_preserves_excitation_sectors(n):
    nmax = 6
    A = interaction_A(n, nmax)
    E = excitation_values(n, nmax)
    ok = contained_mask(n, nmax)
    for e in np.unique(E[ok]):
        proj = E == e
        leak = A[np.ix_(~proj, proj)]
        assert np.max(np.abs(leak), initial=0) < 1e-14


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(5)
    with pytest.raises(ValueError):
        ModelParams(2, omega=-1)
    with pytest.raises(ValueError):
        ModelParams(2, nmax=-1)
    assert ModelParams(2, omega=1, delta=1).resonant
    assert not ModelParams(2, omega=1, delta=0.5).resonant


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 4), nmax=st.integers(0, 8))
def test_excitation_operator_diagonal(n, nmax):
    E = excitation_operator(n, nmax)
    np.testing.assert_array_equal(E, np.diag(np.diag(E)))
    _, _, s3 = collective_spin(n)
    np.testing.assert_allclose(
        E, np.kron(s3, np.eye(nmax + 1)) + np.kron(np.eye(2**n), ladder("number", nmax))
    )
