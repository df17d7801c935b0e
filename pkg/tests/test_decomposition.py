from fractions import Fraction

import numpy as np
import pytest

from tavis_cummings.decomposition import (
    block_diagonalize,
    block_operator,
    block_report,
    decomposition,
    spin_ladder,
    transform_matrix,
    unitarity_error,
)
from tavis_cummings.operators import SIGMA_MINUS, SIGMA_PLUS, excited_count, interaction_A

EXPECTED_SPINS = {
    2: [0, 1],
    3: [Fraction(1, 2), Fraction(1, 2), Fraction(3, 2)],
    4: [0, 1, 0, 1, 1, 2],
}


def test_single_atom_identity():
    np.testing.assert_array_equal(transform_matrix(1), np.eye(2))


def test_unsupported_atom_count():
    with pytest.raises(ValueError):
        transform_matrix(5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_orthogonal(n):
    T = transform_matrix(n)
    assert unitarity_error(T) < 1e-14
    assert np.all(T.imag == 0)


def test_two_atom_columns():
    T = transform_matrix(2).real
    np.testing.assert_array_equal(T[:, 1], [1, 0, 0, 0])
    np.testing.assert_allclose(T[:, 0], np.array([0, 1, -1, 0]) / np.sqrt(2))


def test_four_atom_extreme_weights():
    T = transform_matrix(4).real
    unit_cols = [c for c in range(16) if np.count_nonzero(T[:, c]) == 1]
    assert unit_cols == [11, 15]
    assert T[0, 11] == 1 and T[15, 15] == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_transform_preserves_atomic_excitation(n):
    # each column mixes only atomic states with the same number of excitations
    T = transform_matrix(n)
    k = excited_count(n)
    for c in range(2**n):
        assert len(set(k[np.flatnonzero(np.abs(T[:, c]) > 0)])) == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_spin_content(n):
    dec = decomposition(n)
    assert dec.spins == [Fraction(j) for j in EXPECTED_SPINS[n]]
    assert sum(b.dim for b in dec.blocks) == 2**n


def test_spin_ladder_half():
    jp, jm = spin_ladder(Fraction(1, 2))
    np.testing.assert_array_equal(jp, SIGMA_PLUS)
    np.testing.assert_array_equal(jm, SIGMA_MINUS)


def test_spin_ladder_entries():
    jp, _ = spin_ladder(1)
    np.testing.assert_allclose(np.diag(jp, 1), [np.sqrt(2)] * 2)
    jp, _ = spin_ladder(Fraction(3, 2))
    np.testing.assert_allclose(np.diag(jp, 1), [np.sqrt(3), 2, np.sqrt(3)])
    jp, _ = spin_ladder(2)
    np.testing.assert_allclose(np.diag(jp, 1), [2, np.sqrt(6), np.sqrt(6), 2])


@pytest.mark.parametrize("j", [Fraction(1, 2), 1, Fraction(3, 2), 2])
def test_spin_ladder_su2(j):
    jp, jm = spin_ladder(j)
    j3 = 0.5 * (jp @ jm - jm @ jp)
    jf = float(j)
    np.testing.assert_allclose(np.diag(j3).real, jf - np.arange(int(2 * jf + 1)), atol=1e-14)


def test_spin_ladder_rejects():
    with pytest.raises(ValueError):
        spin_ladder(Fraction(5, 2))
    with pytest.raises(ValueError):
        spin_ladder(Fraction(1, 3))


def test_two_atom_blocks():
    nmax = 5
    blocks, residual = block_diagonalize(interaction_A(2, nmax), decomposition(2), nmax)
    assert residual < 1e-13
    np.testing.assert_allclose(blocks[0], 0, atol=1e-15)
    P = nmax + 1
    b1 = blocks[1].reshape(3, P, 3, P)
    a = np.diag(np.sqrt(np.arange(1, P)), 1)
    np.testing.assert_allclose(b1[0, :, 1, :], np.sqrt(2) * a, atol=1e-14)
    np.testing.assert_allclose(b1[1, :, 2, :], np.sqrt(2) * a, atol=1e-14)


def test_three_atom_blocks():
    nmax = 4
    blocks, residual = block_diagonalize(interaction_A(3, nmax), decomposition(3), nmax)
    assert residual < 1e-13
    for blk, j in zip(blocks, EXPECTED_SPINS[3]):
        np.testing.assert_allclose(blk, block_operator(j, nmax), atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("nmax", [4, 16, 64])
def test_block_diagonalization(n, nmax):
    dec = decomposition(n)
    blocks, residual = block_diagonalize(interaction_A(n, nmax), dec, nmax)
    assert residual < 1e-13
    for blk, b in zip(blocks, dec.blocks):
        assert np.max(np.abs(blk - block_operator(b.spin, nmax))) < 1e-13


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        block_diagonalize(interaction_A(2, 3), decomposition(2), 4)


def test_corrupted_transform_is_localized():
    T = transform_matrix(4).copy()
    T[1, 12] += 0.05  # entry of the spin-2 block column
    rows = block_report(decomposition(4, T), 8)
    bad = [r for r in rows if max(r["leakage"], r["block_error"]) > 1e-3]
    assert bad and all(r["spin"] == "2" or r["leakage"] > 1e-3 for r in bad)
    assert any(r["spin"] == "2" and r["block_error"] > 1e-3 for r in bad)
