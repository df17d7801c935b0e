"""Block-diagonalizing transforms for the collective interaction operator.

For n = 2, 3, 4 atoms a fixed real orthogonal matrix T on the atomic space
brings ``S_+ (x) a + S_- (x) a^dagger`` into a direct sum of irreducible
spin-j blocks ``B_j = J_+ (x) a + J_- (x) a^dagger``.  The matrices below are
stored entry by entry as exact surds and evaluated once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .operators import MAX_ATOMS, _check_atoms, interaction_A, ladder

_R2 = np.sqrt(2.0)
_R3 = np.sqrt(3.0)
_R6 = np.sqrt(6.0)

# Nonzero entries as {(row, col): value}; rows are atomic basis states,
# columns run through the blocks in the printed direct-sum order.
_T2 = {
    (0, 1): 1.0,
    (1, 0): 1 / _R2, (1, 2): 1 / _R2,
    (2, 0): -1 / _R2, (2, 2): 1 / _R2,
    (3, 3): 1.0,
}

_T3 = {
    (0, 4): 1.0,
    (1, 0): 1 / _R2, (1, 2): 1 / _R6, (1, 5): 1 / _R3,
    (2, 0): -1 / _R2, (2, 2): 1 / _R6, (2, 5): 1 / _R3,
    (3, 3): _R2 / _R3, (3, 6): 1 / _R3,
    (4, 2): -_R2 / _R3, (4, 5): 1 / _R3,
    (5, 1): 1 / _R2, (5, 3): -1 / _R6, (5, 6): 1 / _R3,
    (6, 1): -1 / _R2, (6, 3): -1 / _R6, (6, 6): 1 / _R3,
    (7, 7): 1.0,
}

_T4 = {
    (0, 11): 1.0,
    (1, 1): 1 / _R2, (1, 5): 1 / _R6, (1, 8): 1 / (2 * _R3), (1, 12): 0.5,
    (2, 1): -1 / _R2, (2, 5): 1 / _R6, (2, 8): 1 / (2 * _R3), (2, 12): 0.5,
    (3, 4): 1 / _R3, (3, 6): 1 / _R3, (3, 9): 1 / _R6, (3, 13): 1 / _R6,
    (4, 5): -np.sqrt(2 / 3), (4, 8): 1 / (2 * _R3), (4, 12): 0.5,
    (5, 0): 0.5, (5, 2): 0.5, (5, 4): -1 / (2 * _R3), (5, 6): -1 / (2 * _R3),
    (5, 9): 1 / _R6, (5, 13): 1 / _R6,
    (6, 0): -0.5, (6, 2): -0.5, (6, 4): -1 / (2 * _R3), (6, 6): -1 / (2 * _R3),
    (6, 9): 1 / _R6, (6, 13): 1 / _R6,
    (7, 10): _R3 / 2, (7, 14): 0.5,
    (8, 8): -_R3 / 2, (8, 12): 0.5,
    (9, 0): -0.5, (9, 2): 0.5, (9, 4): -1 / (2 * _R3), (9, 6): 1 / (2 * _R3),
    (9, 9): -1 / _R6, (9, 13): 1 / _R6,
    (10, 0): 0.5, (10, 2): -0.5, (10, 4): -1 / (2 * _R3), (10, 6): 1 / (2 * _R3),
    (10, 9): -1 / _R6, (10, 13): 1 / _R6,
    (11, 7): np.sqrt(2 / 3), (11, 10): -1 / (2 * _R3), (11, 14): 0.5,
    (12, 4): 1 / _R3, (12, 6): -1 / _R3, (12, 9): -1 / _R6, (12, 13): 1 / _R6,
    (13, 3): 1 / _R2, (13, 7): -1 / _R6, (13, 10): -1 / (2 * _R3), (13, 14): 0.5,
    (14, 3): -1 / _R2, (14, 7): -1 / _R6, (14, 10): -1 / (2 * _R3), (14, 14): 0.5,
    (15, 15): 1.0,
}

_ENTRIES = {2: _T2, 3: _T3, 4: _T4}

# Spins of the blocks, in order along the diagonal of T^dagger A T.
_BLOCK_SPINS = {
    1: (Fraction(1, 2),),
    2: (Fraction(0), Fraction(1)),
    3: (Fraction(1, 2), Fraction(1, 2), Fraction(3, 2)),
    4: (Fraction(0), Fraction(1), Fraction(0), Fraction(1), Fraction(1), Fraction(2)),
}


@dataclass(frozen=True)
class Block:
    spin: Fraction
    offset: int

    @property
    def dim(self) -> int:
        return int(2 * self.spin + 1)

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.dim)


@dataclass(frozen=True)
class SpinDecomposition:
    n_atoms: int
    T: np.ndarray = field(repr=False)
    blocks: tuple[Block, ...]

    @property
    def spins(self) -> list[Fraction]:
        return [b.spin for b in self.blocks]


def transform_matrix(n: int) -> np.ndarray:
    """The orthogonal atomic-space transform for ``n`` atoms (identity for n = 1)."""
    _check_atoms(n)
    if n == 1:
        return np.eye(2, dtype=complex)
    T = np.zeros((2**n, 2**n), dtype=complex)
    for (r, c), v in _ENTRIES[n].items():
        T[r, c] = v
    return T


def decomposition(n: int, T: np.ndarray | None = None) -> SpinDecomposition:
    """Spin decomposition for ``n`` atoms; ``T`` overrides the stored transform."""
    _check_atoms(n)
    if T is None:
        T = transform_matrix(n)
    T = np.asarray(T, dtype=complex)
    if T.shape != (2**n, 2**n):
        raise ValueError(f"transform for {n} atoms must be {2**n}x{2**n}, got {T.shape}")
    blocks = []
    offset = 0
    for j in _BLOCK_SPINS[n]:
        blocks.append(Block(j, offset))
        offset += int(2 * j + 1)
    return SpinDecomposition(n, T, tuple(blocks))


def spin_ladder(j) -> tuple[np.ndarray, np.ndarray]:
    """Irreducible spin-j raising/lowering matrices, highest weight first."""
    j = Fraction(j)
    if j < 0 or (2 * j).denominator != 1 or j > Fraction(MAX_ATOMS, 2):
        raise ValueError(f"unsupported spin {j}")
    dim = int(2 * j + 1)
    jf = float(j)
    # m runs j, j-1, ..., -j; J_+ couples column m to row m+1.
    m = jf - np.arange(1, dim)
    j_plus = np.diag(np.sqrt(jf * (jf + 1) - m * (m + 1)).astype(complex), k=1)
    return j_plus, j_plus.T.copy()


def block_operator(j, nmax: int) -> np.ndarray:
    """``B_j = J_+ (x) a + J_- (x) a^dagger`` on the truncated field."""
    j_plus, j_minus = spin_ladder(j)
    return np.kron(j_plus, ladder("annihilate", nmax)) + np.kron(j_minus, ladder("create", nmax))


def field_extend(T: np.ndarray, nmax: int) -> np.ndarray:
    return np.kron(T, np.eye(nmax + 1))


def conjugate_atomic(T: np.ndarray, M: np.ndarray, nmax: int) -> np.ndarray:
    """``(T (x) 1) M (T (x) 1)^dagger`` without forming the Kronecker product."""
    L = T.shape[0]
    P = nmax + 1
    M4 = M.reshape(L, P, L, P)
    out = np.einsum("ab,bpcq,dc->apdq", T, M4, T.conj(), optimize=True)
    return out.reshape(L * P, L * P)


def block_diagonalize(A: np.ndarray, dec: SpinDecomposition, nmax: int):
    """Conjugate ``A`` into the block basis.

    Returns ``(blocks, residual)``: the diagonal blocks in declared order and
    the max-norm of every entry outside them.
    """
    P = nmax + 1
    L = 2**dec.n_atoms
    if A.shape != (L * P, L * P):
        raise ValueError(f"operator shape {A.shape} does not match {dec.n_atoms} atoms, nmax={nmax}")
    Tdag = dec.T.conj().T
    M = conjugate_atomic(Tdag, A, nmax)
    M4 = M.reshape(L, P, L, P)
    off = M4.copy()
    blocks = []
    for b in dec.blocks:
        s = b.slice
        blocks.append(M4[s, :, s, :].reshape(b.dim * P, b.dim * P).copy())
        off[s, :, s, :] = 0
    residual = float(np.max(np.abs(off))) if off.size else 0.0
    return blocks, residual


def block_report(dec: SpinDecomposition, nmax: int) -> list[dict]:
    """Per-block diagnostics: off-block leakage from each block's rows and
    deviation of the diagonal block from the ideal ``B_j``."""
    P = nmax + 1
    L = 2**dec.n_atoms
    A = interaction_A(dec.n_atoms, nmax)
    M4 = conjugate_atomic(dec.T.conj().T, A, nmax).reshape(L, P, L, P)
    report = []
    for b in dec.blocks:
        s = b.slice
        rows = M4[s].copy()
        rows[:, :, s, :] = 0
        diag = M4[s, :, s, :].reshape(b.dim * P, b.dim * P)
        report.append({
            "spin": str(b.spin),
            "offset": b.offset,
            "leakage": float(np.max(np.abs(rows))),
            "block_error": float(np.max(np.abs(diag - block_operator(b.spin, nmax)))),
        })
    return report


def unitarity_error(T: np.ndarray) -> float:
    return float(np.max(np.abs(T.conj().T @ T - np.eye(T.shape[0]))))
