"""Formula-free reference propagators.

The interaction operator conserves the excitation number (excited atoms plus
photons), so it splits into finite sectors of dimension at most 2^n.  Each
sector is exponentiated exactly by a symmetric eigendecomposition, which
makes this module the trust anchor for the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    _check_atoms,
    basis_label,
    collective_spin,
    contained_mask,
    excited_count,
    interaction_A,
)


@dataclass(frozen=True)
class ExcitationSector:
    n_atoms: int
    excitation: int
    states: tuple[tuple[int, int], ...]  # (atomic index, photon number)

    @property
    def dim(self) -> int:
        return len(self.states)

    def indices(self, nmax: int) -> np.ndarray:
        return np.array([a * (nmax + 1) + p for a, p in self.states])


def enumerate_sectors(n: int, emax: int) -> list[ExcitationSector]:
    """Sectors with integer excitation 0..emax, states ordered by atomic index."""
    _check_atoms(n)
    k = excited_count(n)
    sectors = []
    for E in range(emax + 1):
        states = tuple((a, int(E - k[a])) for a in range(2**n) if E - k[a] >= 0)
        sectors.append(ExcitationSector(n, E, states))
    return sectors


def sector_matrix(sector: ExcitationSector) -> np.ndarray:
    """Exact restriction of S_+ (x) a + S_- (x) a^dagger to one sector (real symmetric)."""
    sp, sm, _ = collective_spin(sector.n_atoms)
    sp = sp.real
    sm = sm.real
    A = np.zeros((sector.dim, sector.dim))
    for i, (a_out, p_out) in enumerate(sector.states):
        for j, (a_in, p_in) in enumerate(sector.states):
            if p_out == p_in - 1:
                A[i, j] = sp[a_out, a_in] * np.sqrt(p_in)
            elif p_out == p_in + 1:
                A[i, j] = sm[a_out, a_in] * np.sqrt(p_in + 1)
    return A


def _expm_hermitian(A: np.ndarray, tau: float) -> np.ndarray:
    if tau == 0:
        return np.eye(A.shape[0], dtype=complex)
    w, V = np.linalg.eigh(A)
    return (V * np.exp(-1j * tau * w)) @ V.conj().T


def sector_propagator(sector: ExcitationSector, t: float, g: float) -> np.ndarray:
    """exp(-i t g A) restricted to ``sector``."""
    return _expm_hermitian(sector_matrix(sector), t * g)


def oracle_propagator(n: int, t: float, g: float, nmax: int) -> np.ndarray:
    """Dense propagator assembled from every sector that fits under nmax.

    Columns of partially truncated sectors are left zero; compare only on
    :func:`~tavis_cummings.operators.contained_mask`.
    """
    P = nmax + 1
    U = np.zeros((2**n * P, 2**n * P), dtype=complex)
    for sector in enumerate_sectors(n, nmax):
        idx = sector.indices(nmax)
        U[np.ix_(idx, idx)] = sector_propagator(sector, t, g)
    return U


def dense_oracle(n: int, t: float, g: float, nmax: int) -> np.ndarray:
    """exp(-i t g A) from an eigendecomposition of the full truncated A.

    Exact on columns of fully contained sectors; used to cross-check the
    sector enumeration.
    """
    return _expm_hermitian(interaction_A(n, nmax), t * g)


def compare_propagators(n: int, t: float, g: float, nmax: int, U: np.ndarray | None = None, printed: bool = False):
    """Worst entrywise deviation between the closed form and the sector oracle.

    Returns ``(max_dev, location)`` where ``location`` names the input and
    output basis states of the worst entry.
    """
    if U is None:
        from .closed_form import assemble_propagator

        U = assemble_propagator(n, t, g, nmax, printed=printed)
    ref = oracle_propagator(n, t, g, nmax)
    cols = np.flatnonzero(contained_mask(n, nmax))
    diff = np.abs(U[:, cols] - ref[:, cols])
    row, ci = np.unravel_index(int(np.argmax(diff)), diff.shape)
    col = cols[ci]
    atoms_out, photon_out = basis_label(n, nmax, row)
    atoms_in, photon_in = basis_label(n, nmax, col)
    location = {
        "atoms_in": atoms_in,
        "photon_in": photon_in,
        "atoms_out": atoms_out,
        "photon_out": photon_out,
    }
    return float(diff[row, ci]), location
