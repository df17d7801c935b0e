"""Truncated Fock-space and multi-atom spin operators.

Basis convention used throughout the package: the joint index of the product
state ``|atomic, photon>`` is ``atomic * (nmax + 1) + photon``.  The atomic
index is the big-endian bit pattern of the n two-level factors (atom 1 is the
most significant bit) with bit 0 = excited and bit 1 = ground, so that
``sigma_3 = diag(1, -1)`` in each factor.

All constructors return plain ``complex128`` numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_ATOMS = 4

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_THREE = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

_PAULI = {"plus": SIGMA_PLUS, "minus": SIGMA_MINUS, "three": SIGMA_THREE}


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the n-atom cavity model (hbar = 1)."""

    n_atoms: int
    omega: float = 0.0
    delta: float = 0.0
    g: float = 1.0
    nmax: int = 16

    def __post_init__(self):
        _check_atoms(self.n_atoms)
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if self.nmax < 0:
            raise ValueError(f"nmax must be >= 0, got {self.nmax}")

    @property
    def resonant(self) -> bool:
        return self.delta == self.omega

    @property
    def dim(self) -> int:
        return 2**self.n_atoms * (self.nmax + 1)


def _check_atoms(n):
    if not 1 <= n <= MAX_ATOMS:
        raise ValueError(f"number of atoms must be in [1, {MAX_ATOMS}], got {n}")


def _check_nmax(nmax):
    if nmax < 0:
        raise ValueError(f"nmax must be >= 0, got {nmax}")


def ladder(kind: str, nmax: int) -> np.ndarray:
    """Field operator truncated to photon numbers 0..nmax.

    ``kind`` is one of ``"annihilate"``, ``"create"`` or ``"number"``.
    """
    _check_nmax(nmax)
    m = np.arange(nmax + 1)
    if kind == "annihilate":
        return np.diag(np.sqrt(m[1:]).astype(complex), k=1)
    if kind == "create":
        return np.diag(np.sqrt(m[1:]).astype(complex), k=-1)
    if kind == "number":
        return np.diag(m.astype(complex))
    raise ValueError(f"unknown ladder kind {kind!r}")


def site_pauli(n: int, i: int, s: str) -> np.ndarray:
    """sigma_s acting on atom ``i`` (1-based) of ``n`` atoms."""
    _check_atoms(n)
    if not 1 <= i <= n:
        raise ValueError(f"site index {i} out of range for {n} atoms")
    try:
        sigma = _PAULI[s]
    except KeyError:
        raise ValueError(f"unknown Pauli component {s!r}") from None
    factors = [IDENTITY_2] * n
    factors[i - 1] = sigma
    return reduce(np.kron, factors)


def collective_spin(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(S_plus, S_minus, S_three)`` summed over all ``n`` atoms."""
    _check_atoms(n)
    s_plus = sum(site_pauli(n, i, "plus") for i in range(1, n + 1))
    s_minus = sum(site_pauli(n, i, "minus") for i in range(1, n + 1))
    s_three = 0.5 * sum(site_pauli(n, i, "three") for i in range(1, n + 1))
    return s_plus, s_minus, s_three


def casimir(n: int) -> np.ndarray:
    """Total spin S_+S_- + S_-S_+ + 2 S_3^2 (equals 2 j(j+1) on a spin-j irrep)."""
    sp, sm, s3 = collective_spin(n)
    return sp @ sm + sm @ sp + 2 * s3 @ s3


def interaction_A(n: int, nmax: int) -> np.ndarray:
    """Interaction operator S_+ (x) a + S_- (x) a^dagger."""
    _check_nmax(nmax)
    sp, sm, _ = collective_spin(n)
    return np.kron(sp, ladder("annihilate", nmax)) + np.kron(sm, ladder("create", nmax))


def hamiltonian(p: ModelParams) -> np.ndarray:
    """Full model Hamiltonian omega N + delta S_3 + g A."""
    _, _, s3 = collective_spin(p.n_atoms)
    n_field = ladder("number", p.nmax)
    id_atoms = np.eye(2**p.n_atoms, dtype=complex)
    id_field = np.eye(p.nmax + 1, dtype=complex)
    return (
        p.omega * np.kron(id_atoms, n_field)
        + p.delta * np.kron(s3, id_field)
        + p.g * interaction_A(p.n_atoms, p.nmax)
    )


def excitation_operator(n: int, nmax: int) -> np.ndarray:
    """Conserved excitation S_3 (x) 1 + 1 (x) N (diagonal)."""
    _check_nmax(nmax)
    return np.diag(excitation_values(n, nmax).astype(complex))


def excited_count(n: int) -> np.ndarray:
    """Number of excited atoms for each atomic index (bit 0 = excited)."""
    _check_atoms(n)
    idx = np.arange(2**n)
    ones = np.array([bin(k).count("1") for k in idx])
    return n - ones


def excitation_index(n: int, nmax: int) -> np.ndarray:
    """Integer excitation (excited atoms + photons) of every product basis state."""
    _check_nmax(nmax)
    return (excited_count(n)[:, None] + np.arange(nmax + 1)[None, :]).ravel()


def excitation_values(n: int, nmax: int) -> np.ndarray:
    """Eigenvalues of S_3 + N on the product basis; ``excitation_index - n/2``."""
    return excitation_index(n, nmax) - n / 2


def photon_numbers(n: int, nmax: int) -> np.ndarray:
    return np.tile(np.arange(nmax + 1), 2**n)


def contained_mask(n: int, nmax: int) -> np.ndarray:
    """Boolean mask of basis states whose whole excitation sector fits under nmax.

    The sector with integer excitation E contains the all-ground state with E
    photons, so it is fully representable iff ``E <= nmax``.  Columns in this
    mask are reproduced exactly by any truncated propagator.
    """
    return excitation_index(n, nmax) <= nmax


def basis_label(n: int, nmax: int, index: int) -> tuple[str, int]:
    """Human-readable ``(atomic bits, photon)`` label, e.g. ``("ud", 3)``."""
    atomic, photon = divmod(int(index), nmax + 1)
    bits = format(atomic, f"0{n}b").replace("0", "u").replace("1", "d")
    return bits, photon


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x
