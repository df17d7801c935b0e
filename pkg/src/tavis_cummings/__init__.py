"""Explicit evolution operators of the Tavis-Cummings model (1 to 4 atoms).

Modules
-------
operators      truncated Fock-space and collective spin operators
decomposition  block-diagonalizing transforms and spin-j blocks
closed_form    operator-valued closed-form propagators and power formulas
oracle         exact excitation-sector reference propagators
simulator      time series of observables and verification reports
"""

from .closed_form import (
    assemble_propagator,
    block_propagator,
    b_power_check,
    full_evolution,
    propagate_state,
    propagator_b_half,
    propagator_b_one,
    propagator_b_three_half,
    propagator_b_two,
)
from .decomposition import SpinDecomposition, block_diagonalize, spin_ladder, transform_matrix
from .operators import (
    ModelParams,
    collective_spin,
    excitation_operator,
    hamiltonian,
    interaction_A,
    ladder,
    site_pauli,
)
from .oracle import compare_propagators, enumerate_sectors, sector_propagator
from .simulator import SimConfig, build_initial_state, evolve, verify

__version__ = "0.1.0"
