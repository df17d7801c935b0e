"""
Spin blocks of the collective interaction
=========================================

For two to four atoms a fixed orthogonal matrix T splits the interaction
S+ a + S- a^dagger into irreducible spin-j pieces.  Here we look at the
spins, check the off-block residual and show one block explicitly.
"""

import numpy as np

from tavis_cummings import block_diagonalize, interaction_A
from tavis_cummings.decomposition import block_operator, decomposition

nmax = 8
for n in (2, 3, 4):
    dec = decomposition(n)
    blocks, residual = block_diagonalize(interaction_A(n, nmax), dec, nmax)
    shape = max(np.max(np.abs(blk - block_operator(b.spin, nmax))) for b, blk in zip(dec.blocks, blocks))
    spins = ", ".join(str(s) for s in dec.spins)
    print(f"n={n}: spins [{spins}]  off-block {residual:.1e}  block shape error {shape:.1e}")

# the spin-1 block of two atoms on the lowest photon numbers
dec = decomposition(2)
blocks, _ = block_diagonalize(interaction_A(2, 2), dec, 2)
np.set_printoptions(precision=3, suppress=True, linewidth=120)
print("\nspin-1 block for two atoms, nmax=2 (rows: m=1,0,-1 times photons 0..2)")
print(blocks[1].real)
