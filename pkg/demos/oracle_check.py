"""
Closed forms against the exact sector oracle
============================================

The interaction conserves the number of excitations, so its exponential can
be computed exactly sector by sector.  We compare the closed-form propagator
with that reference, and also show why the four-atom coefficients f0 and F-1
are used in their corrected form (see ERRATA.md).
"""

from tavis_cummings import compare_propagators

nmax = 16
print(f"{'n':>2} {'tau':>5} {'max deviation':>14}  worst entry")
for n in (1, 2, 3, 4):
    for tau in (0.1, 1.0, 5.0):
        dev, loc = compare_propagators(n, tau, 1.0, nmax)
        where = f"<{loc['atoms_out']},{loc['photon_out']}| U |{loc['atoms_in']},{loc['photon_in']}>"
        print(f"{n:2d} {tau:5.1f} {dev:14.2e}  {where}")

# the four-atom block with the coefficients as originally printed
print("\nfour atoms, original f0 and F-1:")
for tau in (0.1, 1.0, 5.0):
    dev, loc = compare_propagators(4, tau, 1.0, nmax, printed=True)
    print(f"   tau={tau:3.1f}  max deviation {dev:.2e}")
