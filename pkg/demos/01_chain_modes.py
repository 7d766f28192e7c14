"""Geometry and mode structure of small ion chains.

Solves the equilibrium positions of 1..5 ions in a harmonic axial trap,
computes the axial normal modes, and tabulates the per-mode spin-phonon
couplings for a spin sitting on the end ion. The highest-to-lowest
frequency ratios should reproduce the measured values 1.73, 2.41, 3.05,
3.67 for 2..5 ions.
"""

import numpy as np

import iontherm as it

OMEGA1_MHZ = 0.71
ETA1 = 0.54

for n_ions in range(1, 6):
    chain = it.build_chain(n_ions, 2 * np.pi * OMEGA1_MHZ, ETA1)
    print(f"N = {n_ions}")
    print("  positions (Coulomb lengths):",
          np.array2string(chain.positions, precision=4))
    ratios = chain.mode_freqs / chain.mode_freqs[0]
    print("  frequency ratios:", np.array2string(ratios, precision=4))
    print("  Lamb-Dicke couplings:", np.array2string(chain.etas, precision=4))
    etas_eff = it.effective_lamb_dicke(chain.etas, 1.0)
    print("  thermally enhanced (nbar=1):",
          np.array2string(etas_eff, precision=4))
    print()

print("revival-time estimates (us), from the mean mode spacing:")
for n_ions in range(2, 6):
    chain = it.build_chain(n_ions, 2 * np.pi * OMEGA1_MHZ, ETA1)
    estimate = it.predict_revival_time(chain.mode_freqs)
    print(f"  N = {n_ions}: tau_rev = {estimate.tau_rev:.2f} "
          f"(spacings {estimate.min_spacing:.2f}..{estimate.max_spacing:.2f} rad/us)")
