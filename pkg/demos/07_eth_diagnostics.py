"""Eigenstate-thermalization diagnostics of the spin observable.

Three views of sigma_z in the eigenbasis of a three-ion chain:
  1. diagonal matrix elements against eigenenergy (a smooth band is the
     ETH signature; the uncoupled system would give only +-1),
  2. the off-diagonal strength profile over the energy gap, whose width
     tracks twice the energy-shell width of the initial states (= Omega),
  3. the smoothed density of states behind the profile normalization.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import iontherm as it

chain = it.build_chain(3, 2 * np.pi * 0.707, 0.54)
space = it.build_space(3, 6)
big_omega = 2 * np.pi * 1.28
ham = it.build_hamiltonian(space, chain.etas, chain.mode_freqs, big_omega,
                           0.8 * chain.mode_freqs[0])
spectrum = it.diagonalize(ham)
mixture = it.thermal_initial_state(space, [0.6, 1.1, 0.9])
profile = it.eth_diagnostics(spectrum, it.sigma_z_diagonal(space),
                             mixture=mixture)

print(f"off-diagonal profile width {profile.profile_width:.2f} rad/us "
      f"({profile.profile_width / big_omega:.2f} Omega)")
print(f"energy-shell widths of the initial components: all "
      f"{profile.shell_widths.mean() / big_omega:.3f} Omega")

fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
axes[0].plot(profile.diag_energies, profile.diag_values, ".", ms=2)
axes[0].set_xlabel(r"$E_\beta$ (rad/$\mu$s)")
axes[0].set_ylabel(r"$(\sigma_z)_{\beta\beta}$")
axes[0].set_title("diagonal elements")

axes[1].semilogy(profile.omega_bins,
                 np.maximum(profile.offdiag_profile, 1e-12), lw=0.9)
axes[1].axvline(2 * big_omega, color="C3", ls=":", label=r"$+2\Omega$")
axes[1].axvline(-2 * big_omega, color="C3", ls=":")
axes[1].set_xlabel(r"$\omega = E_{\beta_1} - E_{\beta_2}$ (rad/$\mu$s)")
axes[1].set_ylabel(r"$\overline{|O_{\beta_1\beta_2}|^2\,D(E)}$")
axes[1].set_title("off-diagonal profile")
axes[1].legend(fontsize=8)

axes[2].plot(profile.dos.grid, profile.dos.values, lw=0.9)
axes[2].set_xlabel(r"$E$ (rad/$\mu$s)")
axes[2].set_ylabel(r"$D(E)$ (states per rad/$\mu$s)")
axes[2].set_title("density of states")

fig.tight_layout()
fig.savefig("demo07_eth_diagnostics.png", dpi=150)
print("wrote demo07_eth_diagnostics.png")
