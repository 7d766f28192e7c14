"""Unitary time evolution of the spin, from carrier flopping to damping.

Three single-ion panels:
  1. near-zero coupling: clean -cos(Omega t) carrier oscillations,
  2. strong coupling (eta = 0.54, thermal mode at nbar = 0.8): the spin
     entangles with the mode, oscillations lose contrast and partially
     revive,
  3. the same trace with the empirical decoherence envelope
     exp(-gamma t) at gamma * tau_s = 0.01.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import iontherm as it

OMEGA1 = 2 * np.pi * 0.724
OMEGA = 2 * np.pi * 0.73

space = it.build_space(1, 20)
mixture = it.thermal_initial_state(space, [0.8])
sz = it.sigma_z_diagonal(space)

fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)

# 1. carrier limit
ham = it.build_hamiltonian(space, [1e-8], [OMEGA1], OMEGA, 0.0)
spectrum = it.diagonalize(ham)
tau = spectrum.tau_s
times = np.linspace(0, 13 * tau, 1500)
carrier = it.evolve_expectation(spectrum, it.thermal_initial_state(space, [0.0]),
                                sz, times)
axes[0].plot(times / tau, carrier.values, lw=0.8)
axes[0].set_ylabel(r"$\langle\sigma_z\rangle$")
axes[0].set_title("carrier limit: persistent Rabi flopping")

# 2. strong coupling
ham = it.build_hamiltonian(space, [0.54], [OMEGA1], OMEGA, 0.0)
spectrum = it.diagonalize(ham)
trace = it.evolve_expectation(spectrum, mixture, sz, times)
mu_inf = it.diagonal_ensemble_average(spectrum, mixture, sz)
axes[1].plot(times / tau, trace.values, lw=0.8)
axes[1].axhline(mu_inf, color="k", ls="--", lw=0.8, label=r"$\mu_\infty$")
axes[1].legend(loc="upper right")
axes[1].set_ylabel(r"$\langle\sigma_z\rangle$")
axes[1].set_title("strong coupling: dephasing into the mode")

# 3. decoherence envelope
damped = it.apply_decoherence(trace, 0.01 / tau)
axes[2].plot(times / tau, trace.values, lw=0.8, alpha=0.4, label="unitary")
axes[2].plot(times / tau, damped.values, lw=0.8,
             label=r"$\gamma\,\tau_S = 0.01$")
axes[2].legend(loc="upper right")
axes[2].set_xlabel(r"$t/\tau_S$")
axes[2].set_ylabel(r"$\langle\sigma_z\rangle$")
axes[2].set_title("weak decoherence envelope")

fig.tight_layout()
fig.savefig("demo02_rabi_time_evolution.png", dpi=150)
print("wrote demo02_rabi_time_evolution.png")

mu_exp = it.window_time_average(times, trace.values, (tau, 13 * tau))
delta_exp = it.window_fluctuation(times, trace.values, (tau, 13 * tau))
print(f"strong coupling: mu_exp = {mu_exp:.4f} (diagonal ensemble "
      f"{mu_inf:.4f}), delta_exp = {delta_exp:.4f}")
