"""Finite-size revivals of the spin excitation in a two-ion chain.

With two modes the excitation leaks into the environment and coherently
rephases on the scale of the inverse mode spacing; the revival shows up
as an excursion of the trace away from its infinite-time average well
beyond the typical fluctuation level.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import iontherm as it

chain = it.build_chain(2, 2 * np.pi * 0.71, 0.54)
space = it.build_space(2, 12)
ham = it.build_hamiltonian(space, chain.etas, chain.mode_freqs,
                           2 * np.pi * 0.94, 0.0)
spectrum = it.diagonalize(ham)
mixture = it.thermal_initial_state(space, [1.0, 1.0])
sz = it.sigma_z_diagonal(space)

estimate = it.predict_revival_time(chain.mode_freqs)
tau = spectrum.tau_s
times = np.linspace(0, 13 * tau, 3000)
trace = it.evolve_expectation(spectrum, mixture, sz, times)
mu_inf = it.diagonal_ensemble_average(spectrum, mixture, sz)
delta_exp = it.window_fluctuation(times, trace.values, (tau, 13 * tau))

fig, ax = plt.subplots(figsize=(7, 3.2))
ax.plot(times / tau, trace.values, lw=0.8)
ax.axhline(mu_inf, color="k", ls="--", lw=0.8, label=r"$\mu_\infty$")
ax.axhspan(mu_inf - delta_exp, mu_inf + delta_exp, color="k", alpha=0.12,
           label=r"$\mu_\infty \pm \delta_{\rm exp}$")
ax.axvline(estimate.tau_rev / tau, color="C3", ls=":",
           label=r"$\tau_{\rm rev}$ estimate")
ax.set_xlabel(r"$t/\tau_S$")
ax.set_ylabel(r"$\langle\sigma_z\rangle$")
ax.legend(loc="upper right", fontsize=8)
fig.tight_layout()
fig.savefig("demo03_revivals.png", dpi=150)
print("wrote demo03_revivals.png")

deviation = np.where(times > tau, np.abs(trace.values - mu_inf), 0.0)
peak = int(np.argmax(deviation))
print(f"tau_rev estimate {estimate.tau_rev:.2f} us; strongest post-transient "
      f"excursion at t = {times[peak]:.2f} us = "
      f"{times[peak] / estimate.tau_rev:.2f} tau_rev")
print(f"excursion size {deviation[peak]:.3f} vs delta_exp {delta_exp:.3f}")
