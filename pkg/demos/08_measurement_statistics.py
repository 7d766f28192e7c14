"""From clean expectation values to experiment-like statistics.

A strong-coupling trace is degraded with binomial projection noise
(500 repetitions per point, the experimental budget), then the analysis
window [tau_s, 13 tau_s] is reduced to its time average and fluctuation
amplitude with bootstrap error bars.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import iontherm as it

space = it.build_space(1, 20)
ham = it.build_hamiltonian(space, [0.54], [2 * np.pi * 0.724],
                           2 * np.pi * 0.73, 0.0)
spectrum = it.diagonalize(ham)
mixture = it.thermal_initial_state(space, [0.8])
sz = it.sigma_z_diagonal(space)

tau = spectrum.tau_s
times = it.default_time_grid(tau)
trace = it.evolve_expectation(spectrum, mixture, sz, times)
noisy = it.simulate_projective_sampling(trace.values, repetitions=500, seed=7)

window = (tau, 13 * tau)
stats = it.bootstrap_uncertainty(times, noisy, window, resamples=20_000,
                                 seed=7)
clean_mu = it.window_time_average(times, trace.values, window)
clean_delta = it.window_fluctuation(times, trace.values, window)
print(f"clean window stats:   mu = {clean_mu:+.4f}, delta = {clean_delta:.4f}")
print(f"sampled window stats: mu = {stats.mu_exp:+.4f} +- {stats.boot_std_mu:.4f}, "
      f"delta = {stats.delta_exp:.4f} +- {stats.boot_std_delta:.4f} "
      f"({stats.n_samples} samples, {stats.resamples} resamples)")

fig, ax = plt.subplots(figsize=(7, 3.2))
ax.plot(times / tau, trace.values, lw=0.8, label="exact")
ax.plot(times / tau, noisy, ".", ms=3, alpha=0.6, label="r = 500 sampling")
ax.axvspan(1, 13, color="k", alpha=0.06, label="analysis window")
ax.errorbar([14.2], [stats.mu_exp], yerr=[stats.boot_std_delta], fmt="s",
            ms=4, capsize=3, label=r"$\mu_{\rm exp} \pm \delta$ err")
ax.set_xlabel(r"$t/\tau_S$")
ax.set_ylabel(r"$\langle\sigma_z\rangle$")
ax.legend(fontsize=8, loc="lower right")
fig.tight_layout()
fig.savefig("demo08_measurement_statistics.png", dpi=150)
print("wrote demo08_measurement_statistics.png")
