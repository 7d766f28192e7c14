"""Do time averages look microcanonical? A three-ion scan.

For each effective field, the finite-window time average of the trace
is compared with the diagonal-ensemble (infinite-time) average and the
Gaussian-shell microcanonical average built from the initial state's
energy moments. Points within 0.1 of the microcanonical value count as
thermalized; the agreement breaks down once the spin decouples at large
omega_z.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import iontherm as it

chain = it.build_chain(3, 2 * np.pi * 0.707, 0.54)
space = it.build_space(3, 6)
mixture = it.thermal_initial_state(space, [0.6, 1.1, 0.9])
sz = it.sigma_z_diagonal(space)
big_omega = 2 * np.pi * 1.28

factors = np.linspace(0.2, 4.0, 14)
mu_exp, mu_inf, mu_micro, deffs = [], [], [], []
for factor in factors:
    ham = it.build_hamiltonian(space, chain.etas, chain.mode_freqs,
                               big_omega, factor * chain.mode_freqs[0])
    spectrum = it.diagonalize(ham)
    tau = spectrum.tau_s
    times = it.default_time_grid(tau)
    trace = it.evolve_expectation(spectrum, mixture, sz, times)
    mu_exp.append(it.window_time_average(times, trace.values,
                                         (tau, 13 * tau)))
    mu_inf.append(it.diagonal_ensemble_average(spectrum, mixture, sz))
    e_mean, e_width = it.energy_moments(mixture, ham)
    mu_micro.append(it.microcanonical_average(spectrum, e_mean, e_width,
                                              sz).value)
    deffs.append(it.effective_dimension(spectrum, mixture))

points = list(zip(mu_exp, mu_micro, deffs))
kept = it.postselect_thermalized(points, threshold=0.1)
print(f"{len(kept)} of {len(points)} points within 0.1 of the "
      f"microcanonical average")

fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.5, 5), sharex=True)
top.plot(factors, mu_exp, "o-", ms=3, label=r"$\mu_{\rm exp}$ (window)")
top.plot(factors, mu_inf, "s--", ms=3, label=r"$\mu_\infty$ (diag. ens.)")
top.plot(factors, mu_micro, "k:", label=r"$\mu_{\rm micro}$")
top.set_ylabel(r"$\langle\sigma_z\rangle$ averages")
top.legend(fontsize=8)
bottom.plot(factors, np.abs(np.array(mu_inf) - np.array(mu_micro)), "o-",
            ms=3)
bottom.axhline(0.1, color="C3", ls="--", label="0.1 criterion")
bottom.set_xlabel(r"$\omega_z/\omega_1$")
bottom.set_ylabel(r"$|\mu_\infty - \mu_{\rm micro}|$")
bottom.legend(fontsize=8)
fig.tight_layout()
fig.savefig("demo05_thermalization.png", dpi=150)
print("wrote demo05_thermalization.png")
