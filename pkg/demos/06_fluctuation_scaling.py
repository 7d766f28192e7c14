"""Scaling of infinite-time fluctuations with the participation ratio.

Pure product initial states (one and two phonons per mode) across
chains of 1..3 ions and a band of effective fields: the mean amplitude
of time fluctuations of the spin tracks 1/sqrt(IPR), the ergodicity
measure that counts participating eigenstates.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import iontherm as it
from iontherm import ergodicity

result = it.fluctuation_scaling_study(ergodicity.desk_scaling_grid())
print(f"fitted log-log slope: {result.slope:.3f} +- {result.slope_stderr:.3f} "
      f"(1/sqrt scaling corresponds to -0.5)")

fig, ax = plt.subplots(figsize=(5.5, 4))
for marker, k in (("o", 1), ("s", 2)):
    sel = [row for row in result.rows if row.label.endswith(f"k{k}")]
    ax.loglog([r.ipr for r in sel], [r.delta_infty for r in sel], marker,
              ms=4, mfc="none" if k == 2 else None,
              label=f"{k} phonon(s) per mode")
grid = np.geomspace(2, 30, 50)
ax.loglog(grid, np.exp(result.intercept) * grid**result.slope, "k--",
          lw=0.8, label=f"fit, slope {result.slope:.2f}")
ax.loglog(grid, np.exp(result.intercept) * grid**-0.5, "C3:", lw=0.8,
          label="slope -1/2")
ax.set_xlabel("IPR")
ax.set_ylabel(r"$\delta_\infty(\langle\sigma_z\rangle)$")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("demo06_fluctuation_scaling.png", dpi=150)
print("wrote demo06_fluctuation_scaling.png")
