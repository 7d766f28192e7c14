"""Desk-scale exact-diagonalization laboratory for spin-boson thermalization.

A single spin coupled to the axial phonon modes of a linear ion chain is
built, diagonalized, and evolved; ergodicity measures (IPR, effective
dimension), microcanonical averages, time-fluctuation statistics, and
ETH diagnostics quantify how the isolated system thermalizes.
"""

from . import ed, ensembles, ergodicity, hilbert, ionchain, stats
from .ed import (
    apply_decoherence,
    default_time_grid,
    diagonal_ensemble_average,
    diagonalize,
    evolve_expectation,
    infinite_time_fluctuations,
    predict_revival_time,
)
from .ensembles import (
    density_of_states,
    energy_moments,
    energy_shell_width,
    eth_diagnostics,
    microcanonical_average,
)
from .ergodicity import (
    effective_dimension,
    fluctuation_scaling_study,
    ipr,
    truncation_uncertainty,
    windowed_deff,
)
from .hilbert import (
    build_hamiltonian,
    build_space,
    energy_sorted_basis,
    mode_displacement,
    sigma_z_diagonal,
    thermal_initial_state,
)
from .ionchain import build_chain, effective_lamb_dicke, equilibrium_positions, normal_modes
from .stats import (
    bootstrap_uncertainty,
    postselect_thermalized,
    simulate_projective_sampling,
    window_fluctuation,
    window_time_average,
)

__version__ = "0.1.0"
