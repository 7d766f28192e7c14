"""Microcanonical averages, density of states, and ETH diagnostics.

The microcanonical ensemble is a Gaussian energy window centered on the
mean energy of the initial state,

    P_b ~ exp[ -(E_b - Ebar)^2 / (dE/2)^2 ],

with Ebar and dE the energy mean and standard deviation of the initial
mixture under the full Hamiltonian. The exponent uses (dE/2)^2 verbatim,
not the conventional 2*sigma^2; when eigenstate expectation values are
smooth in energy the ensemble average is insensitive to this choice.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyShellError, NumericalConsistencyError

__all__ = [
    "MicrocanonicalSpec",
    "MicrocanonicalResult",
    "DensityOfStates",
    "EthProfile",
    "energy_moments",
    "microcanonical_weights",
    "microcanonical_average",
    "energy_shell_width",
    "density_of_states",
    "eth_diagnostics",
]


@dataclass(frozen=True)
class MicrocanonicalSpec:
    """Gaussian energy shell: center, width, normalized weights."""

    e_mean: float
    e_width: float
    weights: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class MicrocanonicalResult:
    """Microcanonical average plus the shell it was taken over."""

    value: float
    shell: MicrocanonicalSpec
    nearest_fallback: bool = False


@dataclass(frozen=True)
class DensityOfStates:
    """Gaussian-kernel smoothed level density on a uniform grid."""

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float

    def interpolate(self, energies):
        return np.interp(energies, self.grid, self.values)


@dataclass(frozen=True)
class EthProfile:
    """Matrix-element structure of an observable in the eigenbasis.

    ``diag_energies``/``diag_values`` scatter O_bb against E_b. The
    off-diagonal profile bins |O_b1b2|^2 * D(E) over the gap
    omega = E_b1 - E_b2 for mid-spectrum pairs; ``profile_width`` is the
    RMS width of that profile in omega. ``shell_widths`` holds W_a per
    initial-mixture component when a mixture was supplied.
    """

    diag_energies: np.ndarray
    diag_values: np.ndarray
    omega_bins: np.ndarray
    offdiag_profile: np.ndarray
    offdiag_counts: np.ndarray
    profile_width: float
    dos: DensityOfStates
    shell_widths: Optional[np.ndarray] = None


def energy_moments(mixture, ham):
    """Mean and standard deviation of the energy in the initial mixture.

    Both moments are taken over the truncated mixture, normalized by its
    trace: Ebar = tr(rho H)/tr(rho) and dE^2 = tr(rho H^2)/tr(rho) - Ebar^2.
    """
    weights = mixture.normalized_weights()
    idx = mixture.indices
    rows = ham.matrix[idx, :]
    first = float(weights @ rows[np.arange(idx.size), idx].real)
    second = float(weights @ np.sum(np.abs(rows) ** 2, axis=1))
    variance = second - first**2
    if variance < -1e-12:
        raise NumericalConsistencyError(
            f"negative energy variance {variance:.3e} in the initial mixture"
        )
    return first, math.sqrt(max(variance, 0.0))


def microcanonical_weights(energies, e_mean, e_width):
    """Normalized Gaussian shell weights over the spectrum."""
    energies = np.asarray(energies, dtype=float)
    raw = np.exp(-((energies - e_mean) ** 2) / (e_width / 2.0) ** 2)
    total = raw.sum()
    if not np.isfinite(total) or total <= 0:
        raise EmptyShellError(
            "all microcanonical weights underflowed; the energy width "
            f"{e_width:.3e} is too small for the level spacing"
        )
    return raw / total


def _eigenbasis_diagonal(spectrum, observable):
    observable = np.asarray(observable)
    states = spectrum.states
    if observable.ndim == 1:
        return (np.abs(states) ** 2 * observable[:, None]).sum(axis=0)
    return np.einsum("ib,ib->b", states.conj(), observable @ states).real


def microcanonical_average(spectrum, e_mean, e_width, observable):
    """Average O_bb over the Gaussian energy shell.

    A vanishing width degenerates to the nearest-eigenstate average
    (ties within rounding included), which is flagged in the result.
    """
    diag = _eigenbasis_diagonal(spectrum, observable)
    energies = spectrum.energies
    if e_width <= 0:
        distance = np.abs(energies - e_mean)
        best = distance.min()
        nearest = distance <= best * (1 + 1e-12) + 1e-300
        weights = nearest / nearest.sum()
        shell = MicrocanonicalSpec(e_mean, e_width, weights)
        return MicrocanonicalResult(float(weights @ diag), shell, True)
    weights = microcanonical_weights(energies, e_mean, e_width)
    shell = MicrocanonicalSpec(e_mean, e_width, weights)
    return MicrocanonicalResult(float(weights @ diag), shell, False)


def energy_shell_width(spectrum, basis_index):
    """Mean energy and width of one basis state over the eigenbasis.

    Moments of E_b under the participation probabilities |c_b(a)|^2.
    """
    prob = np.abs(spectrum.states[basis_index, :]) ** 2
    e_mean = float(prob @ spectrum.energies)
    variance = float(prob @ (spectrum.energies - e_mean) ** 2)
    return e_mean, math.sqrt(max(variance, 0.0))


def density_of_states(spectrum, bandwidth=None, n_grid=None, pad_sigmas=5.0):
    """Smoothed D(E) = sum_b delta(E - E_b) with a Gaussian kernel.

    Default bandwidth is three times the mean level spacing. The grid
    extends a few bandwidths past the spectrum so the kernel mass (one
    per state) is retained, and is fine enough to resolve the kernel.
    """
    energies = spectrum.energies
    span = float(energies[-1] - energies[0])
    if bandwidth is None:
        bandwidth = 3.0 * span / max(energies.size - 1, 1)
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if n_grid is None:
        n_grid = max(512, int(4.0 * span / bandwidth) + 1)
    lo = energies[0] - pad_sigmas * bandwidth
    hi = energies[-1] + pad_sigmas * bandwidth
    grid = np.linspace(lo, hi, n_grid)
    norm = 1.0 / (bandwidth * math.sqrt(2.0 * math.pi))
    values = np.empty(n_grid)
    for start in range(0, n_grid, 2048):
        block = grid[start:start + 2048]
        values[start:start + 2048] = norm * np.exp(
            -0.5 * ((block[:, None] - energies[None, :]) / bandwidth) ** 2
        ).sum(axis=1)
    return DensityOfStates(grid=grid, values=values, bandwidth=bandwidth)


def eth_diagnostics(spectrum, observable, mixture=None, n_bins=61,
                    central_fraction=0.6, dos_bandwidth=None):
    """Diagonal and off-diagonal matrix-element structure of an observable.

    Off-diagonal sampling is restricted to eigenstate pairs whose indices
    both lie in the central ``central_fraction`` of the spectrum, away
    from edge effects. The binned quantity is |O_b1b2|^2 * D(E), whose
    profile over omega has a typical width of twice the energy-shell
    width of the initial states.
    """
    from . import ed as _ed

    obs_eig = _ed.observable_in_eigenbasis(spectrum, observable)
    energies = spectrum.energies
    dim = energies.size
    diag_values = np.real(np.diag(obs_eig)).copy()

    dos = density_of_states(spectrum, bandwidth=dos_bandwidth)
    margin = int(round(0.5 * (1.0 - central_fraction) * dim))
    sel = slice(margin, dim - margin)
    sub = obs_eig[sel, sel]
    sub_e = energies[sel]
    pair_e = 0.5 * (sub_e[:, None] + sub_e[None, :])
    pair_omega = sub_e[:, None] - sub_e[None, :]
    weight = np.abs(sub) ** 2 * dos.interpolate(pair_e)
    off = ~np.eye(sub_e.size, dtype=bool)
    omega_flat = pair_omega[off]
    weight_flat = weight[off]

    omega_max = float(np.abs(omega_flat).max()) if omega_flat.size else 1.0
    edges = np.linspace(-omega_max, omega_max, n_bins + 1)
    counts, _ = np.histogram(omega_flat, bins=edges)
    sums, _ = np.histogram(omega_flat, bins=edges, weights=weight_flat)
    with np.errstate(invalid="ignore"):
        profile = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    centers = 0.5 * (edges[:-1] + edges[1:])

    total = profile.sum()
    if total > 0:
        profile_width = float(np.sqrt((profile @ centers**2) / total))
    else:
        profile_width = 0.0

    shell_widths = None
    if mixture is not None:
        shell_widths = np.array([
            energy_shell_width(spectrum, idx)[1] for idx in mixture.indices
        ])

    return EthProfile(
        diag_energies=energies.copy(),
        diag_values=diag_values,
        omega_bins=centers,
        offdiag_profile=profile,
        offdiag_counts=counts,
        profile_width=profile_width,
        dos=dos,
        shell_widths=shell_widths,
    )
