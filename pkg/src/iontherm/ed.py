"""Full exact diagonalization and unitary evolution of observables.

All observable dynamics run in the eigenbasis of the coupled Hamiltonian.
For a mixture rho(0) = sum_a w_a |phi_a><phi_a| of uncoupled basis states
with overlaps c_b(a) = <psi_b|phi_a>, the quantity

    R[b1, b2] = sum_a w_a conj(c_b1(a)) c_b2(a)

drives everything: <O(t)> is a phase-weighted double sum over R * O_eig,
the diagonal of R gives the infinite-time (diagonal-ensemble) average,
and the off-diagonal magnitudes give the infinite-time fluctuations.

Expectation values are by default renormalized by the truncated trace of
the initial mixture so that spin observables stay inside [-1, 1]; the raw
(unnormalized) trace values are kept alongside.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import EigensolverError, NumericalConsistencyError

__all__ = [
    "Spectrum",
    "TimeTrace",
    "FluctuationResult",
    "RevivalEstimate",
    "diagonalize",
    "overlap_matrix",
    "eigenbasis_coherences",
    "observable_in_eigenbasis",
    "default_time_grid",
    "evolve_expectation",
    "diagonal_ensemble_average",
    "infinite_time_fluctuations",
    "apply_decoherence",
    "predict_revival_time",
]


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a coupled Hamiltonian.

    ``states`` holds the eigenvectors as columns, ascending in energy.
    ``residual`` is max_k ||H v_k - E_k v_k|| / ||H||, computed exactly.
    """

    energies: np.ndarray
    states: np.ndarray = field(repr=False)
    residual: float
    space: object
    omega_z: float
    Omega: float
    mode_freqs: np.ndarray
    etas: np.ndarray

    @property
    def dim(self):
        return self.energies.size

    @property
    def tau_s(self):
        """Spin oscillation period 2*pi/Omega (us)."""
        return 2.0 * np.pi / self.Omega if self.Omega > 0 else np.inf


@dataclass(frozen=True)
class TimeTrace:
    """Sampled expectation values of one observable on a time grid."""

    times: np.ndarray
    values: np.ndarray
    raw_values: np.ndarray
    tau_s: float
    normalized: bool
    gamma_dec: float = 0.0


@dataclass(frozen=True)
class FluctuationResult:
    """Infinite-time fluctuation amplitude with gap-degeneracy metadata."""

    value: float
    n_pairs: int
    n_degenerate_groups: int
    n_zero_gap_pairs: int
    gap_tolerance: float


@dataclass(frozen=True)
class RevivalEstimate:
    """Order-of-magnitude revival time from the mode spacing."""

    tau_rev: float
    mean_spacing: float
    min_spacing: float
    max_spacing: float


def diagonalize(ham):
    """Dense Hermitian eigendecomposition of the full Hamiltonian."""
    matrix = ham.matrix
    try:
        energies, states = scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigensolverError(
            f"dense eigensolver failed on a {matrix.shape[0]}x{matrix.shape[0]} "
            f"matrix: {exc}",
            size=matrix.shape[0],
        ) from exc

    norm = float(np.max(np.abs(energies)))
    if norm == 0.0:
        residual = 0.0
    else:
        defect = matrix @ states - states * energies
        residual = float(np.linalg.norm(defect, axis=0).max() / norm)
    return Spectrum(
        energies=energies,
        states=states,
        residual=residual,
        space=ham.space,
        omega_z=ham.omega_z,
        Omega=ham.Omega,
        mode_freqs=ham.mode_freqs,
        etas=ham.etas,
    )


def overlap_matrix(spectrum, mixture):
    """Overlaps c_b(a) = <psi_b|phi_a>, one row per mixture component."""
    return spectrum.states[mixture.indices, :].conj()


def eigenbasis_coherences(spectrum, mixture, normalized=True):
    """R[b1,b2] = sum_a w_a conj(c_b1(a)) c_b2(a); Hermitian."""
    overlaps = overlap_matrix(spectrum, mixture)
    weights = mixture.normalized_weights() if normalized else mixture.weights
    return overlaps.conj().T @ (weights[:, None] * overlaps)


def observable_in_eigenbasis(spectrum, observable):
    """V^dag O V; a 1-D observable is interpreted as a diagonal."""
    observable = np.asarray(observable)
    states = spectrum.states
    if observable.ndim == 1:
        return states.conj().T @ (observable[:, None] * states)
    return states.conj().T @ observable @ states


def _eigenbasis_diagonal(spectrum, observable):
    observable = np.asarray(observable)
    states = spectrum.states
    if observable.ndim == 1:
        return (np.abs(states) ** 2 * observable[:, None]).sum(axis=0)
    return np.einsum("ib,ib->b", states.conj(), observable @ states).real


def default_time_grid(tau_s, transient_points=30, window_points=100, window=(1.0, 13.0)):
    """Transient grid on [0, tau_s) plus uniform points on the window.

    The window endpoints are in units of tau_s; defaults mirror the
    analysis interval [tau_s, 13 tau_s] with about 100 samples.
    """
    transient = np.linspace(0.0, window[0] * tau_s, transient_points, endpoint=False)
    analysis = np.linspace(window[0] * tau_s, window[1] * tau_s, window_points)
    return np.concatenate([transient, analysis])


def evolve_expectation(spectrum, mixture, observable, times, normalized=True,
                       chunk=4096):
    """Unitary evolution of <O(t)> over the given time grid.

    <O(t)> = sum_{b1,b2} R[b1,b2] O_eig[b1,b2] exp[-i (E_b2 - E_b1) t],
    evaluated as a phase-vector sandwich per time point. The imaginary
    residue must stay below 1e-10; anything larger raises.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ValueError("time grid is empty")
    kernel = eigenbasis_coherences(spectrum, mixture, normalized) * \
        observable_in_eigenbasis(spectrum, observable)

    values = np.empty(times.size, dtype=float)
    worst_imag = 0.0
    for start in range(0, times.size, chunk):
        t_block = times[start:start + chunk]
        phases = np.exp(-1j * np.outer(t_block, spectrum.energies))
        sandwich = (phases.conj() @ kernel * phases).sum(axis=1)
        worst_imag = max(worst_imag, float(np.max(np.abs(sandwich.imag))))
        values[start:start + chunk] = sandwich.real
    if worst_imag > 1e-10:
        raise NumericalConsistencyError(
            f"imaginary residue {worst_imag:.3e} in a real observable trace"
        )

    raw = values * mixture.truncated_trace if normalized else values
    return TimeTrace(
        times=times,
        values=values,
        raw_values=raw,
        tau_s=spectrum.tau_s,
        normalized=normalized,
    )


def diagonal_ensemble_average(spectrum, mixture, observable, normalized=True):
    """Infinite-time average sum_b rho_bb O_bb of the diagonal ensemble."""
    overlaps = overlap_matrix(spectrum, mixture)
    weights = mixture.normalized_weights() if normalized else mixture.weights
    populations = weights @ (np.abs(overlaps) ** 2)
    return float(populations @ _eigenbasis_diagonal(spectrum, observable))


def infinite_time_fluctuations(spectrum, mixture, observable, gap_tolerance=1e-9,
                               normalized=True):
    """Infinite-time RMS fluctuation of <O(t)> around its average.

    Off-diagonal amplitudes R[b1,b2]*O_eig[b1,b2] oscillate at the gap
    E_b2 - E_b1. Gaps equal within ``gap_tolerance`` add coherently and
    are grouped before squaring; distinct gaps add incoherently. Pairs
    with (near-)zero gap stem from degenerate energies, contribute a
    constant rather than a fluctuation, and are excluded (their count is
    reported).
    """
    amp = eigenbasis_coherences(spectrum, mixture, normalized) * \
        observable_in_eigenbasis(spectrum, observable)
    np.fill_diagonal(amp, 0.0)
    energies = spectrum.energies
    gaps = energies[None, :] - energies[:, None]
    live = amp != 0
    flat_amp = amp[live]
    flat_gap = gaps[live]
    if flat_amp.size == 0:
        return FluctuationResult(0.0, 0, 0, 0, gap_tolerance)

    order = np.argsort(flat_gap, kind="stable")
    sorted_gap = flat_gap[order]
    sorted_amp = flat_amp[order]
    # Chain gaps whose consecutive difference is within tolerance.
    new_group = np.empty(sorted_gap.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(sorted_gap) > gap_tolerance
    starts = np.flatnonzero(new_group)
    group_sums = np.add.reduceat(sorted_amp, starts)
    group_gaps = sorted_gap[starts]

    nonzero_gap = np.abs(group_gaps) > gap_tolerance
    variance = float(np.sum(np.abs(group_sums[nonzero_gap]) ** 2))
    sizes = np.diff(np.append(starts, sorted_gap.size))
    return FluctuationResult(
        value=float(np.sqrt(max(variance, 0.0))),
        n_pairs=int(flat_amp.size),
        n_degenerate_groups=int(np.sum((sizes > 1) & nonzero_gap)),
        n_zero_gap_pairs=int(sizes[~nonzero_gap].sum()),
        gap_tolerance=gap_tolerance,
    )


def apply_decoherence(trace, gamma_dec):
    """Damp a time trace with the empirical envelope exp(-gamma*t)."""
    if gamma_dec < 0:
        raise ValueError("decoherence rate must be nonnegative")
    envelope = np.exp(-gamma_dec * trace.times)
    return replace(
        trace,
        values=trace.values * envelope,
        raw_values=trace.raw_values * envelope,
        gamma_dec=gamma_dec,
    )


def predict_revival_time(mode_freqs):
    """Revival time 2*pi over the mean nearest-neighbor mode spacing.

    A finite-size diagnostic, not a fit: spin excitation recurrences
    appear when the coupled modes rephase, on the scale of the inverse
    mean mode spacing.
    """
    freqs = np.sort(np.asarray(mode_freqs, dtype=float))
    if freqs.size < 2:
        raise ValueError("revival time is undefined for a single mode")
    spacings = np.diff(freqs)
    mean = float(spacings.mean())
    tau_rev = 2.0 * np.pi / mean if mean > 0 else np.inf
    return RevivalEstimate(
        tau_rev=tau_rev,
        mean_spacing=mean,
        min_spacing=float(spacings.min()),
        max_spacing=float(spacings.max()),
    )
