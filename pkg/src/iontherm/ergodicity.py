"""Ergodicity measures: IPR, effective dimension, and their estimators.

The inverse participation ratio of an uncoupled basis state counts how
many energy eigenstates of the coupled Hamiltonian participate in it,

    IPR(phi_a) = 1 / sum_b |c_b(a)|^4 ,

and the effective dimension of a thermal mixture averages the component
IPRs with the mixture weights renormalized over the truncated set,

    D_eff = sum_a w~_a IPR(a) .

This normalization makes D_eff = 1 exact for an uncoupled Hamiltonian,
no matter how mixed the initial state is.

Two estimators accompany the exact computation: a windowed (band-matrix)
diagonalization that grows the number of retained energy-sorted states
until D_eff stops moving, and a truncation extrapolation that turns the
dependence on the Fock cutoff into a systematic uncertainty.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import ed, hilbert, ionchain

__all__ = [
    "ErgodicityReport",
    "TruncationEstimate",
    "ScalingPoint",
    "ScalingRow",
    "ScalingStudyResult",
    "ipr",
    "effective_dimension",
    "component_iprs",
    "windowed_deff",
    "truncation_uncertainty",
    "fluctuation_scaling_study",
    "desk_scaling_grid",
    "fit_loglog_slope",
]


@dataclass(frozen=True)
class ErgodicityReport:
    """Per-component IPRs and the aggregated effective dimension.

    ``n_states`` and ``relative_change`` document the windowed estimator's
    convergence; ``window_full`` flags that the window reached the full
    dimension, in which case the value is exact.
    """

    ipr_per_component: np.ndarray
    deff: float
    n_states: int
    relative_change: float
    window_full: bool


@dataclass(frozen=True)
class TruncationEstimate:
    """Cutoff extrapolation: bounds, midpoint, systematic uncertainty."""

    deff: float
    sigma_sys: float
    bound_last: float
    bound_extrapolated: float


def ipr(spectrum, basis_index):
    """Inverse participation ratio of one uncoupled basis state."""
    row = spectrum.states[basis_index, :]
    return float(1.0 / np.sum(np.abs(row) ** 4))


def component_iprs(spectrum, mixture):
    """IPR of every component of a mixture, in component order."""
    rows = np.abs(spectrum.states[mixture.indices, :]) ** 4
    return 1.0 / rows.sum(axis=1)


def effective_dimension(spectrum, mixture):
    """Weighted effective dimension of the truncated mixture.

    Numerator and denominator share one summation path so an uncoupled
    spectrum (every IPR exactly 1) yields exactly 1.0.
    """
    weights = mixture.weights
    iprs = component_iprs(spectrum, mixture)
    return float((weights @ iprs) / (weights @ np.ones_like(iprs)))


def windowed_deff(ham, mixture, initial_window=1000, step=1000, tolerance=0.01):
    """Estimate D_eff from windows of the energy-sorted band matrix.

    In the basis ordered by unperturbed energy the Hamiltonian is banded:
    a basis state only mixes with states of nearby E0. For each mixture
    component, the submatrix of the ``n_states`` sorted basis states
    centered on the component (clipped at the spectrum edges, keeping the
    window size) is diagonalized and the component's IPR read off. The
    window grows by ``step`` until the aggregate D_eff changes by less
    than ``tolerance`` relatively. A window reaching the full dimension
    falls back to the exact computation and is flagged, not an error.
    """
    if initial_window < 2:
        raise ValueError("initial window must be at least 2")
    if step < 1:
        raise ValueError("step must be positive")

    space = ham.space
    dim = space.dim
    perm = hilbert.energy_sorted_basis(space, ham.omega_z, ham.mode_freqs)
    rank = np.empty(dim, dtype=np.int64)
    rank[perm] = np.arange(dim)
    positions = rank[mixture.indices]
    weights = mixture.weights
    weight_total = math.fsum(weights)
    sorted_ham = ham.matrix[np.ix_(perm, perm)]

    def exact_report():
        spectrum = ed.diagonalize(ham)
        iprs = component_iprs(spectrum, mixture)
        return ErgodicityReport(
            ipr_per_component=iprs,
            deff=effective_dimension(spectrum, mixture),
            n_states=dim,
            relative_change=0.0,
            window_full=True,
        )

    n_states = int(initial_window)
    previous = None
    while True:
        if n_states >= dim:
            return exact_report()
        scratch = np.empty((n_states, n_states), dtype=complex)
        iprs = np.empty(positions.size)
        for k, pos in enumerate(positions):
            lo = int(np.clip(pos - n_states // 2, 0, dim - n_states))
            np.copyto(scratch, sorted_ham[lo:lo + n_states, lo:lo + n_states])
            _, vecs = scipy.linalg.eigh(scratch, overwrite_a=True, check_finite=False)
            iprs[k] = 1.0 / np.sum(np.abs(vecs[pos - lo, :]) ** 4)
        deff = math.fsum(weights * iprs) / weight_total

        if previous is not None:
            change = abs(deff - previous) / abs(previous)
            if change <= tolerance:
                return ErgodicityReport(
                    ipr_per_component=iprs,
                    deff=deff,
                    n_states=n_states,
                    relative_change=change,
                    window_full=False,
                )
        previous = deff
        n_states += step


def truncation_uncertainty(n_truncs, deffs):
    """Systematic uncertainty of D_eff from its cutoff dependence.

    The last value is one bound; a linear extrapolation of the last two
    points one step further is the second. The midpoint is the final
    value and a quarter of the bound separation the uncertainty.
    """
    n_truncs = np.asarray(n_truncs, dtype=float)
    deffs = np.asarray(deffs, dtype=float)
    if n_truncs.size != deffs.size:
        raise ValueError("series lengths differ")
    if n_truncs.size < 2:
        raise ValueError("need at least two truncation levels")
    if np.any(np.diff(n_truncs) <= 0):
        raise ValueError("truncation levels must be ascending")

    bound_last = float(deffs[-1])
    slope = (deffs[-1] - deffs[-2]) / (n_truncs[-1] - n_truncs[-2])
    bound_extrapolated = float(deffs[-1] + slope * (n_truncs[-1] - n_truncs[-2]))
    return TruncationEstimate(
        deff=0.5 * (bound_last + bound_extrapolated),
        sigma_sys=0.25 * abs(bound_last - bound_extrapolated),
        bound_last=bound_last,
        bound_extrapolated=bound_extrapolated,
    )


@dataclass(frozen=True)
class ScalingPoint:
    """One instance of the fluctuation-scaling grid: a pure initial state."""

    n_ions: int
    n_c: int
    omega1: float
    Omega: float
    omega_z: float
    eta1: float
    phonons_per_mode: int = 1
    spin_ion_index: int = 1
    label: str = ""


@dataclass(frozen=True)
class ScalingRow:
    label: str
    ipr: float
    deff: float
    delta_infty: float
    error: Optional[str] = None


@dataclass(frozen=True)
class ScalingStudyResult:
    rows: list
    slope: float
    intercept: float
    slope_stderr: float


def _scaling_instance(point):
    chain = ionchain.build_chain(
        point.n_ions, point.omega1, point.eta1, point.spin_ion_index
    )
    space = hilbert.build_space(point.n_ions, point.n_c)
    ham = hilbert.build_hamiltonian(
        space, chain.etas, chain.mode_freqs, point.Omega, point.omega_z
    )
    spectrum = ed.diagonalize(ham)
    occupations = np.full(point.n_ions, point.phonons_per_mode)
    index = space.encode(hilbert.SPIN_DOWN, occupations)
    mixture = hilbert.InitialMixture(
        weights=np.array([1.0]),
        indices=np.array([index]),
        nbars=occupations.astype(float),
        spin=hilbert.SPIN_DOWN,
        truncated_trace=1.0,
    )
    value = ipr(spectrum, index)
    fluct = ed.infinite_time_fluctuations(
        spectrum, mixture, hilbert.sigma_z_diagonal(space)
    )
    return value, fluct.value


def fluctuation_scaling_study(points, min_points=2):
    """Correlate infinite-time fluctuations with the IPR over a grid.

    Each grid point is an independent full-ED instance with a pure
    product initial state; for a pure state D_eff equals the IPR. Failed
    instances are kept as flagged rows and excluded from the fit of
    log(delta_infty) against log(IPR).
    """
    rows = []
    for point in points:
        label = point.label or (
            f"N{point.n_ions}_nc{point.n_c}_wz{point.omega_z:.6g}"
            f"_k{point.phonons_per_mode}"
        )
        try:
            value, delta = _scaling_instance(point)
            rows.append(ScalingRow(label, value, value, delta))
        except Exception as exc:  # noqa: BLE001 - per-row isolation
            rows.append(ScalingRow(label, math.nan, math.nan, math.nan, str(exc)))

    good = [r for r in rows if r.error is None and r.delta_infty > 0]
    if len(good) < min_points:
        raise ValueError(
            f"scaling fit needs at least {min_points} valid instances, "
            f"got {len(good)}"
        )
    log_ipr = np.log([r.ipr for r in good])
    log_delta = np.log([r.delta_infty for r in good])
    slope, intercept, stderr = fit_loglog_slope(log_ipr, log_delta)
    return ScalingStudyResult(rows=rows, slope=slope, intercept=intercept,
                              slope_stderr=stderr)


def fit_loglog_slope(x, y):
    """Least-squares line with the standard error of its slope."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("fit needs at least two points")
    sxx = np.sum((x - x.mean()) ** 2)
    if sxx == 0:
        raise ValueError("slope undefined: all abscissae identical")
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    dof = x.size - 2
    if dof > 0:
        residuals = y - (intercept + slope * x)
        stderr = float(np.sqrt(np.sum(residuals**2) / dof / sxx))
    else:
        stderr = math.nan
    return slope, intercept, stderr


def desk_scaling_grid(omega1=2 * np.pi * 0.7, eta1=0.54, occupancies=(1, 2)):
    """Desk-scale grid for the fluctuation-scaling study.

    Three chain sizes with cutoffs and spin coupling rates chosen so each
    instance stays a full-ED problem, swept over a band of effective
    fields omega_z = Omega/4 .. Omega/2 in steps of Omega/20, for pure
    initial states with a fixed phonon count per mode.
    """
    settings = [
        (1, 20, 2 * np.pi * 0.7),
        (2, 10, 2 * np.pi * 1.0),
        (3, 6, 2 * np.pi * 1.3),
    ]
    points = []
    for n_ions, n_c, big_omega in settings:
        for stepcount in range(5, 11):
            omega_z = big_omega * stepcount / 20.0
            for k in occupancies:
                points.append(ScalingPoint(
                    n_ions=n_ions,
                    n_c=n_c,
                    omega1=omega1,
                    Omega=big_omega,
                    omega_z=omega_z,
                    eta1=eta1,
                    phonons_per_mode=k,
                ))
    return points
