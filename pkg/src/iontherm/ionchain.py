"""Geometry and axial normal modes of a linear ion chain.

Everything here is expressed in the standard dimensionless units of the
linear Coulomb crystal: equilibrium coordinates are measured in the
Coulomb length scale of the axial trap, and mode frequencies are returned
as multiples of the axial center-of-mass (COM) frequency ``omega1``.
Angular frequencies are used throughout (rad/us).

The per-mode spin-phonon coupling strengths (Lamb-Dicke parameters) are
derived from the COM value ``eta1`` via

    eta_j = M_j * sqrt(omega_1 / omega_j) * eta1,

where ``M_j`` is the mode amplitude at the spin-carrying ion, normalized
to the COM mode amplitude at the same ion. All ions are treated as having
equal mass.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailureError

__all__ = [
    "IonChain",
    "build_chain",
    "equilibrium_positions",
    "normal_modes",
    "lamb_dicke_parameters",
    "effective_lamb_dicke",
]

MAX_IONS = 8


@dataclass(frozen=True)
class IonChain:
    """Normal-mode data of an N-ion linear chain with a single spin.

    Attributes
    ----------
    n_ions : int
        Number of ions (1..8).
    omega1 : float
        Angular frequency of the axial COM mode (rad/us).
    positions : np.ndarray
        Dimensionless equilibrium coordinates, strictly increasing.
    mode_freqs : np.ndarray
        Angular mode frequencies (rad/us), ascending; entry 0 is omega1.
    mode_vectors : np.ndarray
        Orthonormal mode vectors as columns; column 0 is the COM mode.
    spin_ion_index : int
        1-based position of the spin-carrying ion in the chain.
    eta1 : float
        Lamb-Dicke parameter of the COM mode.
    etas : np.ndarray
        Lamb-Dicke parameter of every mode; etas[0] == eta1 exactly.
    """

    n_ions: int
    omega1: float
    positions: np.ndarray
    mode_freqs: np.ndarray
    mode_vectors: np.ndarray
    spin_ion_index: int
    eta1: float
    etas: np.ndarray


def equilibrium_positions(n_ions, tol=1e-13, max_iter=200):
    """Solve the axial force-balance equations for the chain geometry.

    Each coordinate satisfies
    ``u_i - sum_{k<i} 1/(u_i-u_k)^2 + sum_{k>i} 1/(u_k-u_i)^2 = 0``.
    A damped Newton iteration is used, seeded with uniformly spaced ions;
    the Jacobian of the force balance is the axial Hessian, which is
    reused by :func:`normal_modes`.

    Parameters
    ----------
    n_ions : int
        Ion count, between 1 and 8.
    tol : float
        Target max-norm of the force residual.
    max_iter : int
        Iteration cap before declaring failure.

    Returns
    -------
    np.ndarray
        Strictly increasing coordinates, symmetric about zero.
    """
    if not 1 <= n_ions <= MAX_IONS:
        raise ValueError(f"n_ions must be in 1..{MAX_IONS}, got {n_ions}")
    if n_ions == 1:
        return np.zeros(1)

    u = np.arange(n_ions, dtype=float) - (n_ions - 1) / 2.0
    resid = np.inf
    for _ in range(max_iter):
        force = _force_balance(u)
        resid = np.max(np.abs(force))
        if resid <= tol:
            break
        step = np.linalg.solve(_axial_hessian(u), force)
        # Backtrack if the full Newton step increases the residual.
        scale = 1.0
        for _ in range(30):
            trial = u - scale * step
            if np.max(np.abs(_force_balance(trial))) < resid:
                break
            scale *= 0.5
        u = u - scale * step
    else:
        raise SolverFailureError(
            f"equilibrium positions did not converge for N={n_ions} "
            f"(residual {resid:.3e})",
            residual=resid,
        )

    # The physical solution is antisymmetric; project out rounding drift.
    u = 0.5 * (u - u[::-1])
    final = np.max(np.abs(_force_balance(u)))
    if final > 1e-12:
        raise SolverFailureError(
            f"force-balance residual {final:.3e} above 1e-12 for N={n_ions}",
            residual=final,
        )
    return u


def _force_balance(u):
    n = u.size
    diff = u[:, None] - u[None, :]
    with np.errstate(divide="ignore"):
        inv2 = np.where(np.eye(n, dtype=bool), 0.0, diff ** (-2.0))
    # Repulsion from ions to the left pushes right, and vice versa.
    lower = np.tril(inv2, k=-1).sum(axis=1)
    upper = np.triu(inv2, k=1).sum(axis=1)
    return u - lower + upper


def _axial_hessian(u):
    """Dimensionless Hessian of the axial potential at coordinates u."""
    n = u.size
    diff = np.abs(u[:, None] - u[None, :])
    with np.errstate(divide="ignore"):
        inv3 = np.where(np.eye(n, dtype=bool), 0.0, diff ** (-3.0))
    hess = -2.0 * inv3
    np.fill_diagonal(hess, 1.0 + 2.0 * inv3.sum(axis=1))
    return hess


def normal_modes(n_ions, omega1, positions=None):
    """Axial normal modes of the equal-mass chain.

    Parameters
    ----------
    n_ions : int
        Ion count.
    omega1 : float
        Angular COM frequency (rad/us) that sets the overall scale.
    positions : np.ndarray, optional
        Precomputed equilibrium coordinates; solved on demand otherwise.

    Returns
    -------
    (np.ndarray, np.ndarray)
        Ascending angular frequencies ``omega_j = omega1 * sqrt(lambda_j)``
        and the orthonormal eigenvectors of the axial Hessian as columns.
        The sign of each column is fixed so its largest-magnitude
        component is positive, which makes the COM column all-positive.
    """
    if omega1 <= 0:
        raise ValueError("omega1 must be positive")
    if positions is None:
        positions = equilibrium_positions(n_ions)
    if n_ions == 1:
        return np.array([omega1]), np.ones((1, 1))

    lam, vecs = np.linalg.eigh(_axial_hessian(positions))
    flip = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(n_ions)] < 0
    vecs = np.where(flip[None, :], -vecs, vecs)
    return omega1 * np.sqrt(lam), vecs


def lamb_dicke_parameters(mode_freqs, mode_vectors, eta1, spin_ion_index=1):
    """Per-mode Lamb-Dicke parameters from the COM value.

    ``eta_j = M_j * sqrt(omega_1/omega_j) * eta1`` with
    ``M_j = b_j(i_s) / b_1(i_s)`` evaluated at the spin-carrying ion, so
    the COM entry reproduces ``eta1`` exactly.
    """
    n = len(mode_freqs)
    if not 1 <= spin_ion_index <= n:
        raise ValueError(f"spin_ion_index must be in 1..{n}")
    if eta1 < 0:
        raise ValueError("eta1 must be nonnegative")
    row = np.asarray(mode_vectors)[spin_ion_index - 1, :]
    amp_ratio = row / row[0]
    etas = amp_ratio * np.sqrt(mode_freqs[0] / np.asarray(mode_freqs)) * eta1
    etas[0] = eta1
    return etas


def effective_lamb_dicke(eta, nbar):
    """Thermally enhanced coupling ``eta * sqrt(2*nbar + 1)``."""
    nbar = np.asarray(nbar, dtype=float)
    if np.any(nbar < 0):
        raise ValueError("mean occupation must be nonnegative")
    return eta * np.sqrt(2.0 * nbar + 1.0)


def build_chain(n_ions, omega1, eta1, spin_ion_index=1):
    """Assemble the full :class:`IonChain` record for given trap settings."""
    positions = equilibrium_positions(n_ions)
    freqs, vecs = normal_modes(n_ions, omega1, positions)
    etas = lamb_dicke_parameters(freqs, vecs, eta1, spin_ion_index)
    return IonChain(
        n_ions=n_ions,
        omega1=omega1,
        positions=positions,
        mode_freqs=freqs,
        mode_vectors=vecs,
        spin_ion_index=spin_ion_index,
        eta1=eta1,
        etas=etas,
    )
