"""Truncated spin (x) Fock product space and Hamiltonian assembly.

Conventions, fixed once here and relied on everywhere else:

* hbar = 1 and every frequency is angular, in rad/us. Energies therefore
  carry the same unit. Linear frequencies in MHz are converted by the
  configuration layer (omega = 2*pi*nu), never inside this package.
* The spin basis is ordered (down, up) with sigma_z|up> = +|up>, so the
  prepared |down> state has <sigma_z> = -1.
* The effective field places the prepared |down> state at +omega_z/2:
  it is the spin-excited state, and raising omega_z tunes its decay
  (spin flip plus phonon emission) across the mode resonances. This is
  what produces the interior maximum of the effective dimension near
  omega_z = omega_1 and the negative equilibrium bias of sigma_z.
* A flat basis index encodes (s, n_1, ..., n_N) with the spin as the most
  significant digit and mode 1 as the most significant Fock digit. This
  matches the natural ``kron(spin_op, D_1, ..., D_N)`` operator layout.

The coupled Hamiltonian is assembled in the form

    H = -(omega_z/2) sigma_z + sum_j omega_j n_j
        + (Omega/2) (sigma+ D + sigma- D^dag),

where D = exp[i sum_j eta_j (a_j^dag + a_j)] is the product of per-mode
displacement unitaries. The equivalent carrier form, with the bare spin
drive (Omega/2) sigma_x kept separate and the displacement replaced by
C = D - 1, is available for cross-checking.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceededError

__all__ = [
    "HilbertSpace",
    "HamiltonianMatrix",
    "InitialMixture",
    "build_space",
    "mode_displacement",
    "displacement_product",
    "build_hamiltonian",
    "thermal_initial_state",
    "energy_sorted_basis",
    "unperturbed_energies",
    "sigma_z_diagonal",
    "pauli_observable",
    "mixture_expectation",
]

DEFAULT_BUDGET_BYTES = 8 * 1024**3

SPIN_DOWN = 0
SPIN_UP = 1
_SPIN_SIGN = np.array([-1.0, 1.0])  # sigma_z eigenvalues in (down, up) order


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated product space of one spin and N bosonic modes.

    ``dim = 2 * (n_c + 1)**N``. ``spins`` and ``fock`` tabulate the
    decoded content of every flat index: ``spins[i]`` is 0 (down) or
    1 (up) and ``fock[i, j]`` is the occupation of mode j.
    """

    n_modes: int
    n_c: int
    dim: int
    spins: np.ndarray = field(repr=False)
    fock: np.ndarray = field(repr=False)

    @property
    def fock_dim(self):
        return self.n_c + 1

    @property
    def n_fock_states(self):
        return self.fock_dim**self.n_modes

    def encode(self, spin, occupations):
        """Flat index of the basis state |spin>|n_1>...|n_N>."""
        occupations = np.asarray(occupations)
        if occupations.shape != (self.n_modes,):
            raise ValueError("need one occupation per mode")
        if np.any(occupations < 0) or np.any(occupations > self.n_c):
            raise ValueError("occupation outside 0..n_c")
        if spin not in (SPIN_DOWN, SPIN_UP):
            raise ValueError("spin must be 0 (down) or 1 (up)")
        weights = self.fock_dim ** np.arange(self.n_modes - 1, -1, -1)
        return int(spin * self.n_fock_states + occupations @ weights)

    def decode(self, index):
        """Inverse of :meth:`encode`."""
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside 0..{self.dim - 1}")
        return int(self.spins[index]), tuple(int(n) for n in self.fock[index])


def build_space(n_modes, n_c, memory_budget_bytes=DEFAULT_BUDGET_BYTES):
    """Construct the truncated space, refusing sizes over the memory budget.

    The budget is compared against the dim x dim complex Hamiltonian that
    full diagonalization will need (16 bytes per entry).
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if n_c < 1:
        raise ValueError("Fock cutoff must be at least 1")
    fock_dim = n_c + 1
    dim = 2 * fock_dim**n_modes
    required = dim * dim * 16
    if memory_budget_bytes is not None and required > memory_budget_bytes:
        raise BudgetExceededError(
            f"dim={dim} needs {required} bytes for the dense Hamiltonian, "
            f"budget is {memory_budget_bytes}",
            required_bytes=required,
            budget_bytes=memory_budget_bytes,
        )

    idx = np.arange(dim)
    spins = (idx // fock_dim**n_modes).astype(np.int8)
    rem = idx % fock_dim**n_modes
    fock = np.empty((dim, n_modes), dtype=np.int32)
    for j in range(n_modes):
        fock[:, j] = (rem // fock_dim ** (n_modes - 1 - j)) % fock_dim
    return HilbertSpace(n_modes=n_modes, n_c=n_c, dim=dim, spins=spins, fock=fock)


def mode_displacement(n_c, eta):
    """Single-mode displacement unitary exp[i*eta*(a^dag + a)], truncated.

    Built by diagonalizing the truncated quadrature X = a^dag + a and
    exponentiating its spectrum, so the result is unitary on the truncated
    space to rounding. The analytic (Laguerre) matrix elements of the
    untruncated operator are recovered in the interior as n_c grows; rows
    and columns near the cutoff deviate from them by construction.

    ``eta`` may carry either sign: chain modes with a negative amplitude
    at the spin ion produce negative couplings, and the sign amounts to a
    per-mode phase gauge.
    """
    if not np.isfinite(eta):
        raise ValueError("eta must be finite")
    ladder = np.sqrt(np.arange(1, n_c + 1))
    quad = np.diag(ladder, 1) + np.diag(ladder, -1)
    lam, vecs = np.linalg.eigh(quad)
    return (vecs * np.exp(1j * eta * lam)) @ vecs.T


def displacement_product(space, etas):
    """Tensor product of per-mode displacement unitaries, modes 1..N."""
    etas = np.asarray(etas, dtype=float)
    if etas.shape != (space.n_modes,):
        raise ValueError("need one eta per mode")
    full = mode_displacement(space.n_c, etas[0])
    for eta in etas[1:]:
        full = np.kron(full, mode_displacement(space.n_c, eta))
    return full


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hermitian Hamiltonian with its parameter record."""

    matrix: np.ndarray = field(repr=False)
    space: HilbertSpace
    omega_z: float
    Omega: float
    mode_freqs: np.ndarray
    etas: np.ndarray


def build_hamiltonian(space, etas, mode_freqs, Omega, omega_z, assembly="displacement"):
    """Assemble the full coupled Hamiltonian on the truncated space.

    Parameters
    ----------
    space : HilbertSpace
    etas, mode_freqs : array_like
        Per-mode coupling parameters and angular frequencies.
    Omega, omega_z : float
        Spin coupling rate and effective magnetic field (rad/us).
    assembly : str
        "displacement" uses (Omega/2)(sigma+ D + h.c.); "carrier" keeps
        the bare (Omega/2) sigma_x term and couples through C = D - 1.
        Both produce the same matrix and exist for cross-validation.
    """
    etas = np.asarray(etas, dtype=float)
    mode_freqs = np.asarray(mode_freqs, dtype=float)
    if etas.shape != (space.n_modes,) or mode_freqs.shape != (space.n_modes,):
        raise ValueError(
            f"expected {space.n_modes} etas and mode frequencies, "
            f"got {etas.size} and {mode_freqs.size}"
        )
    if assembly not in ("displacement", "carrier"):
        raise ValueError(f"unknown assembly {assembly!r}")

    dim = space.dim
    half = space.n_fock_states
    ham = np.zeros((dim, dim), dtype=complex)
    ham[np.diag_indices(dim)] = unperturbed_energies(space, omega_z, mode_freqs)

    disp = displacement_product(space, etas)
    coupling = np.zeros((dim, dim), dtype=complex)
    if assembly == "displacement":
        # sigma+ = |up><down| lands in the (up, down) block.
        coupling[half:, :half] = 0.5 * Omega * disp
    else:
        coupling[half:, :half] = 0.5 * Omega * (disp - np.eye(half))
        carrier = 0.5 * Omega * np.eye(half)
        ham[half:, :half] += carrier
        ham[:half, half:] += carrier
    ham += coupling
    ham += coupling.conj().T

    return HamiltonianMatrix(
        matrix=ham,
        space=space,
        omega_z=omega_z,
        Omega=Omega,
        mode_freqs=mode_freqs,
        etas=etas,
    )


def unperturbed_energies(space, omega_z, mode_freqs):
    """Diagonal energies E0 of the uncoupled (Omega=0) Hamiltonian.

    The prepared (down) state carries +omega_z/2, the up state
    -omega_z/2: the bias makes the prepared spin the excited one.
    """
    mode_freqs = np.asarray(mode_freqs, dtype=float)
    return -0.5 * omega_z * _SPIN_SIGN[space.spins] + space.fock @ mode_freqs


def energy_sorted_basis(space, omega_z, mode_freqs):
    """Permutation of flat indices ascending in E0, stable on ties."""
    return np.argsort(unperturbed_energies(space, omega_z, mode_freqs), kind="stable")


@dataclass(frozen=True)
class InitialMixture:
    """Weighted set of uncoupled product states, truncated at the cutoff.

    ``weights[k]`` is the geometric thermal weight of the basis state with
    flat index ``indices[k]``; ``truncated_trace`` is their sum, which
    falls below 1 as soon as any nbar > 0.
    """

    weights: np.ndarray
    indices: np.ndarray
    nbars: np.ndarray
    spin: int
    truncated_trace: float

    @property
    def n_components(self):
        return self.weights.size

    def normalized_weights(self):
        return self.weights / self.truncated_trace


def thermal_initial_state(space, nbars, spin=SPIN_DOWN, weight_floor=0.0):
    """Thermal product state of the modes with the spin in a pure state.

    Every mode is an independent geometric (thermal) distribution,
    ``w(n) = nbar^n / (1+nbar)^(n+1)``, truncated at the cutoff. Zero-
    weight components are dropped; ``weight_floor`` optionally discards
    components below ``weight_floor * max(w)`` as well.
    """
    nbars = np.asarray(nbars, dtype=float)
    if nbars.shape != (space.n_modes,):
        raise ValueError("need one nbar per mode")
    if np.any(nbars < 0):
        raise ValueError("mean occupations must be nonnegative")
    if not 0.0 <= weight_floor < 1.0:
        raise ValueError("weight_floor must lie in [0, 1)")

    levels = np.arange(space.fock_dim)
    weights = np.ones(1)
    for nbar in nbars:
        if nbar == 0:
            per_mode = np.zeros(space.fock_dim)
            per_mode[0] = 1.0
        else:
            q = nbar / (1.0 + nbar)
            per_mode = (1.0 - q) * q**levels
        weights = np.outer(weights, per_mode).ravel()

    indices = spin * space.n_fock_states + np.arange(space.n_fock_states)
    keep = weights > 0
    if weight_floor > 0:
        keep &= weights >= weight_floor * weights.max()
    return InitialMixture(
        weights=weights[keep],
        indices=indices[keep],
        nbars=nbars,
        spin=spin,
        truncated_trace=float(weights[keep].sum()),
    )


def sigma_z_diagonal(space):
    """sigma_z expectation of every basis state (it is diagonal here)."""
    return _SPIN_SIGN[space.spins].copy()


def pauli_observable(space, axis):
    """Dense spin observable sigma_axis (x) identity on the modes."""
    # (down, up) basis order, so the off-diagonal signs of sigma_y are
    # swapped relative to the usual (up, down) textbook layout.
    paulis = {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
        "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    }
    if axis not in paulis:
        raise ValueError("axis must be 'x', 'y' or 'z'")
    return np.kron(paulis[axis], np.eye(space.n_fock_states))


def mixture_expectation(mixture, diagonal_observable, normalized=True):
    """Expectation of a product-basis-diagonal observable in the mixture."""
    vals = np.asarray(diagonal_observable)[mixture.indices]
    total = float(mixture.weights @ vals)
    return total / mixture.truncated_trace if normalized else total
