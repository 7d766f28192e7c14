import numpy as np
import pytest

import iontherm as it

TWO_PI = 2 * np.pi


@pytest.fixture(scope="session")
def rabi_instance():
    """N=1 strong-coupling instance (omega1=0.724, Omega=0.73, wz=0)."""
    space = it.build_space(1, 20)
    ham = it.build_hamiltonian(space, [0.54], [TWO_PI * 0.724], TWO_PI * 0.73, 0.0)
    spectrum = it.diagonalize(ham)
    mixture = it.thermal_initial_state(space, [0.8])
    return space, ham, spectrum, mixture


@pytest.fixture(scope="session")
def two_ion_instance():
    """N=2 strong-coupling instance (omega1=0.71, Omega=0.94, wz=0)."""
    chain = it.build_chain(2, TWO_PI * 0.71, 0.54)
    space = it.build_space(2, 10)
    ham = it.build_hamiltonian(
        space, chain.etas, chain.mode_freqs, TWO_PI * 0.94, 0.0
    )
    spectrum = it.diagonalize(ham)
    mixture = it.thermal_initial_state(space, [0.4, 0.6])
    return space, ham, spectrum, mixture


@pytest.fixture(scope="session")
def three_ion_instance():
    """N=3 instance at the experimental parameters, desk cutoff n_c=6."""
    chain = it.build_chain(3, TWO_PI * 0.707, 0.54)
    space = it.build_space(3, 6)
    ham = it.build_hamiltonian(
        space, chain.etas, chain.mode_freqs, TWO_PI * 1.28,
        0.8 * chain.mode_freqs[0],
    )
    spectrum = it.diagonalize(ham)
    mixture = it.thermal_initial_state(space, [0.6, 1.1, 0.9])
    return space, ham, spectrum, mixture
