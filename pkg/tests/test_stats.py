import numpy as np
import pytest

import iontherm as it
from iontherm import hilbert, stats

TWO_PI = 2 * np.pi


def test_window_average_constant():
    times = np.linspace(0, 10, 50)
    assert it.window_time_average(times, np.full(50, 0.37), (2, 8)) == 0.37


def test_window_average_cosine_periods():
    # Uniform sampling over whole periods averages to zero up to 1/S.
    s = 200
    times = np.arange(s) / s * 6 * np.pi
    values = np.cos(times)
    avg = it.window_time_average(times, values, (0, 100))
    assert abs(avg) <= 1.0 / s


def test_window_average_matches_analytic_rabi():
    # Carrier-limit trace against the closed-form cosine average.
    space = hilbert.build_space(1, 3)
    big_omega = TWO_PI * 0.73
    ham = hilbert.build_hamiltonian(space, [1e-9], [TWO_PI * 0.7], big_omega, 0.0)
    spectrum = it.diagonalize(ham)
    mixture = it.thermal_initial_state(space, [0.0])
    tau = spectrum.tau_s
    times = np.linspace(tau, 13 * tau, 100)
    trace = it.evolve_expectation(
        spectrum, mixture, hilbert.sigma_z_diagonal(space), times
    )
    measured = it.window_time_average(times, trace.values, (tau, 13 * tau))
    assert abs(measured - np.mean(-np.cos(big_omega * times))) <= 1e-12


def test_window_average_empty_window():
    with pytest.raises(ValueError):
        it.window_time_average([1.0, 2.0], [0.5, 0.5], (3.0, 4.0))


def test_window_fluctuation_constant():
    times = np.linspace(0, 10, 20)
    assert it.window_fluctuation(times, np.ones(20), (0, 10)) == 0.0


def test_window_fluctuation_alternating():
    times = np.arange(100, dtype=float)
    values = np.where(np.arange(100) % 2 == 0, 1.0, -1.0)
    measured = it.window_fluctuation(times, values, (0, 99))
    assert measured == pytest.approx(np.sqrt(100.0 / 99.0), abs=1e-15)
    assert f"{measured:.5f}" == "1.00504"


def test_window_fluctuation_cosine_rms():
    s = 100
    times = np.arange(s) / s * 4 * np.pi
    measured = it.window_fluctuation(times, np.cos(times), (0, 100))
    assert abs(measured - 1 / np.sqrt(2)) <= 0.01


def test_window_fluctuation_needs_two_samples():
    with pytest.raises(ValueError):
        it.window_fluctuation([1.0, 2.0], [0.1, 0.2], (0.5, 1.5))


def test_window_stats_permutation_invariant():
    rng = np.random.default_rng(5)
    times = np.arange(60, dtype=float)
    values = rng.normal(size=60)
    perm = rng.permutation(60)
    base_mu = it.window_time_average(times, values, (0, 59))
    base_sd = it.window_fluctuation(times, values, (0, 59))
    shuf_mu = it.window_time_average(times, values[perm], (0, 59))
    shuf_sd = it.window_fluctuation(times, values[perm], (0, 59))
    assert abs(base_mu - shuf_mu) <= 1e-12
    assert abs(base_sd - shuf_sd) <= 1e-12


def test_window_fluctuation_affine_behavior():
    rng = np.random.default_rng(9)
    times = np.arange(40, dtype=float)
    values = rng.normal(size=40)
    base = it.window_fluctuation(times, values, (0, 39))
    shifted = it.window_fluctuation(times, values + 3.7, (0, 39))
    scaled = it.window_fluctuation(times, 2.5 * values, (0, 39))
    assert abs(shifted - base) <= 1e-12
    assert abs(scaled - 2.5 * base) <= 1e-12


def test_projective_sampling_deterministic_extremes():
    noisy = it.simulate_projective_sampling(np.array([-1.0, 1.0]), 500, seed=1)
    np.testing.assert_array_equal(noisy, [-1.0, 1.0])


def test_projective_sampling_large_r_limit():
    values = np.linspace(-0.9, 0.9, 30)
    r = 1_000_000
    noisy = it.simulate_projective_sampling(values, r, seed=42)
    assert np.max(np.abs(noisy - values)) <= 3.0 / np.sqrt(r)


def test_projective_sampling_binomial_spread():
    # p = 1/2 and r = 500: the spread is 2 sqrt(0.25/500) = 0.0447.
    draws = np.array([
        it.simulate_projective_sampling(np.zeros(1), 500, seed=s)[0]
        for s in range(4000)
    ])
    expected = 2 * np.sqrt(0.25 / 500)
    assert abs(draws.std(ddof=1) - expected) / expected <= 0.1


def test_projective_sampling_preserves_mean():
    value = np.array([0.31])
    r = 500
    draws = np.array([
        it.simulate_projective_sampling(value, r, seed=s)[0]
        for s in range(1000)
    ])
    sem = 2 * np.sqrt(0.25 / r) / np.sqrt(draws.size)
    assert abs(draws.mean() - value[0]) <= 4 * sem


def test_projective_sampling_validates_range():
    with pytest.raises(ValueError):
        it.simulate_projective_sampling(np.array([1.1]), 10, seed=0)
    with pytest.raises(ValueError):
        it.simulate_projective_sampling(np.array([0.0]), 0, seed=0)


def test_projective_sampling_seed_reproducible():
    values = np.linspace(-0.5, 0.5, 20)
    a = it.simulate_projective_sampling(values, 500, seed=7)
    b = it.simulate_projective_sampling(values, 500, seed=7)
    np.testing.assert_array_equal(a, b)


def test_bootstrap_constant_trace():
    times = np.arange(50, dtype=float)
    result = it.bootstrap_uncertainty(times, np.full(50, -0.2), (0, 49),
                                      resamples=200, seed=3)
    assert result.delta_exp == 0.0
    assert result.boot_std_delta == 0.0
    assert result.n_samples == 50


def test_bootstrap_gaussian_standard_errors():
    # Gaussian samples standardized to sample std exactly 0.1 (a raw
    # S=100 draw scatters by 7%, which would test the draw, not the
    # estimator): delta_exp recovers sigma and its bootstrap spread
    # approaches sigma / sqrt(2 (S-1)).
    rng = np.random.default_rng(12)
    s = 100
    times = np.arange(s, dtype=float)
    raw = rng.normal(size=s)
    values = 0.1 * (raw - raw.mean()) / raw.std(ddof=1)
    result = it.bootstrap_uncertainty(times, values, (0, s - 1),
                                      resamples=4000, seed=99)
    assert abs(result.delta_exp - 0.1) <= 1e-15
    assert abs(result.boot_mean_delta - 0.1) / 0.1 <= 0.05
    theory = 0.1 / np.sqrt(2 * (s - 1))
    assert abs(result.boot_std_delta - theory) / theory <= 0.25


def test_bootstrap_single_resample_flagged():
    times = np.arange(10, dtype=float)
    result = it.bootstrap_uncertainty(times, np.sin(times), (0, 9),
                                      resamples=1, seed=0)
    assert result.single_resample
    assert result.boot_std_delta == 0.0
    assert result.boot_std_mu == 0.0


def test_bootstrap_bit_reproducible_and_worker_invariant():
    rng = np.random.default_rng(21)
    times = np.arange(80, dtype=float)
    values = rng.normal(size=80)
    serial = it.bootstrap_uncertainty(times, values, (0, 79),
                                      resamples=64, seed=17, workers=1)
    again = it.bootstrap_uncertainty(times, values, (0, 79),
                                     resamples=64, seed=17, workers=1)
    parallel = it.bootstrap_uncertainty(times, values, (0, 79),
                                        resamples=64, seed=17, workers=3)
    assert serial == again
    assert serial == parallel


def test_postselection_threshold_strict():
    points = [
        (0.30, 0.30, 5.0),    # deviation 0 -> kept
        (0.40, 0.30, 5.0),    # deviation 0.1 exactly -> dropped
        (0.35, 0.30, 5.0),    # deviation 0.05 -> kept
        (-0.2, 0.30, 5.0),    # deviation 0.5 -> dropped
    ]
    kept = it.postselect_thermalized(points)
    assert kept == [points[0], points[2]]


def test_postselection_skips_non_finite():
    points = [(np.nan, 0.0, 1.0), (0.0, 0.05, 2.0)]
    assert it.postselect_thermalized(points) == [points[1]]


def test_stream_rng_independent_streams():
    a = stats.stream_rng(5, 0).integers(0, 1000, size=8)
    b = stats.stream_rng(5, 1).integers(0, 1000, size=8)
    c = stats.stream_rng(5, 0).integers(0, 1000, size=8)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, c)
