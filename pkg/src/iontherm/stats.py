"""Finite-window time statistics, measurement noise, and bootstrap errors.

The analysis window mirrors the experimental one: samples of <sigma_z(t)>
inside [tau_s, 13 tau_s] are reduced to their arithmetic mean mu_exp and
their sample standard deviation delta_exp (S-1 denominator).

All randomness flows through numpy's Philox bit generator, a counter-based
algorithm, keyed by (seed, stream index). Derived streams depend only on
those two integers, so a bootstrap gives identical results whether its
resamples run serially or split across any number of workers.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WindowStats",
    "RNG_ALGORITHM",
    "window_mask",
    "window_time_average",
    "window_fluctuation",
    "simulate_projective_sampling",
    "bootstrap_uncertainty",
    "postselect_thermalized",
]

RNG_ALGORITHM = "numpy.random.Philox(4x64, counter-based), key=(seed, stream)"


def stream_rng(seed, stream=0):
    """Deterministic generator for a (seed, stream) pair."""
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class WindowStats:
    """Window statistics of a trace plus their bootstrap uncertainties."""

    mu_exp: float
    delta_exp: float
    n_samples: int
    window: tuple
    boot_mean_mu: float
    boot_mean_delta: float
    boot_std_mu: float
    boot_std_delta: float
    seed: int
    resamples: int
    single_resample: bool = False


def window_mask(times, window):
    lo, hi = window
    return (np.asarray(times) >= lo) & (np.asarray(times) <= hi)


def window_time_average(times, values, window):
    """Arithmetic mean of the samples inside the closed window."""
    selected = np.asarray(values)[window_mask(times, window)]
    if selected.size == 0:
        raise ValueError(f"no samples inside window {window}")
    if np.all(selected == selected[0]):
        return float(selected[0])
    return float(selected.mean())


def window_fluctuation(times, values, window):
    """Sample standard deviation (S-1 denominator) inside the window.

    Exactly zero if and only if every in-window sample is equal.
    """
    selected = np.asarray(values)[window_mask(times, window)]
    if selected.size < 2:
        raise ValueError("fluctuation needs at least two samples in the window")
    if np.all(selected == selected[0]):
        return 0.0
    return float(selected.std(ddof=1))


def simulate_projective_sampling(values, repetitions, seed):
    """Binomial projection noise of r repeated spin measurements per point.

    Each expectation value v maps to an up-state probability p = (1+v)/2;
    the simulated estimate is 2k/r - 1 with k ~ Binomial(r, p).
    """
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    values = np.asarray(values, dtype=float)
    if np.any(np.abs(values) > 1.0 + 1e-9):
        worst = float(np.max(np.abs(values)))
        raise ValueError(f"expectation value {worst} outside [-1, 1]")
    prob = np.clip(0.5 * (1.0 + values), 0.0, 1.0)
    rng = stream_rng(seed)
    counts = rng.binomial(repetitions, prob)
    return 2.0 * counts / repetitions - 1.0


def _resample_stats(samples, seed, start, stop):
    mus = np.empty(stop - start)
    deltas = np.empty(stop - start)
    n = samples.size
    for i in range(start, stop):
        rng = stream_rng(seed, i)
        draw = samples[rng.integers(0, n, size=n)]
        mus[i - start] = draw.mean()
        deltas[i - start] = draw.std(ddof=1)
    return mus, deltas


def bootstrap_uncertainty(times, values, window, resamples=100_000, seed=0,
                          workers=1):
    """Bootstrap the window statistics by resampling with replacement.

    Returns the point statistics of the window together with the mean and
    standard deviation of mu_exp and delta_exp over the resampled data
    sets. Resample i draws from the (seed, i) stream, so the result is
    bit-identical for any worker count. A single resample leaves the
    spreads undefined; they are reported as 0 with a flag.
    """
    if resamples < 1:
        raise ValueError("need at least one resample")
    samples = np.asarray(values)[window_mask(times, window)]
    if samples.size < 2:
        raise ValueError("bootstrap needs at least two samples in the window")
    if np.all(samples == samples[0]):
        value = float(samples[0])
        return WindowStats(
            mu_exp=value, delta_exp=0.0, n_samples=int(samples.size),
            window=(float(window[0]), float(window[1])),
            boot_mean_mu=value, boot_mean_delta=0.0,
            boot_std_mu=0.0, boot_std_delta=0.0,
            seed=int(seed), resamples=int(resamples),
            single_resample=resamples == 1,
        )

    bounds = np.linspace(0, resamples, max(int(workers), 1) + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if len(chunks) <= 1:
        mus, deltas = _resample_stats(samples, seed, 0, resamples)
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(
                _bootstrap_chunk,
                [(samples, seed, lo, hi) for lo, hi in chunks],
            ))
        mus = np.concatenate([p[0] for p in parts])
        deltas = np.concatenate([p[1] for p in parts])

    single = resamples == 1
    return WindowStats(
        mu_exp=float(samples.mean()),
        delta_exp=float(samples.std(ddof=1)),
        n_samples=int(samples.size),
        window=(float(window[0]), float(window[1])),
        boot_mean_mu=float(mus.mean()),
        boot_mean_delta=float(deltas.mean()),
        boot_std_mu=0.0 if single else float(mus.std(ddof=1)),
        boot_std_delta=0.0 if single else float(deltas.std(ddof=1)),
        seed=int(seed),
        resamples=int(resamples),
        single_resample=single,
    )


def _bootstrap_chunk(args):
    samples, seed, lo, hi = args
    return _resample_stats(samples, seed, lo, hi)


def postselect_thermalized(points, threshold=0.1):
    """Keep points whose time average sits close to the microcanonical one.

    ``points`` is a sequence of (mu_exp, mu_micro, d_eff) triples; a point
    survives when |mu_exp - mu_micro| < threshold, strictly. A deviation
    of exactly the threshold is dropped.
    """
    kept = []
    for point in points:
        mu_exp, mu_micro = point[0], point[1]
        if math.isfinite(mu_exp) and math.isfinite(mu_micro) and \
                abs(mu_exp - mu_micro) < threshold:
            kept.append(point)
    return kept
