"""Experiment orchestration: configs, runs, sweeps, and file emission.

Configuration files are JSON with linear frequencies in MHz; the single
place angular conversion happens is here (omega = 2*pi*nu, rad/us).

Every run writes its data files first and a ``manifest.json`` last. The
manifest records the resolved configuration, the package version, the
random-generator algorithm, and a sha256 checksum per output file:
results count as valid only when their manifest checksum matches.

Sweep points are independent; with ``workers > 1`` they are computed in
a process pool and assembled in sweep order, so the emitted CSV is
byte-identical to a serial run.
"""

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, ed, ensembles, ergodicity, hilbert, ionchain, stats
from .errors import ConfigError

__all__ = [
    "RunConfig",
    "SweepSpec",
    "TimeGridSpec",
    "DeffWindowSpec",
    "load_config",
    "run_trace",
    "run_sweep",
    "run_scaling",
    "run_modes",
    "validate_manifest",
]

TWO_PI = 2 * math.pi

TRACE_FILE = "trace.csv"
SWEEP_FILE = "sweep.csv"
SCALING_FILE = "scaling.csv"
FIT_FILE = "fit.json"
MODES_FILE = "modes.csv"
MANIFEST_FILE = "manifest.json"

SWEEP_COLUMNS = [
    "omega_z", "mu_exp", "delta_exp", "mu_exp_err", "delta_exp_err",
    "mu_infty", "mu_micro", "D_eff", "D_eff_err", "ipr_mean",
    "W_alpha_mean", "trace_trunc", "error",
]


@dataclass(frozen=True)
class SweepSpec:
    start: float
    stop: float
    count: int


@dataclass(frozen=True)
class TimeGridSpec:
    transient_points: int = 30
    window_points: int = 100
    window_tau_s: tuple = (1.0, 13.0)


@dataclass(frozen=True)
class DeffWindowSpec:
    initial: int = 1000
    step: int = 1000
    tolerance: float = 0.01


@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration; all frequencies linear, in MHz."""

    N: int
    n_c: int
    omega1_MHz: float
    Omega_MHz: float
    omega_z_MHz: object  # float or SweepSpec
    eta1: float = 0.54
    nbar: Optional[tuple] = None
    spin_ion_index: int = 1
    time_grid: TimeGridSpec = field(default_factory=TimeGridSpec)
    seed: int = 0
    resamples: int = 100_000
    repetitions: Optional[int] = None
    gamma_dec_per_us: Optional[float] = None
    deff_window: Optional[DeffWindowSpec] = None
    deff_truncation_series: bool = True
    workers: int = 1
    memory_budget_gib: float = 8.0

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("N must be at least 1")
        if self.n_c < 1:
            raise ConfigError("n_c must be at least 1")
        if self.omega1_MHz <= 0:
            raise ConfigError("omega1_MHz must be positive")
        if self.Omega_MHz < 0:
            raise ConfigError("Omega_MHz must be nonnegative")
        if isinstance(self.omega_z_MHz, SweepSpec):
            if self.omega_z_MHz.count < 1:
                raise ConfigError("sweep count must be at least 1")
        elif self.omega_z_MHz < 0:
            raise ConfigError("omega_z_MHz must be nonnegative")
        if self.nbar is None:
            object.__setattr__(self, "nbar", tuple(1.0 for _ in range(self.N)))
        else:
            object.__setattr__(self, "nbar", tuple(float(v) for v in self.nbar))
        if len(self.nbar) != self.N:
            raise ConfigError(f"nbar must list {self.N} occupations")
        if any(v < 0 for v in self.nbar):
            raise ConfigError("nbar entries must be nonnegative")
        if not 1 <= self.spin_ion_index <= self.N:
            raise ConfigError("spin_ion_index must lie in 1..N")
        if self.resamples < 1:
            raise ConfigError("resamples must be at least 1")
        if self.repetitions is not None and self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.gamma_dec_per_us is not None and self.gamma_dec_per_us < 0:
            raise ConfigError("gamma_dec_per_us must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.memory_budget_gib <= 0:
            raise ConfigError("memory_budget_gib must be positive")

    @property
    def budget_bytes(self):
        return int(self.memory_budget_gib * 1024**3)

    def is_sweep(self):
        return isinstance(self.omega_z_MHz, SweepSpec)

    def to_dict(self):
        raw = asdict(self)
        if isinstance(self.omega_z_MHz, SweepSpec):
            raw["omega_z_MHz"] = asdict(self.omega_z_MHz)
        raw["nbar"] = list(self.nbar)
        raw["time_grid"] = {
            "transient_points": self.time_grid.transient_points,
            "window_points": self.time_grid.window_points,
            "window_tau_s": list(self.time_grid.window_tau_s),
        }
        if self.deff_window is not None:
            raw["deff_window"] = asdict(self.deff_window)
        return raw

    @classmethod
    def from_dict(cls, raw):
        data = dict(raw)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("N", "n_c", "omega1_MHz", "Omega_MHz", "omega_z_MHz"):
            if key not in data:
                raise ConfigError(f"missing config key: {key}")
        if isinstance(data["omega_z_MHz"], dict):
            try:
                data["omega_z_MHz"] = SweepSpec(**data["omega_z_MHz"])
            except TypeError as exc:
                raise ConfigError(f"bad omega_z sweep spec: {exc}") from exc
        if isinstance(data.get("time_grid"), dict):
            grid = dict(data["time_grid"])
            if "window_tau_s" in grid:
                grid["window_tau_s"] = tuple(grid["window_tau_s"])
            try:
                data["time_grid"] = TimeGridSpec(**grid)
            except TypeError as exc:
                raise ConfigError(f"bad time grid spec: {exc}") from exc
        if isinstance(data.get("deff_window"), dict):
            try:
                data["deff_window"] = DeffWindowSpec(**data["deff_window"])
            except TypeError as exc:
                raise ConfigError(f"bad deff window spec: {exc}") from exc
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc


def load_config(path):
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig.from_dict(raw)


def _fmt(value):
    """17-significant-digit decimal so CSVs round-trip bit-exactly."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)  # RFC-4180: CRLF line endings
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(outdir, command, config_dict, extra, filenames, started):
    outputs = {}
    for name in filenames:
        path = Path(outdir) / name
        outputs[name] = {"sha256": _sha256(path), "bytes": path.stat().st_size}
    manifest = {
        "artifact": "iontherm",
        "version": __version__,
        "command": command,
        "config": config_dict,
        "rng_algorithm": stats.RNG_ALGORITHM,
        "elapsed_seconds": time.monotonic() - started,
        "outputs": outputs,
    }
    manifest.update(extra)
    path = Path(outdir) / MANIFEST_FILE
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return manifest


def validate_manifest(outdir):
    """Check every output named by the manifest against its checksum."""
    with open(Path(outdir) / MANIFEST_FILE, encoding="utf-8") as handle:
        manifest = json.load(handle)
    for name, meta in manifest["outputs"].items():
        if _sha256(Path(outdir) / name) != meta["sha256"]:
            raise ValueError(f"checksum mismatch for {name}")
    return manifest


def _build_instance(config, omega_z_mhz):
    chain = ionchain.build_chain(
        config.N, TWO_PI * config.omega1_MHz, config.eta1, config.spin_ion_index
    )
    space = hilbert.build_space(config.N, config.n_c, config.budget_bytes)
    ham = hilbert.build_hamiltonian(
        space, chain.etas, chain.mode_freqs,
        TWO_PI * config.Omega_MHz, TWO_PI * omega_z_mhz,
    )
    mixture = hilbert.thermal_initial_state(space, config.nbar)
    return chain, space, ham, mixture


def _time_grid(config, tau_ref):
    spec = config.time_grid
    return ed.default_time_grid(
        tau_ref,
        transient_points=spec.transient_points,
        window_points=spec.window_points,
        window=spec.window_tau_s,
    )


def _tau_ref(config):
    # The analysis window is in spin periods; an uncoupled run (Omega=0)
    # falls back to the COM period as the time unit.
    if config.Omega_MHz > 0:
        return 1.0 / config.Omega_MHz
    return 1.0 / config.omega1_MHz


def run_trace(config, outdir):
    """Single time evolution; emits trace.csv and manifest.json."""
    if config.is_sweep():
        raise ConfigError("run_trace needs a scalar omega_z_MHz; use run_sweep")
    started = time.monotonic()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    _, space, ham, mixture = _build_instance(config, config.omega_z_MHz)
    spectrum = ed.diagonalize(ham)
    tau_ref = _tau_ref(config)
    times = _time_grid(config, tau_ref)
    trace = ed.evolve_expectation(
        spectrum, mixture, hilbert.sigma_z_diagonal(space), times
    )
    # Spin expectation values are bounded; shave the +-1 ulp of rounding
    # the trace renormalization can leave outside [-1, 1].
    values = np.clip(trace.values, -1.0, 1.0)

    header = ["t_us", "t_over_tauS", "sigma_z"]
    columns = [times, times / tau_ref, values]
    if config.gamma_dec_per_us is not None:
        header.append("sigma_z_damped")
        columns.append(values * np.exp(-config.gamma_dec_per_us * times))
    if config.repetitions is not None:
        sampled = stats.simulate_projective_sampling(
            values, config.repetitions, config.seed
        )
        header.append("sigma_z_sampled")
        columns.append(sampled)

    _write_csv(outdir / TRACE_FILE, header, zip(*columns))
    return _write_manifest(
        outdir, "trace", config.to_dict(),
        {"dim": space.dim, "truncated_trace": mixture.truncated_trace},
        [TRACE_FILE], started,
    )


def _point_deff(config, ham, mixture):
    if config.deff_window is None:
        spectrum = ed.diagonalize(ham)
        return ergodicity.effective_dimension(spectrum, mixture)
    report = ergodicity.windowed_deff(
        ham, mixture,
        initial_window=config.deff_window.initial,
        step=config.deff_window.step,
        tolerance=config.deff_window.tolerance,
    )
    return report.deff


def _deff_with_uncertainty(config, omega_z_mhz):
    """Cutoff series 1..n_c and its extrapolated systematic bounds."""
    series = []
    for n_trunc in range(1, config.n_c + 1):
        chain = ionchain.build_chain(
            config.N, TWO_PI * config.omega1_MHz, config.eta1,
            config.spin_ion_index,
        )
        space = hilbert.build_space(config.N, n_trunc, config.budget_bytes)
        ham = hilbert.build_hamiltonian(
            space, chain.etas, chain.mode_freqs,
            TWO_PI * config.Omega_MHz, TWO_PI * omega_z_mhz,
        )
        mixture = hilbert.thermal_initial_state(space, config.nbar)
        series.append(_point_deff(config, ham, mixture))
    estimate = ergodicity.truncation_uncertainty(
        list(range(1, config.n_c + 1)), series
    )
    return estimate.deff, estimate.sigma_sys


def _sweep_point(args):
    config_dict, omega_z_mhz, index = args
    config = RunConfig.from_dict(config_dict)
    try:
        row = _compute_sweep_row(config, omega_z_mhz, index)
        return [omega_z_mhz, *row, ""]
    except Exception as exc:  # noqa: BLE001 - per-row isolation by contract
        return [omega_z_mhz] + [None] * (len(SWEEP_COLUMNS) - 2) + [str(exc)]


def _compute_sweep_row(config, omega_z_mhz, index):
    _, space, ham, mixture = _build_instance(config, omega_z_mhz)
    spectrum = ed.diagonalize(ham)
    sz = hilbert.sigma_z_diagonal(space)

    tau_ref = _tau_ref(config)
    times = _time_grid(config, tau_ref)
    trace = ed.evolve_expectation(spectrum, mixture, sz, times)
    window = (config.time_grid.window_tau_s[0] * tau_ref,
              config.time_grid.window_tau_s[1] * tau_ref)
    point_seed = int(stats.stream_rng(config.seed, index).integers(2**63))
    boot = stats.bootstrap_uncertainty(
        times, trace.values, window,
        resamples=config.resamples, seed=point_seed,
    )

    mu_infty = ed.diagonal_ensemble_average(spectrum, mixture, sz)
    e_mean, e_width = ensembles.energy_moments(mixture, ham)
    mu_micro = ensembles.microcanonical_average(
        spectrum, e_mean, e_width, sz
    ).value

    if config.deff_truncation_series and config.n_c >= 2:
        deff, deff_err = _deff_with_uncertainty(config, omega_z_mhz)
    else:
        deff = _point_deff(config, ham, mixture)
        deff_err = 0.0

    weights = mixture.normalized_weights()
    ipr_mean = float(weights @ ergodicity.component_iprs(spectrum, mixture))
    shell = np.array([
        ensembles.energy_shell_width(spectrum, int(i))[1]
        for i in mixture.indices
    ])
    shell_mean = float(weights @ shell)

    return [
        boot.mu_exp, boot.delta_exp, boot.boot_std_mu, boot.boot_std_delta,
        mu_infty, mu_micro, deff, deff_err, ipr_mean, shell_mean,
        mixture.truncated_trace,
    ]


def run_sweep(config, outdir):
    """Sweep omega_z; emits sweep.csv and manifest.json.

    Each sweep point owns its full diagonalization and runs independently;
    failures are recorded in the row's error column and the run continues.
    """
    if not config.is_sweep():
        raise ConfigError("run_sweep needs an omega_z_MHz sweep spec")
    started = time.monotonic()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    spec = config.omega_z_MHz
    values = np.linspace(spec.start, spec.stop, spec.count)
    jobs = [(config.to_dict(), float(v), i) for i, v in enumerate(values)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(job) for job in jobs]

    _write_csv(outdir / SWEEP_FILE, SWEEP_COLUMNS, rows)
    space = hilbert.build_space(config.N, config.n_c, config.budget_bytes)
    mixture = hilbert.thermal_initial_state(space, config.nbar)
    return _write_manifest(
        outdir, "sweep", config.to_dict(),
        {"dim": space.dim, "truncated_trace": mixture.truncated_trace,
         "failed_rows": sum(1 for r in rows if r[-1])},
        [SWEEP_FILE], started,
    )


def _scaling_points(raw_grid):
    points = []
    for k, entry in enumerate(raw_grid):
        data = dict(entry)
        try:
            points.append(ergodicity.ScalingPoint(
                n_ions=int(data.pop("N")),
                n_c=int(data.pop("n_c")),
                omega1=TWO_PI * float(data.pop("omega1_MHz")),
                Omega=TWO_PI * float(data.pop("Omega_MHz")),
                omega_z=TWO_PI * float(data.pop("omega_z_MHz")),
                eta1=float(data.pop("eta1", 0.54)),
                phonons_per_mode=int(data.pop("phonons_per_mode", 1)),
                spin_ion_index=int(data.pop("spin_ion_index", 1)),
                label=str(data.pop("label", "")) or f"instance{k:03d}",
            ))
        except KeyError as exc:
            raise ConfigError(f"scaling grid entry {k} misses {exc}") from exc
        if data:
            raise ConfigError(
                f"scaling grid entry {k} has unknown keys {sorted(data)}"
            )
    return points


def run_scaling(outdir, grid=None):
    """Fluctuation-scaling study; emits scaling.csv, fit.json, manifest.json.

    Without an explicit grid the desk-scale study grid is used (chains of
    1..3 ions, pure one- and two-phonon initial states, a band of
    effective fields).
    """
    started = time.monotonic()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if grid is None:
        points = ergodicity.desk_scaling_grid()
        grid_dict = "default-desk-grid"
    else:
        points = _scaling_points(grid)
        grid_dict = list(grid)
    if len(points) < 3:
        raise ConfigError("scaling study needs at least 3 grid points")

    result = ergodicity.fluctuation_scaling_study(points)
    rows = [
        [row.label, row.ipr, row.deff, row.delta_infty, row.error or ""]
        for row in result.rows
    ]
    _write_csv(outdir / SCALING_FILE,
               ["instance_id", "IPR", "D_eff", "delta_infty", "error"], rows)
    fit = {
        "slope": result.slope,
        "intercept": result.intercept,
        "slope_stderr": None if math.isnan(result.slope_stderr)
        else result.slope_stderr,
        "n_instances": len(result.rows),
        "n_failed": sum(1 for row in result.rows if row.error),
    }
    with open(outdir / FIT_FILE, "w", encoding="utf-8") as handle:
        json.dump(fit, handle, indent=2, sort_keys=True)
        handle.write("\n")
    manifest = _write_manifest(
        outdir, "scaling", {"grid": grid_dict}, {"fit": fit},
        [SCALING_FILE, FIT_FILE], started,
    )
    return manifest


def run_modes(config, outdir):
    """Chain normal-mode report; emits modes.csv and manifest.json."""
    started = time.monotonic()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    chain = ionchain.build_chain(
        config.N, TWO_PI * config.omega1_MHz, config.eta1, config.spin_ion_index
    )
    spin_row = chain.mode_vectors[config.spin_ion_index - 1, :]
    rows = [
        [j + 1, chain.mode_freqs[j] / TWO_PI, chain.mode_freqs[j] / chain.mode_freqs[0],
         spin_row[j] / spin_row[0], chain.etas[j]]
        for j in range(config.N)
    ]
    _write_csv(outdir / MODES_FILE,
               ["mode", "freq_MHz", "freq_ratio", "amp_ratio", "eta"], rows)
    return _write_manifest(
        outdir, "modes", config.to_dict(), {}, [MODES_FILE], started,
    )
