import json

import numpy as np
import pytest

from iontherm import cli, runner
from iontherm.errors import ConfigError

BASE_CONFIG = {
    "N": 1,
    "n_c": 8,
    "omega1_MHz": 0.724,
    "Omega_MHz": 0.73,
    "omega_z_MHz": 0.0,
    "eta1": 0.54,
    "nbar": [0.8],
    "seed": 11,
    "resamples": 200,
}


def write_config(tmp_path, overrides=None, name="config.json"):
    raw = dict(BASE_CONFIG)
    if overrides:
        raw.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def read_csv_rows(path):
    text = path.read_bytes().decode("utf-8")
    assert "\r\n" in text  # RFC-4180 line endings
    lines = [line for line in text.split("\r\n") if line]
    return [line.split(",") for line in lines]


def test_config_round_trip(tmp_path):
    path = write_config(tmp_path, {"omega_z_MHz": {"start": 0.0, "stop": 1.0,
                                                   "count": 3}})
    config = runner.load_config(path)
    again = runner.RunConfig.from_dict(config.to_dict())
    assert again == config


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        runner.RunConfig.from_dict({**BASE_CONFIG, "omega1_MHz": -1.0})
    with pytest.raises(ConfigError):
        runner.RunConfig.from_dict({**BASE_CONFIG, "nbar": [0.8, 0.2]})
    with pytest.raises(ConfigError):
        runner.RunConfig.from_dict({**BASE_CONFIG, "bogus": 1})
    with pytest.raises(ConfigError):
        runner.RunConfig.from_dict(
            {**BASE_CONFIG,
             "omega_z_MHz": {"start": 0.0, "stop": 1.0, "count": 0}}
        )
    missing = {k: v for k, v in BASE_CONFIG.items() if k != "Omega_MHz"}
    with pytest.raises(ConfigError):
        runner.RunConfig.from_dict(missing)


def test_run_trace_emits_grid_and_manifest(tmp_path):
    config = runner.load_config(write_config(tmp_path))
    outdir = tmp_path / "out"
    runner.run_trace(config, outdir)
    rows = read_csv_rows(outdir / "trace.csv")
    assert rows[0] == ["t_us", "t_over_tauS", "sigma_z"]
    assert len(rows) == 1 + 130  # default grid: 30 transient + 100 window
    manifest = runner.validate_manifest(outdir)
    assert manifest["command"] == "trace"
    assert manifest["dim"] == 18
    assert 0 < manifest["truncated_trace"] <= 1
    first = [float(v) for v in rows[1]]
    assert first[0] == 0.0
    assert abs(first[2] + 1.0) < 1e-10
    values = np.array([float(r[2]) for r in rows[1:]])
    assert np.all(np.abs(values) <= 1.0)


def test_run_trace_optional_columns(tmp_path):
    config = runner.load_config(write_config(
        tmp_path, {"gamma_dec_per_us": 0.01, "repetitions": 500}
    ))
    outdir = tmp_path / "out"
    runner.run_trace(config, outdir)
    rows = read_csv_rows(outdir / "trace.csv")
    assert rows[0] == ["t_us", "t_over_tauS", "sigma_z", "sigma_z_damped",
                       "sigma_z_sampled"]
    t = np.array([float(r[0]) for r in rows[1:]])
    clean = np.array([float(r[2]) for r in rows[1:]])
    damped = np.array([float(r[3]) for r in rows[1:]])
    np.testing.assert_allclose(damped, clean * np.exp(-0.01 * t), rtol=1e-12)
    sampled = np.array([float(r[4]) for r in rows[1:]])
    assert np.all(np.abs(sampled) <= 1.0)


def test_run_trace_rejects_sweep_config(tmp_path):
    config = runner.load_config(write_config(
        tmp_path, {"omega_z_MHz": {"start": 0.0, "stop": 0.5, "count": 2}}
    ))
    with pytest.raises(ConfigError):
        runner.run_trace(config, tmp_path / "out")


def test_manifest_detects_tampering(tmp_path):
    config = runner.load_config(write_config(tmp_path))
    outdir = tmp_path / "out"
    runner.run_trace(config, outdir)
    trace = outdir / "trace.csv"
    trace.write_text(trace.read_text() + "tampered\r\n")
    with pytest.raises(ValueError):
        runner.validate_manifest(outdir)


def sweep_config(tmp_path, workers=1, count=3):
    return runner.load_config(write_config(tmp_path, {
        "N": 1,
        "n_c": 5,
        "omega_z_MHz": {"start": 0.0, "stop": 0.8, "count": count},
        "resamples": 100,
        "workers": workers,
    }, name=f"sweep{workers}.json"))


def test_run_sweep_columns_and_determinism(tmp_path):
    out1 = tmp_path / "serial"
    out2 = tmp_path / "parallel"
    runner.run_sweep(sweep_config(tmp_path, workers=1), out1)
    runner.run_sweep(sweep_config(tmp_path, workers=3), out2)
    b1 = (out1 / "sweep.csv").read_bytes()
    b2 = (out2 / "sweep.csv").read_bytes()
    assert b1 == b2
    rows = read_csv_rows(out1 / "sweep.csv")
    assert rows[0] == runner.SWEEP_COLUMNS
    assert len(rows) == 1 + 3
    runner.validate_manifest(out1)


def test_run_sweep_uncoupled_limits(tmp_path):
    config = runner.load_config(write_config(tmp_path, {
        "N": 1,
        "n_c": 4,
        "Omega_MHz": 0.0,
        "omega_z_MHz": {"start": 0.1, "stop": 0.5, "count": 2},
        "resamples": 50,
    }, name="uncoupled.json"))
    outdir = tmp_path / "out"
    runner.run_sweep(config, outdir)
    rows = read_csv_rows(outdir / "sweep.csv")
    header = rows[0]
    for row in rows[1:]:
        record = dict(zip(header, row))
        assert record["error"] == ""
        assert float(record["D_eff"]) == 1.0
        assert float(record["delta_exp"]) <= 1e-12  # evolution round-off
        assert float(record["mu_infty"]) == pytest.approx(-1.0, abs=1e-12)


def test_run_sweep_single_point_matches_trace_values(tmp_path):
    count1 = runner.load_config(write_config(tmp_path, {
        "N": 1, "n_c": 6,
        "omega_z_MHz": {"start": 0.3, "stop": 0.3, "count": 1},
        "resamples": 50,
    }, name="single.json"))
    outdir = tmp_path / "sweep_out"
    runner.run_sweep(count1, outdir)
    rows = read_csv_rows(outdir / "sweep.csv")
    record = dict(zip(rows[0], rows[1]))
    assert float(record["omega_z"]) == 0.3

    scalar = runner.load_config(write_config(tmp_path, {
        "N": 1, "n_c": 6, "omega_z_MHz": 0.3, "resamples": 50,
    }, name="scalar.json"))
    trace_out = tmp_path / "trace_out"
    runner.run_trace(scalar, trace_out)
    trace_rows = read_csv_rows(trace_out / "trace.csv")
    values = np.array([float(r[2]) for r in trace_rows[1:]])
    t_over = np.array([float(r[1]) for r in trace_rows[1:]])
    window = (t_over >= 1.0) & (t_over <= 13.0)
    assert float(record["mu_exp"]) == pytest.approx(values[window].mean(),
                                                    abs=1e-12)


def test_run_trace_single_ion_window_average(tmp_path):
    # Single-ion strong-coupling configuration: persistent oscillations
    # whose window average sits close to the diagonal-ensemble value.
    config = runner.load_config(write_config(tmp_path, {
        "N": 1, "n_c": 20, "omega1_MHz": 0.724, "Omega_MHz": 0.73,
        "omega_z_MHz": 0.0, "nbar": [0.8],
    }, name="fig_trace.json"))
    outdir = tmp_path / "out"
    runner.run_trace(config, outdir)
    rows = read_csv_rows(outdir / "trace.csv")
    t_over = np.array([float(r[1]) for r in rows[1:]])
    values = np.array([float(r[2]) for r in rows[1:]])
    window = values[(t_over >= 1.0) & (t_over <= 13.0)]
    assert window.std(ddof=1) > 0.1  # oscillations persist

    import iontherm as it
    from iontherm import hilbert

    space = hilbert.build_space(1, 20)
    ham = hilbert.build_hamiltonian(
        space, [0.54], [2 * np.pi * 0.724], 2 * np.pi * 0.73, 0.0
    )
    spectrum = it.diagonalize(ham)
    mixture = hilbert.thermal_initial_state(space, [0.8])
    mu_inf = it.diagonal_ensemble_average(
        spectrum, mixture, hilbert.sigma_z_diagonal(space)
    )
    assert abs(window.mean() - mu_inf) <= 0.02


def test_run_scaling_synthetic_grid(tmp_path):
    grid = [
        {"N": 1, "n_c": 8, "omega1_MHz": 0.7, "Omega_MHz": 0.7,
         "omega_z_MHz": wz, "phonons_per_mode": k}
        for wz in (0.175, 0.24, 0.35) for k in (1, 2)
    ]
    outdir = tmp_path / "out"
    manifest = runner.run_scaling(outdir, grid=grid)
    rows = read_csv_rows(outdir / "scaling.csv")
    assert rows[0] == ["instance_id", "IPR", "D_eff", "delta_infty", "error"]
    assert len(rows) == 1 + 6
    fit = json.loads((outdir / "fit.json").read_text())
    assert np.isfinite(fit["slope"])
    assert manifest["fit"]["slope"] == fit["slope"]
    runner.validate_manifest(outdir)


def test_run_scaling_needs_three_points(tmp_path):
    grid = [{"N": 1, "n_c": 4, "omega1_MHz": 0.7, "Omega_MHz": 0.7,
             "omega_z_MHz": 0.2}] * 2
    with pytest.raises(ConfigError):
        runner.run_scaling(tmp_path / "out", grid=grid)


def test_run_modes_report(tmp_path):
    config = runner.load_config(write_config(tmp_path, {
        "N": 3, "nbar": [1.0, 1.0, 1.0], "omega1_MHz": 0.707,
    }, name="modes.json"))
    outdir = tmp_path / "out"
    runner.run_modes(config, outdir)
    rows = read_csv_rows(outdir / "modes.csv")
    assert rows[0] == ["mode", "freq_MHz", "freq_ratio", "amp_ratio", "eta"]
    assert len(rows) == 4
    ratios = [float(r[2]) for r in rows[1:]]
    assert ratios[0] == 1.0
    assert abs(ratios[2] - 2.41) < 0.01
    etas = [float(r[4]) for r in rows[1:]]
    assert etas[0] == 0.54
    runner.validate_manifest(outdir)


def test_cli_trace_exit_codes(tmp_path, capsys):
    config_path = write_config(tmp_path)
    out = tmp_path / "cli_out"
    code = cli.main(["trace", "--config", str(config_path),
                     "--out", str(out)])
    assert code == 0
    assert (out / "trace.csv").exists()
    assert (out / "manifest.json").exists()

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["trace", "--config", str(bad),
                     "--out", str(out)]) == 2

    wrong = write_config(tmp_path, {"nbar": [1.0, 2.0]}, name="wrong.json")
    assert cli.main(["trace", "--config", str(wrong),
                     "--out", str(out)]) == 2


def test_cli_budget_exit_code(tmp_path):
    config_path = write_config(tmp_path, {"N": 3, "n_c": 7,
                                          "nbar": [1.0, 1.0, 1.0]},
                               name="big.json")
    code = cli.main(["trace", "--config", str(config_path),
                     "--out", str(tmp_path / "out"),
                     "--budget-gib", "0.001"])
    assert code == 3


def test_cli_seed_override_changes_sampling(tmp_path):
    config_path = write_config(tmp_path, {"repetitions": 500})
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    out3 = tmp_path / "c"
    assert cli.main(["trace", "--config", str(config_path), "--out",
                     str(out1)]) == 0
    assert cli.main(["trace", "--config", str(config_path), "--out",
                     str(out2), "--seed", "99"]) == 0
    assert cli.main(["trace", "--config", str(config_path), "--out",
                     str(out3), "--seed", "99"]) == 0
    assert (out1 / "trace.csv").read_bytes() != (out2 / "trace.csv").read_bytes()
    assert (out2 / "trace.csv").read_bytes() == (out3 / "trace.csv").read_bytes()
