import csv
import io
import json
import math

import numpy as np
import pytest

from periwave.cli import main
from periwave.errors import ConfigurationError
from periwave.experiments import (ExperimentConfig, fit_loglog, initial_state, run_bench,
                                  run_delta_convergence, run_energy_drift, run_low_frequency_gap,
                                  run_symbol_consistency)
from periwave.norms import l2_norm

SMALL = {
    "grid": {"n": 256, "box_length": 2 * math.pi * 32},
    "experiment": {"n_times": 12, "s": [0.0], "data_radius": 0.25, "R": 0.5,
                   "t_slope_radius": 0.25, "t_slope_base": 4.0, "energy_radius": 0.5},
    "sweeps": {"alpha": [0.5], "R": [0.25, 0.5], "n": [128, 256], "modes": [1, 2, 3],
               "bench_n": [64], "bench_ratio": [2, 4]},
}


@pytest.fixture
def small():
    return ExperimentConfig.from_mapping(SMALL)


def test_fit_loglog_recovers_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, intercept, resid = fit_loglog(x, 3 * x ** 1.7)
    assert slope == pytest.approx(1.7) and intercept == pytest.approx(math.log(3))
    assert resid < 1e-12
    assert math.isnan(fit_loglog(x, -x)[0])


class TestConfig:
    def test_defaults_are_valid(self):
        cfg = ExperimentConfig.default()
        assert cfg.grid.n == 1024 and cfg.alphas == [0.25, 0.5, 0.75]
        assert cfg.deltas == [0.2, 0.1, 0.05, 0.025]

    @pytest.mark.parametrize("patch", [
        {"model": {"horizon": 1}},
        {"extra": {"a": 1}},
        {"sweeps": {"delta": []}},
        {"sweeps": {"delta": [0.1, 0.3, 0.2]}},
        {"experiment": {"T": -1.0}},
        {"experiment": {"n_times": 1}},
        {"experiment": {"R": 100.0}},
        {"model": {"cutoff": "gaussian"}},
    ])
    def test_rejects(self, patch):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_mapping(patch)

    def test_toml_and_overrides(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[model]\nalpha = 0.25\n[sweeps]\nalpha = [0.25]\n')
        cfg = ExperimentConfig.load(path)
        assert cfg.base_params.alpha == 0.25
        cfg = cfg.with_tolerances({"delta_rate_tol": 0.5})
        assert cfg.tolerances["delta_rate_tol"] == 0.5 and "delta_rate_tol" in cfg.overridden
        with pytest.raises(ConfigurationError):
            ExperimentConfig.load(tmp_path / "missing.toml")
        (tmp_path / "bad.toml").write_text("[model\n")
        with pytest.raises(ConfigurationError):
            ExperimentConfig.load(tmp_path / "bad.toml")


def test_initial_data_keeps_norms_across_radii(small):
    a, b = initial_state(small, 0.25), initial_state(small, 0.5)
    assert l2_norm(a.u_hat) == pytest.approx(l2_norm(b.u_hat), rel=1e-14)
    assert np.max(small.grid.xi_norm[np.abs(b.u_hat.coeffs[0]) > 0]) <= 0.5 + 1e-12
    scaled = initial_state(small, 0.5, rescale_time=True)
    assert l2_norm(scaled.v_hat) == pytest.approx(2 * l2_norm(a.v_hat), rel=1e-14)
    with pytest.raises(ConfigurationError):
        initial_state(small, 0.3)


def test_delta_sweep_preconditions(small):
    with pytest.raises(ConfigurationError):
        run_delta_convergence(small.with_changes("sweeps", delta=[0.1]))
    with pytest.raises(ConfigurationError):
        run_delta_convergence(small.with_changes("sweeps", delta=[0.4, 0.2, 0.05, 0.025]))


def test_low_frequency_requires_small_radius(small):
    cfg = small.with_changes("sweeps", R=[0.5, 1.5]).with_changes("experiment", data_radius=0.5)
    with pytest.raises(ConfigurationError, match=r"R in \(0, 1\)"):
        run_low_frequency_gap(cfg)


def test_vacuous_regime_is_skipped(small):
    cfg = small.with_changes("experiment", T=2000.0, t_slope_base=2000.0)
    rep = run_low_frequency_gap(cfg)
    assert all(r["vacuous"] for r in rep.records if r["study"] == "sweep")
    assert {v.status for v in rep.verdicts} == {"skipped"}
    assert rep.passed


def test_zero_data_energy_verdicts_pass(small):
    rep = run_energy_drift(small.with_changes("experiment", amplitude=0.0))
    assert rep.passed and all(v.status == "pass" for v in rep.verdicts)
    assert all(r["energy_wave_0"] == 0 for r in rep.records)


def test_verdicts_are_recomputable_from_csv(small):
    rep = run_delta_convergence(small)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv_text())))
    deltas = [float(r["delta"]) for r in rows]
    gaps = [float(r["sup_gap"]) for r in rows]
    slope, _, _ = fit_loglog(deltas, gaps)
    v = rep.verdict("delta_rate[alpha=0.5,s=0]")
    assert v.value == slope
    assert (v.status == "pass") == (abs(slope - 1.0) <= 0.15)
    for r in rows:
        assert r["config_hash"] == small.config_hash()


def test_determinism(small):
    a, b = run_symbol_consistency(small), run_symbol_consistency(small)
    assert a.to_csv_text() == b.to_csv_text()
    assert a.determinism_hash() == b.determinism_hash()
    ja, jb = json.loads(a.to_json()), json.loads(b.to_json())
    ja["provenance"].pop("started"), jb["provenance"].pop("started")
    assert ja == jb
    other = run_symbol_consistency(small.with_seed(7))
    assert other.determinism_hash() != a.determinism_hash()


def test_bench_hash_ignores_timings(small):
    a, b = run_bench(small, repeats=1), run_bench(small, repeats=1)
    assert a.determinism_hash() == b.determinism_hash()
    assert not a.verdicts and a.passed
    assert {"realspace_ns_per_point", "spectral_ns_per_point"} <= set(a.records[0])


def test_symbol_consistency_needs_resolved_horizon(small):
    with pytest.raises(ConfigurationError):
        run_symbol_consistency(small.with_changes("sweeps", n=[16, 32]))


class TestCli:
    def write(self, tmp_path, extra=""):
        path = tmp_path / "c.toml"
        path.write_text(
            '[grid]\nn = 256\nbox_length = 201.06192982974676\n'
            '[experiment]\nn_times = 12\ns = [0.0]\ndata_radius = 0.25\nR = 0.5\n'
            't_slope_radius = 0.25\nt_slope_base = 4.0\n'
            '[sweeps]\nalpha = [0.5]\nR = [0.25, 0.5]\nn = [128, 256]\nmodes = [1, 2]\n' + extra)
        return path

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 64
        assert "usage" in capsys.readouterr().err
        assert main([]) == 64

    def test_missing_config(self, tmp_path, capsys):
        assert main(["dispersion", "--config", str(tmp_path / "nope.toml")]) == 2
        err = capsys.readouterr().err.strip()
        assert len(err.splitlines()) == 1

    def test_bad_flag_is_configuration_error(self):
        assert main(["bench", "--bogus"]) == 2
        assert main(["bench", "--tol", "novalue"]) == 2

    def test_radius_hypothesis(self, tmp_path, capsys):
        path = self.write(tmp_path).read_text().replace("R = [0.25, 0.5]", "R = [0.5, 1.25]")
        (tmp_path / "r.toml").write_text(path.replace("data_radius = 0.25", "data_radius = 0.25"))
        assert main(["low-frequency", "--config", str(tmp_path / "r.toml"),
                     "--out", str(tmp_path)]) == 2
        assert "R in (0, 1)" in capsys.readouterr().err

    def test_pass_and_fail_exit_codes(self, tmp_path):
        cfg = self.write(tmp_path)
        out = tmp_path / "out"
        assert main(["symbol-consistency", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "symbol_consistency.csv").exists()
        report = json.loads((out / "symbol_consistency.json").read_text())
        assert set(report) == {"experiment", "config_echo", "records", "fits", "verdicts",
                               "provenance"}
        assert all("tolerance" in v for v in report["verdicts"])
        # the delta rate of the gap is 2, so the default verdict fails
        assert main(["delta-convergence", "--config", str(cfg), "--out", str(out)]) == 1
        assert main(["delta-convergence", "--config", str(cfg), "--out", str(out),
                     "--tol", "delta_rate_target=2.0"]) == 0
        report = json.loads((out / "delta_convergence.json").read_text())
        assert report["provenance"]["overridden_tolerances"] == ["delta_rate_target"]
        assert all(v["overridden"] for v in report["verdicts"] if v["name"].startswith("delta_rate"))

    def test_repeat_runs_write_identical_files(self, tmp_path):
        cfg = self.write(tmp_path)
        for tag in ("a", "b"):
            assert main(["energy-drift", "--config", str(cfg), "--out", str(tmp_path / tag),
                         "--seed", "11"]) == 0
        ca = (tmp_path / "a" / "energy_drift.csv").read_bytes()
        assert ca == (tmp_path / "b" / "energy_drift.csv").read_bytes()
        ja = json.loads((tmp_path / "a" / "energy_drift.json").read_text())
        jb = json.loads((tmp_path / "b" / "energy_drift.json").read_text())
        assert ja["provenance"]["determinism_hash"] == jb["provenance"]["determinism_hash"]
