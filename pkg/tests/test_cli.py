import json
import subprocess
import sys

import numpy as np
import pytest

from gratinguq import ExperimentConfig
from gratinguq.cli import main


def fast_config_dict():
    # single continuation stage, short iteration budget: exercises every
    # code path while staying quick
    return {
        "surface": {"preset": "example1", "sigma": 1 / 15, "l": 1.0},
        "inversion": {"k_max": 1, "T": 40},
        "mc": {"M": 2, "master_seed": 11},
    }


@pytest.fixture()
def fast_config(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(fast_config_dict()), encoding="utf-8")
    return p


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


class TestConfig:
    def test_roundtrip(self):
        cfg = ExperimentConfig.from_json(ExperimentConfig().to_json())
        assert cfg.inversion.k_max == 2
        assert cfg.mc.M == 100

    def test_unknown_key_rejected(self):
        with pytest.raises(Exception):
            ExperimentConfig.from_json('{"inversion": {"bogus": 1}}')

    def test_example2_preset_profile(self):
        cfg = ExperimentConfig.from_json('{"surface": {"preset": "example2"}}')
        prof = cfg.surface.profile()
        x = np.linspace(0, 2 * np.pi, 33)
        truth = 1.2 + 0.05 * np.exp(np.cos(2 * x)) + 0.04 * np.exp(np.cos(3 * x))
        assert np.max(np.abs(prof(x) - truth)) < 1e-6


class TestSample:
    def test_writes_samples_and_manifest(self, fast_config, tmp_path):
        out = tmp_path / "samples"
        rc = main(["sample", "--config", str(fast_config), "--count", "3",
                   "--out", str(out)])
        assert rc == 0
        manifest = read_json(out / "manifest.json")
        assert manifest["count"] == 3
        d = read_json(out / "sample_0000.json")
        assert len(d["grid"]) == len(d["values"])
        assert min(d["values"]) > 0
        assert d["kl_order"] == 6

    def test_seed_override_changes_draws(self, fast_config, tmp_path):
        main(["sample", "--config", str(fast_config), "--seed", "1",
              "--out", str(tmp_path / "a")])
        main(["sample", "--config", str(fast_config), "--seed", "2",
              "--out", str(tmp_path / "b")])
        da = read_json(tmp_path / "a" / "sample_0000.json")
        db = read_json(tmp_path / "b" / "sample_0000.json")
        assert da["draws"] != db["draws"]


@pytest.fixture()
def pipeline_dirs(fast_config, tmp_path):
    sdir = tmp_path / "samples"
    mdir = tmp_path / "meas"
    assert main(["sample", "--config", str(fast_config), "--out", str(sdir)]) == 0
    assert main(["forward", "--config", str(fast_config),
                 "--sample", str(sdir / "sample_0000.json"),
                 "--out", str(mdir)]) == 0
    return fast_config, sdir, mdir, tmp_path


class TestForward:
    def test_measurements_and_efficiencies(self, pipeline_dirs):
        _, _, mdir, _ = pipeline_dirs
        files = sorted(mdir.glob("measurement_*.json"))
        assert len(files) == 5  # one stage x five angles
        eff = read_json(mdir / "efficiencies.json")
        assert len(eff["entries"]) == 5
        for entry in eff["entries"]:
            assert abs(entry["sum"] - 1.0) < 1e-3
        m = read_json(files[0])
        assert set(m) >= {"kappa", "theta", "y0", "lambda_period", "tau",
                          "grid", "re", "im"}

    def test_missing_sample_file_is_io_error(self, fast_config, tmp_path):
        rc = main(["forward", "--config", str(fast_config),
                   "--sample", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path / "m")])
        assert rc == 4


class TestInvert:
    def test_reconstruction_written(self, pipeline_dirs):
        cfgp, _, mdir, tmp = pipeline_dirs
        out = tmp / "recon"
        rc = main(["invert", "--config", str(cfgp),
                   "--measurements", str(mdir), "--out", str(out)])
        assert rc == 0
        d = read_json(out / "reconstruction.json")
        assert d["k_max"] == 1
        assert len(d["coeffs"]) == 3
        assert d["deviation_rms"] < 0.5

    def test_missing_measurements_is_config_error(self, pipeline_dirs):
        cfgp, _, mdir, tmp = pipeline_dirs
        # demand a second stage the measurement directory does not have
        cfg2 = json.loads(cfgp.read_text())
        cfg2["inversion"]["k_max"] = 2
        cfgp2 = tmp / "config2.json"
        cfgp2.write_text(json.dumps(cfg2))
        rc = main(["invert", "--config", str(cfgp2),
                   "--measurements", str(mdir), "--out", str(tmp / "r2")])
        assert rc == 2


class TestMccuq:
    def test_tiny_ensemble(self, fast_config, tmp_path):
        out = tmp_path / "mc"
        rc = main(["mccuq", "--config", str(fast_config), "--out", str(out)])
        assert rc == 0
        d = read_json(out / "ensemble.json")
        assert d["M"] == 2
        assert d["failures"] == 0
        assert len(d["sample_coeffs"]) == 2
        assert d["mean_deviation"] < 0.5


class TestPlotdata:
    def test_eigenvalues_from_config(self, fast_config, tmp_path):
        out = tmp_path / "plots"
        rc = main(["plotdata", "--result", str(fast_config),
                   "--kind", "eigenvalues", "--out", str(out)])
        assert rc == 0
        lines = (out / "eigenvalues.csv").read_text().strip().splitlines()
        assert lines[0] == "j,lambda"
        assert len(lines) == 8  # header + j = 0..6
        # strictly decaying spectrum
        vals = [float(l.split(",")[1]) for l in lines[1:]]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert (out / "eigenvalues.png").stat().st_size > 0

    def test_profile_from_reconstruction(self, pipeline_dirs):
        cfgp, _, mdir, tmp = pipeline_dirs
        out = tmp / "recon"
        main(["invert", "--config", str(cfgp), "--measurements", str(mdir),
              "--out", str(out)])
        pout = tmp / "plots"
        rc = main(["plotdata", "--result", str(out / "reconstruction.json"),
                   "--kind", "profile", "--out", str(pout)])
        assert rc == 0
        lines = (pout / "profile.csv").read_text().strip().splitlines()
        assert lines[0] == "x,f"
        assert len(lines) == 513
        assert (pout / "profile.png").stat().st_size > 0

    def test_unknown_kind_is_config_error(self, fast_config, tmp_path):
        rc = main(["plotdata", "--result", str(fast_config),
                   "--kind", "heatmap", "--out", str(tmp_path / "p")])
        assert rc == 2

    def test_wrong_input_is_config_error(self, tmp_path):
        bogus = tmp_path / "bogus.json"
        bogus.write_text("{}")
        rc = main(["plotdata", "--result", str(bogus),
                   "--kind", "eigenvalues", "--out", str(tmp_path / "p")])
        assert rc == 2


class TestExitCodes:
    def test_invalid_config_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        rc = main(["sample", "--config", str(bad), "--out", str(tmp_path / "s")])
        assert rc == 2

    def test_missing_config_file(self, tmp_path):
        rc = main(["sample", "--config", str(tmp_path / "none.json"),
                   "--out", str(tmp_path / "s")])
        assert rc == 4


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "gratinguq.cli", "sample",
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "sample_0000.json").exists()
