import json
import math
import warnings
from pathlib import Path

import numpy as np
import pytest

from mwlens.cli import (load_config, main, parse_config, parse_quantity,
                        run_experiment)
from mwlens.errors import AliasingWarning, ConfigError

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def natural_image_config(**overrides):
    cfg = {
        "particle": {"mass": 1.0, "charge": -1.0, "hbar": 1.0, "c_light": 50.0},
        "carrier": {"k0": 1.0},
        "grid": {"n_points": 4096, "xi_span": 160.0},
        "input": {"type": "asymmetric_pair", "sep": 6.0, "sigma": 1.0,
                  "amp_ratio": 0.5},
        "lens": {"E0": 0.5, "omega_m": 1.0, "v_p": 1.0, "L": 0.5,
                 "mode": "quadratic"},
        "imaging": {"L1": 6.0},
        "experiment": {"name": "image"},
        "output": {"format": "both"},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg, indent=2))
    return p


class TestQuantityParsing:
    @pytest.mark.parametrize("text,dim,expected", [
        ("1 cm", "length", 0.01),
        ("100 nm", "length", 1e-7),
        ("3 keV", "energy", 3e3 * 1.602176634e-19),
        ("1 kV/cm", "efield", 1e5),
        ("10 GHz", "frequency", 1e10),
        (2.5, "length", 2.5),
        ("2.5", "length", 2.5),
    ])
    def test_accepted(self, text, dim, expected):
        assert parse_quantity(text, dim, "t") == pytest.approx(expected,
                                                               rel=1e-12)

    @pytest.mark.parametrize("text,dim", [
        ("1 parsec", "length"), ("fast", "velocity"), (True, "length"),
        ("3 eV", "length"),
    ])
    def test_rejected(self, text, dim):
        with pytest.raises(ConfigError):
            parse_quantity(text, dim, "t")


class TestValidation:
    def test_empty_config_names_missing_field(self):
        with pytest.raises(ConfigError, match="particle"):
            parse_config({})

    def test_unknown_key_lists_valid(self):
        cfg = natural_image_config()
        cfg["frobnicate"] = 1
        with pytest.raises(ConfigError, match="experiment"):
            parse_config(cfg)

    def test_n_and_vp_conflict(self):
        cfg = natural_image_config()
        cfg["lens"]["n"] = 50.0  # both n and v_p present
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(cfg)

    def test_omega_and_frequency_conflict(self):
        cfg = natural_image_config()
        cfg["lens"]["frequency"] = 1.0
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(cfg)

    def test_energy_and_k0_conflict(self):
        cfg = natural_image_config()
        cfg["carrier"]["kinetic_energy"] = 1.0
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(cfg)

    def test_species_with_overrides_rejected(self):
        cfg = natural_image_config()
        cfg["particle"] = {"species": "electron", "mass": 2.0}
        with pytest.raises(ConfigError, match="preset"):
            parse_config(cfg)

    def test_unused_sections_rejected(self):
        cfg = natural_image_config()
        cfg["experiment"] = {"name": "disperse", "tau": 1.0}
        with pytest.raises(ConfigError, match="not used"):
            parse_config(cfg)

    def test_electron_energy_echoes_consistent_k0(self):
        # k0 from the config energy must satisfy k0 = m v_g / hbar.
        cfg = {
            "particle": {"species": "electron"},
            "carrier": {"kinetic_energy": "2555.062 eV"},
            "input": {"type": "gaussian", "sigma": "100 nm"},
            "experiment": {"name": "disperse", "tau": 0.0},
        }
        sc = parse_config(cfg)
        prov = sc.provenance()
        from mwlens import PhysicalContext
        ctx = PhysicalContext.electron()
        k0 = prov["si"]["k0"]
        v_g = prov["si"]["v_group"]
        assert k0 == pytest.approx(ctx.mass * v_g / ctx.hbar, rel=1e-12)
        assert v_g == pytest.approx(ctx.c_light / 10, rel=1e-4)

    def test_shipped_configs_validate(self):
        for name in ("image_m2.json", "lens_electron.json",
                     "aberration_sweep.json", "resolution.json"):
            load_config(CONFIG_DIR / name)


class TestExperiments:
    def test_disperse_tau_zero_dump_identical(self, tmp_path):
        cfg = natural_image_config(
            experiment={"name": "disperse", "tau": 0.0})
        del cfg["lens"], cfg["imaging"]
        config = parse_config(cfg)
        out = tmp_path / "run"
        run_experiment(config, out, quiet=True)
        assert (out / "input.csv").read_bytes() == (out / "output.csv").read_bytes()

    def test_disperse_variance_grows(self, tmp_path):
        cfg = natural_image_config(
            experiment={"name": "disperse", "tau": 2.0},
            input={"type": "gaussian", "sigma": 1.0})
        del cfg["lens"], cfg["imaging"]
        summary = run_experiment(parse_config(cfg), tmp_path / "r", quiet=True)
        assert summary["results"]["variance_out_si"] == pytest.approx(2.0, abs=1e-6)

    def test_disperse_by_distance(self, tmp_path):
        # distance = v_g tau; with k0 = 1 in model units, v_g = 1
        cfg = natural_image_config(
            experiment={"name": "disperse", "distance": 2.0},
            input={"type": "gaussian", "sigma": 1.0})
        del cfg["lens"], cfg["imaging"]
        summary = run_experiment(parse_config(cfg), tmp_path / "r", quiet=True)
        assert summary["results"]["tau_si"] == pytest.approx(2.0, rel=1e-12)
        assert summary["results"]["variance_out_si"] == pytest.approx(2.0, abs=1e-6)

    def test_image_m2_fidelity(self, tmp_path):
        summary = run_experiment(load_config(CONFIG_DIR / "image_m2.json"),
                                 tmp_path / "r", quiet=True)
        res = summary["results"]
        assert res["fidelity"] >= 0.999
        assert res["magnification_design"] == pytest.approx(-2.0, rel=1e-12)
        assert res["magnification_estimated"] == pytest.approx(-2.0, rel=0.02)
        assert res["skewness_in"] * res["skewness_out"] < 0

    def test_lens_electron_f_number(self, tmp_path):
        summary = run_experiment(load_config(CONFIG_DIR / "lens_electron.json"),
                                 tmp_path / "r", quiet=True)
        res = summary["results"]
        assert res["f_number"] == pytest.approx(5.11, abs=0.01)
        assert res["f_number_kinematic"] == pytest.approx(res["f_number"],
                                                          rel=1e-9)
        assert abs(res["delta_phi_rad"]) < 1e-3

    def test_resolution_config(self, tmp_path):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasingWarning)
            summary = run_experiment(load_config(CONFIG_DIR / "resolution.json"),
                                     tmp_path / "r", quiet=True)
        assert 0.5 <= summary["results"]["resolution_over_lambda0_fnumber"] <= 2.0

    def test_envelope_csv_schema(self, tmp_path):
        cfg = natural_image_config()
        config = parse_config(cfg)
        out = tmp_path / "r"
        run_experiment(config, out, quiet=True)
        lines = (out / "input.csv").read_text().splitlines()
        assert lines[0] == "xi,re_psi,im_psi,abs2"
        assert len(lines) == 1 + config.grid_n
        xi, re, im, a2 = map(float, lines[1].split(","))
        assert a2 == pytest.approx(re**2 + im**2, rel=1e-12)

    def test_summary_recomputable_from_dump(self, tmp_path):
        # every summary quantity must be recomputable from the CSVs
        config = load_config(CONFIG_DIR / "image_m2.json")
        out = tmp_path / "r"
        summary = run_experiment(config, out, quiet=True)
        data_in = np.loadtxt(out / "input.csv", delimiter=",", skiprows=1)
        data_out = np.loadtxt(out / "output.csv", delimiter=",", skiprows=1)

        def var(d):
            w = d[:, 3] / d[:, 3].sum()
            mu = (d[:, 0] * w).sum()
            return ((d[:, 0] - mu)**2 * w).sum()

        mag = math.sqrt(var(data_out) / var(data_in))
        assert mag == pytest.approx(
            abs(summary["results"]["magnification_estimated"]), rel=1e-9)


class TestReproducibility:
    def test_byte_identical_payloads(self, tmp_path):
        config = load_config(CONFIG_DIR / "image_m2.json")
        a, b = tmp_path / "a", tmp_path / "b"
        run_experiment(config, a, quiet=True)
        run_experiment(config, b, quiet=True)
        for name in ("results.json", "input.csv", "output.csv",
                     "reference.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


class TestMainEntry:
    def test_run_exit_zero(self, tmp_path):
        cfg = write_config(tmp_path, natural_image_config())
        assert main(["run", str(cfg), "--out-dir", str(tmp_path / "o"),
                     "--quiet"]) == 0
        assert (tmp_path / "o" / "results.json").exists()

    def test_check_exit_zero(self, tmp_path):
        cfg = write_config(tmp_path, natural_image_config())
        assert main(["check", str(cfg), "--quiet"]) == 0

    def test_format_flag_json_only(self, tmp_path):
        cfg = write_config(tmp_path, natural_image_config())
        out = tmp_path / "o"
        assert main(["run", str(cfg), "--out-dir", str(out),
                     "--format", "json", "--quiet"]) == 0
        assert (out / "results.json").exists()
        assert not (out / "input.csv").exists()

    def test_format_flag_csv_only(self, tmp_path):
        cfg = write_config(tmp_path, natural_image_config())
        out = tmp_path / "o"
        assert main(["run", str(cfg), "--out-dir", str(out),
                     "--format", "csv", "--quiet"]) == 0
        assert (out / "input.csv").exists()
        assert not (out / "results.json").exists()

    def test_config_error_exit_two(self, tmp_path):
        cfg = write_config(tmp_path, {"particle": {"species": "positron"}})
        assert main(["check", str(cfg), "--quiet"]) == 2
        assert main(["run", str(tmp_path / "nope.json"), "--quiet"]) == 2

    def test_numerical_guard_exit_three(self, tmp_path):
        bad = natural_image_config(grid={"n_points": 64, "xi_span": 160.0})
        cfg = write_config(tmp_path, bad)
        assert main(["run", str(cfg), "--out-dir", str(tmp_path / "o"),
                     "--quiet"]) == 3

    def test_io_error_exit_four(self, tmp_path):
        cfg = write_config(tmp_path, natural_image_config())
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        assert main(["run", str(cfg), "--out-dir", str(blocker / "sub"),
                     "--quiet"]) == 4

    def test_sweep_verb(self, tmp_path):
        cfg = write_config(tmp_path, natural_image_config())
        out = tmp_path / "sweep"
        assert main(["sweep", str(cfg), "--param", "imaging.L1",
                     "--values", "6.0,8.0", "--out-dir", str(out),
                     "--quiet"]) == 0
        agg = json.loads((out / "sweep_summary.json").read_text())
        assert set(agg["results"]) == {"6.0", "8.0"}
        m6 = agg["results"]["6.0"]["magnification_design"]
        m8 = agg["results"]["8.0"]["magnification_design"]
        assert m6 == pytest.approx(-2.0, rel=1e-12)
        assert m8 == pytest.approx(-1.0, rel=1e-12)
        assert (out / "imaging.L1=6.0" / "results.json").exists()
