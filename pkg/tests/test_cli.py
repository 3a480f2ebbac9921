import numpy as np
import pytest

from amlmc.cli import (
    EXIT_DIVERGENCE,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    EXIT_USAGE,
    ConfigError,
    ExperimentConfig,
    load_config,
    main,
    run_experiment,
)


def _write_config(tmp_path, body):
    path = tmp_path / "exp.ini"
    path.write_text(body)
    return str(path)


BASIC_INI = """
[experiment]
mode = variance_study
seed = 7
levels = 1:3
samples = 500
n0 = 1
horizon = 1.0

[model]
name = geometric_multi
sigma = 0.2,0.3
mu = 0.05,0.05
x0 = 1.0,1.0

[payoff]
name = european_call
strike = 1.0
"""


class TestLoadConfig:
    def test_file_values_apply(self, tmp_path):
        cfg = load_config(_write_config(tmp_path, BASIC_INI))
        assert cfg.mode == "variance_study"
        assert cfg.seed == 7
        assert (cfg.level_lo, cfg.level_hi) == (1, 3)
        assert cfg.model_name == "geometric_multi"
        assert cfg.model_params["sigma"] == (0.2, 0.3)
        assert cfg.payoff_params["strike"] == 1.0

    def test_flag_overrides_file(self, tmp_path):
        path = _write_config(tmp_path, BASIC_INI)
        cfg = load_config(path, {"seed": 99, "levels": "2:5"})
        assert cfg.seed == 99
        assert (cfg.level_lo, cfg.level_hi) == (2, 5)
        assert cfg.samples == 500  # untouched file value survives

    def test_defaults_fill_gaps(self):
        cfg = load_config(None, {"mode": "estimate"})
        assert cfg.scheme == "antithetic_milstein"
        assert cfg.n0 == 1
        assert cfg.horizon == 1.0

    def test_mode_required(self):
        with pytest.raises(ConfigError):
            load_config(None, {})

    def test_unknown_experiment_key_rejected(self, tmp_path):
        bad = BASIC_INI.replace("samples = 500", "sample = 500")
        with pytest.raises(ConfigError) as err:
            load_config(_write_config(tmp_path, bad))
        assert "sample" in str(err.value)

    def test_unknown_section_rejected(self, tmp_path):
        bad = BASIC_INI + "\n[extra]\nfoo = 1\n"
        with pytest.raises(ConfigError):
            load_config(_write_config(tmp_path, bad))

    def test_numeric_validation(self):
        with pytest.raises(ConfigError):
            load_config(None, {"mode": "estimate", "eps": "-0.1"})
        with pytest.raises(ConfigError):
            load_config(None, {"mode": "estimate", "horizon": 0.0})
        with pytest.raises(ConfigError):
            load_config(None, {"mode": "estimate", "levels": "3:1"})
        with pytest.raises(ConfigError):
            load_config(None, {"mode": "estimate", "seed": -1})
        with pytest.raises(ConfigError):
            load_config(None, {"mode": "estimate", "seed": 1 << 64})
        load_config(None, {"mode": "estimate", "seed": (1 << 64) - 1})

    def test_eps_list(self):
        cfg = load_config(None, {"mode": "complexity_study",
                                 "eps": "0.04,0.02,0.01"})
        assert cfg.epsilon == (0.04, 0.02, 0.01)


class TestExitCodes:
    def test_unknown_model_is_usage_error(self, tmp_path, capsys):
        code = main(["--mode", "estimate", "--model", "not_a_model",
                     "--out", str(tmp_path)])
        assert code == EXIT_USAGE
        err = capsys.readouterr().err
        assert "clark_cameron" in err and "geometric_multi" in err

    def test_unknown_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["--mode", "estimate", "--bogus", "1"])
        assert exc.value.code == EXIT_USAGE

    def test_unknown_mode_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["--mode", "dance"])
        assert exc.value.code == EXIT_USAGE

    def test_nonconvergence_exit(self, tmp_path):
        # cap level growth below what the accuracy target needs
        code = main(["--mode", "estimate", "--model", "geometric_multi",
                     "sigma=0.5,0.6", "--payoff", "smooth_quadratic_capped",
                     "cap=25.0", "--eps", "0.002", "--levels", "1:2",
                     "--samples", "250", "--seed", "3",
                     "--out", str(tmp_path)])
        assert code == EXIT_NONCONVERGENCE

    def test_divergence_exit(self, tmp_path, capsys):
        # absurd volatility overflows the multiplicative updates
        code = main(["--mode", "variance_study", "--model", "geometric_multi",
                     "sigma=1e12,1e12", "--payoff", "european_call",
                     "--levels", "5:5", "--samples", "100", "--seed", "1",
                     "--out", str(tmp_path)])
        assert code == EXIT_DIVERGENCE
        assert "level" in capsys.readouterr().err

    def test_validate_passes(self, tmp_path):
        code = main(["--mode", "validate", "--samples", "400", "--seed", "5",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        assert (tmp_path / "validate.csv").exists()
        assert (tmp_path / "resolved_config.ini").exists()


class TestOutputs:
    def test_variance_study_csv_shape(self, tmp_path):
        code = main(["--mode", "variance_study", "--model", "clark_cameron",
                     "--payoff", "smooth_quadratic_capped", "center=0.0",
                     "--levels", "1:4", "--samples", "600", "--seed", "11",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        lines = (tmp_path / "variance_study.csv").read_text().splitlines()
        comments = [l for l in lines if l.startswith("#")]
        data = [l for l in lines if not l.startswith("#")]
        assert any("seed=11" in c for c in comments)
        assert data[0] == "level,dt,mean_Y,var_Y,var_P,kurtosis,cost,N"
        assert len(data) == 1 + 4  # header + one row per level
        first = data[1].split(",")
        assert int(first[0]) == 1 and float(first[1]) == 0.5

    def test_numeric_cells_roundtrip(self, tmp_path):
        main(["--mode", "variance_study", "--model", "clark_cameron",
              "--payoff", "smooth_quadratic_capped", "center=0.0",
              "--levels", "1:2", "--samples", "500", "--seed", "2",
              "--out", str(tmp_path)])
        lines = [l for l in
                 (tmp_path / "variance_study.csv").read_text().splitlines()
                 if not l.startswith("#")][1:]
        for line in lines:
            for cell in line.split(",")[1:]:
                value = float(cell)
                assert format(value, ".17g") == cell

    def test_same_seed_byte_identical(self, tmp_path):
        args = ["--mode", "estimate", "--model", "geometric_multi",
                "--payoff", "smooth_quadratic_capped", "--eps", "0.05",
                "--samples", "300", "--seed", "21", "--levels", "1:6"]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out_a)]) == EXIT_OK
        assert main(args + ["--out", str(out_b)]) == EXIT_OK
        assert (out_a / "estimate.csv").read_bytes() == \
               (out_b / "estimate.csv").read_bytes()

    def test_strong_error_study_runs(self, tmp_path):
        code = main(["--mode", "strong_error_study", "--model",
                     "noncommutative_test", "--levels", "3:6",
                     "--samples", "2000", "--seed", "4",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        lines = (tmp_path / "strong_error_study.csv").read_text().splitlines()
        data = [l for l in lines if not l.startswith("#")]
        assert data[0].startswith("level,dt,rms_fine_anti")
        assert len(data) == 1 + 4

    def test_complexity_study_runs(self, tmp_path):
        code = main(["--mode", "complexity_study", "--model",
                     "geometric_multi", "sigma=0.5,0.6",
                     "--payoff", "smooth_quadratic_capped", "cap=25.0",
                     "--eps", "0.08,0.04", "--samples", "250",
                     "--seed", "6", "--levels", "1:8",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        lines = (tmp_path / "complexity_study.csv").read_text().splitlines()
        data = [l for l in lines if not l.startswith("#")]
        assert data[0] == "epsilon,total_cost,L,estimate,std_error"
        assert len(data) == 3

    def test_resolved_config_echo(self, tmp_path):
        main(["--mode", "variance_study", "--model", "clark_cameron",
              "--payoff", "european_call", "strike=1.5", "--levels", "1:2",
              "--samples", "400", "--seed", "8", "--out", str(tmp_path)])
        echo = (tmp_path / "resolved_config.ini").read_text()
        assert "strike = 1.5" in echo
        assert "seed = 8" in echo


class TestRunExperimentApi:
    def test_direct_config_object(self, tmp_path):
        cfg = ExperimentConfig(mode="variance_study",
                               model_name="clark_cameron",
                               payoff_name="smooth_quadratic_capped",
                               payoff_params={"center": 0.0},
                               level_lo=1, level_hi=2, samples=300,
                               seed=12, out=str(tmp_path))
        assert run_experiment(cfg) == EXIT_OK
