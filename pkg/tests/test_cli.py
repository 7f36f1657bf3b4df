import pytest

from levyvolterra.cli import ConfigError, ExperimentConfig, main


def run_cli(args, tmp_path, sub=""):
    out = tmp_path / ("out" + sub)
    out.mkdir(exist_ok=True)
    code = main(list(args) + [f"--out-dir={out}"])
    return code, out


def data_section(path):
    lines = path.read_text().splitlines()
    return [ln for ln in lines if not ln.startswith("#")]


class TestConfig:
    def test_file_and_overrides(self, tmp_path):
        cfg_file = tmp_path / "exp.cfg"
        cfg_file.write_text(
            "# comment\n"
            "kernel.beta = -0.0625\n"
            "frac.alpha = 0.4\n"
            "seed = 17\n"
        )
        cfg = ExperimentConfig.load(str(cfg_file), overrides=["frac.p=1.125"])
        assert cfg["kernel.beta"] == pytest.approx(-0.0625)
        assert cfg["frac.p"] == pytest.approx(1.125)
        assert cfg.seed() == 17

    def test_bad_line(self, tmp_path):
        cfg_file = tmp_path / "exp.cfg"
        cfg_file.write_text("this is not a key value pair\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.load(str(cfg_file))

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(None, overrides=["grid.n=four"])

    def test_missing_seed(self):
        cfg = ExperimentConfig.load(None, overrides=[])
        with pytest.raises(ConfigError):
            cfg.seed()

    def test_eps_grid_validation(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(None, overrides=["eps.grid="]).eps_grid()
        with pytest.raises(ConfigError):
            ExperimentConfig.load(None, overrides=["eps.grid=-1"]).eps_grid()

    def test_hash_is_stable_and_sensitive(self):
        a = ExperimentConfig.load(None, overrides=["seed=1"])
        b = ExperimentConfig.load(None, overrides=["seed=1"])
        c = ExperimentConfig.load(None, overrides=["seed=2"])
        assert a.digest() == b.digest()
        assert a.digest() != c.digest()


class TestCommands:
    def test_check_conditions_reference_parameters(self, tmp_path, capsys):
        code, out = run_cli(
            ["check-conditions", "--beta=-0.0625", "--p=1.125", "--alpha=0.4", "--seed=1"],
            tmp_path,
        )
        assert code == 0
        text = capsys.readouterr().out
        # the singular kernel fails the semimartingale test, its smoothed
        # version passes, and both parameter-region checks pass
        assert "semimartingale               <verdict>" in text
        lines = {ln.split()[0]: ln for ln in text.splitlines() if "<verdict>" in ln}
        assert lines["semimartingale"].rstrip().endswith("false")
        assert lines["semimartingale-perturbed"].rstrip().endswith("true")
        assert lines["Dp-analytic"].rstrip().endswith("true")
        assert lines["Cp-analytic"].rstrip().endswith("true")
        assert (out / "conditions.csv").exists()
        assert (out / "run_manifest.txt").exists()

    def test_kernel_rates_slope(self, tmp_path):
        code, out = run_cli(
            ["kernel-rates", "--beta=-0.0625", "--p=1.125", "--seed=1"], tmp_path
        )
        assert code == 0
        rows = data_section(out / "kernel_rates.csv")
        header = rows[0].split(",")
        slope = float(rows[1].split(",")[header.index("fitted_slope")])
        assert abs(slope - 119.0 / 128.0) < 0.1

    def test_simulate_writes_paths(self, tmp_path):
        code, out = run_cli(
            ["simulate", "--seed=3", "--n=128", "--epsilon=1e-3"], tmp_path
        )
        assert code == 0
        levy_lines = data_section(out / "levy_path.csv")
        assert levy_lines[0] == "t,increment,cumsum"
        assert len(levy_lines) == 1 + 128
        vol_lines = data_section(out / "volterra_path.csv")
        assert vol_lines[0] == "t,value"
        assert len(vol_lines) == 1 + 129

    def test_reproduce_figures(self, tmp_path):
        code, out = run_cli(
            ["reproduce-figures", "--seed=5", "--n=128"], tmp_path
        )
        assert code == 0
        expected = [
            "fig1_levy_path.csv",
            "fig1_volterra_path.csv",
            "fig2_integral_path.csv",
            "fig3_brownian_path.csv",
            "fig3_integral_path.csv",
        ]
        for name in expected:
            assert (out / name).exists(), name
        # figure 2 is the running integral of X(t) = t: starts at 0
        rows = data_section(out / "fig2_integral_path.csv")
        assert float(rows[1].split(",")[1]) == 0.0

    def test_convergence_csv_schema(self, tmp_path):
        code, out = run_cli(
            ["convergence", "--seed=2", "--n=128", "--mc.n_paths=50",
             "--eps.grid=1e-1,1e-2", "--mc.n_terms=200"],
            tmp_path,
        )
        assert code == 0
        rows = data_section(out / "mc_distance.csv")
        assert rows[0] == "epsilon,estimate,std_error,n_paths"
        assert len(rows) == 3

    def test_integrate_csv_schema(self, tmp_path):
        code, out = run_cli(
            ["integrate", "--seed=2", "--n=128", "--reps=4",
             "--eps.grid=1e-1,1e-2", "--mc.n_terms=200"],
            tmp_path,
        )
        assert code == 0
        rows = data_section(out / "integral_convergence.csv")
        assert rows[0] == "epsilon,mean_abs_diff,std_error,reps"
        assert len(rows) == 3

    def test_schema_error_exit_code(self, tmp_path):
        code, _ = run_cli(["convergence", "--seed=2", "--eps.grid="], tmp_path)
        assert code == 2

    def test_missing_seed_exit_code(self, tmp_path):
        code, _ = run_cli(["simulate"], tmp_path)
        assert code == 2

    def test_condition_failure_exit_code(self, tmp_path):
        code, _ = run_cli(
            ["integrate", "--seed=2", "--n=128", "--reps=2", "--p=1.5",
             "--eps.grid=1e-1", "--mc.n_terms=100"],
            tmp_path,
        )
        assert code == 3

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        target = tmp_path / "via_env"
        monkeypatch.setenv("LEVYVOLTERRA_OUTDIR", str(target))
        code = main(["kernel-rates", "--beta=1.5", "--p=1", "--seed=1",
                     "--eps.grid=1e-1,1e-2,1e-3"])
        assert code == 0
        assert (target / "kernel_rates.csv").exists()


class TestDeterminism:
    def test_rerun_byte_identical(self, tmp_path):
        args = ["convergence", "--seed=11", "--n=128", "--mc.n_paths=60",
                "--eps.grid=1e-1,1e-2", "--mc.n_terms=300"]
        _, out1 = run_cli(args, tmp_path, sub="1")
        _, out2 = run_cli(args, tmp_path, sub="2")
        assert (out1 / "mc_distance.csv").read_bytes() == (out2 / "mc_distance.csv").read_bytes()

    def test_config_hash_recorded_everywhere(self, tmp_path):
        _, out = run_cli(
            ["simulate", "--seed=3", "--n=64", "--epsilon=1e-3"], tmp_path
        )
        hashes = set()
        for name in ("levy_path.csv", "volterra_path.csv"):
            first = (out / name).read_text().splitlines()[0]
            assert first.startswith("# config_hash=")
            hashes.add(first)
        assert len(hashes) == 1
        manifest = (out / "run_manifest.txt").read_text()
        assert first.split("=", 1)[1] in manifest
