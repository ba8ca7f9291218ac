import subprocess
import sys

import numpy as np
import pytest

from crowdctl import harness
from crowdctl.cli import main
from crowdctl.errors import ConfigError, DomainError
from crowdctl.harness import (ExperimentConfig, SeriesRecord, apply_overrides, emit_plot_data,
                              parse_config, run, write_csv)


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg.alpha == (1e-2,) and cfg.T == 1.0 and cfg.N == 250 and cfg.Nx == 250
    assert cfg.seed == 42 and cfg.cfl == 0.9 and cfg.closure == "mono-kinetic"
    assert parse_config(None).N == 250


def test_config_parsing_and_aliases(tmp_path):
    text = "# sweep\nalpha = 1e-2, 1e-3\nn_particles = 100\nhorizon_T = 0.5  # shorter\nnx = 64\n"
    cfg = parse_config(text)
    assert cfg.alpha == (1e-2, 1e-3) and cfg.N == 100 and cfg.T == 0.5 and cfg.Nx == 64
    p = tmp_path / "run.cfg"
    p.write_text(text)
    assert parse_config(str(p)) == parse_config(p)


def test_negative_alpha_names_key():
    with pytest.raises(ConfigError, match="alpha") as exc:
        parse_config("\nalpha = -1\n")
    assert exc.value.key == "alpha" and exc.value.line == 2


@pytest.mark.parametrize("text, key, line", [
    ("N = 10\nbogus = 3\n", "bogus", 2),
    ("N = 10\nN = 20\n", "N", 2),
    ("N = 2.5\n", "N", 1),
    ("cfl = 1.5\n", "cfl", 1),
    ("closure = euler\n", "closure", 1),
])
def test_config_errors(text, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key and exc.value.line == line
    assert f"key '{key}'" in str(exc.value)


def test_missing_config_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/dir/file.cfg")


def test_overrides():
    cfg = apply_overrides(parse_config(""), cfl=0.5, alpha="1e-3,1e-4", seed=None)
    assert cfg.cfl == 0.5 and cfg.alpha == (1e-3, 1e-4) and cfg.seed == 42
    with pytest.raises(ConfigError):
        apply_overrides(cfg, cfl=0.0)
    with pytest.raises(ConfigError):
        apply_overrides(cfg, colour="red")


def test_output_dir_env(monkeypatch):
    monkeypatch.setenv(harness.OUTPUT_ENV, "/tmp/somewhere")
    assert ExperimentConfig().out == "/tmp/somewhere"
    monkeypatch.delenv(harness.OUTPUT_ENV)
    assert ExperimentConfig().out == "crowdctl-out"


def test_series_record_validation():
    with pytest.raises(DomainError):
        SeriesRecord(("x", "L"), [[0, 1]])
    with pytest.raises(DomainError):
        SeriesRecord(("t", "L"), [[1, 1], [0, 1]])
    with pytest.raises(DomainError):
        SeriesRecord(("t", "L"), [[0, np.nan]])


def test_single_row_series_rejected(tmp_path):
    rec = SeriesRecord(("t", "L", "bound"), [[0.0, 1.0, 1.0]])
    with pytest.raises(DomainError):
        emit_plot_data(rec, tmp_path / "x")


def test_csv_is_round_trip_exact(tmp_path):
    rows = np.array([[0.0, 1 / 3, 0.1], [0.5, 2 / 3, 1e-300]])
    path = write_csv(SeriesRecord(("t", "L", "bound"), rows), tmp_path / "a.csv")
    back = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(back, rows)
    assert b"\r" not in path.read_bytes()


def test_overlay_script_colours(tmp_path):
    recs = [SeriesRecord(("t", "L", "bound"), [[0, 1, 1], [1, 0.5, 0.6]], f"a{k}", a)
            for k, a in enumerate((1e-2, 1e-3, 1e-4))]
    files = emit_plot_data(recs, tmp_path / "p")
    script = files[-1].read_text()
    for colour in ("black", "blue", "red"):
        assert f"'{colour}'" in script
    assert len(files) == 4
    compile(script, "p_plot.py", "exec")


@pytest.mark.parametrize("scale", ["particle", "meanfield", "hydro", "nonlinear", "riccati-check"])
def test_each_scale_passes(tmp_path, scale):
    n = 3 if scale == "riccati-check" else 64
    cfg = apply_overrides(parse_config(""), scale=scale, out=str(tmp_path), N=n, Nx=64)
    res = run(cfg)
    assert res.exit_status == 0, res.summary
    assert all(p.exists() for p in res.artifacts)
    for p in res.artifacts:
        if p.suffix == ".csv":
            data = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
            assert np.all(np.isfinite(data)) and data.shape[0] >= 2


def test_grad_closure_skips_lyapunov_check(tmp_path):
    cfg = apply_overrides(parse_config(""), scale="hydro", closure="grad", out=str(tmp_path), Nx=64)
    res = run(cfg)
    assert res.exit_status == 0
    assert "[SKIP]" in res.summary


def test_violation_gives_exit_one(tmp_path, monkeypatch):
    monkeypatch.setattr(harness, "PARTICLE_BOUND_SLACK", -0.5)
    res = run(apply_overrides(parse_config(""), out=str(tmp_path), N=20))
    assert res.exit_status == 1 and "[FAIL]" in res.summary


def test_capacity_gives_exit_two(tmp_path):
    cfg = apply_overrides(parse_config(""), scale="riccati-check", N=500, out=str(tmp_path))
    assert run(cfg).exit_status == 2


def test_runs_are_deterministic(tmp_path):
    outs = []
    for k in range(2):
        cfg = apply_overrides(parse_config(""), alpha="1e-2,1e-3", N=50, out=str(tmp_path / str(k)))
        res = run(cfg)
        outs.append({p.name: p.read_bytes() for p in res.artifacts if p.suffix == ".csv"})
    assert outs[0] == outs[1]


def test_cli_main(tmp_path, capsys):
    assert main(["particle", "--N", "30", "--out", str(tmp_path), "--alpha", "1e-2,1e-4"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and (tmp_path / "particle_plot.py").exists()
    assert main(["hydro", "--cfl", "2", "--out", str(tmp_path)]) == 2
    assert "cfl" in capsys.readouterr().err


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("N = 40\nalpha = 1e-3\n")
    assert main(["particle", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
    cfg.write_text("N = 40\nwhat = 1\n")
    assert main(["particle", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "crowdctl.cli", "riccati-check", "--N", "2",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "status: all checks passed" in proc.stdout
