import json
import os
import subprocess
import sys

import pytest

from planck_lab import cli
from planck_lab.config import load_config
from planck_lab.report import BALL_COLUMNS, ExperimentReport

SMALLMASS_CIRCLE = ["run", "smallmass", "--manifold", "circle", "--family", "cos:k=20", "--a", "5",
                    "--eps", "0.1", "--delta", "0.3"]


def run(argv, outdir):
    return cli.main(argv + ["--outdir", str(outdir), "--quiet"])


def test_smallmass_circle_example(tmp_path, capsys):
    assert cli.main(SMALLMASS_CIRCLE + ["--outdir", str(tmp_path)]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "K_over_J=1.0000" in out and "J=10" in out
    csv = (tmp_path / "smallmass_cos_k_20.csv").read_text().splitlines()
    assert csv[1].split(",") == list(BALL_COLUMNS)
    assert len(csv) - 2 == 10
    rep = ExperimentReport.from_json((tmp_path / "smallmass_cos_k_20.json").read_text())
    assert rep.config["families"] == ["cos:k=20"] and "outdir" not in rep.config
    assert rep.to_dict()["tool_version"]


def test_green_example(tmp_path, capsys):
    assert cli.main(["run", "green", "--manifold", "sphere", "--family", "zonal:l=20",
                     "--outdir", str(tmp_path)]) == cli.EXIT_OK
    out = capsys.readouterr().out
    resid = float(out.split("residual=")[1].split()[0])
    assert resid < 1e-6


def test_precondition_violation_exits_1(tmp_path, capsys):
    code = run(SMALLMASS_CIRCLE[:-1] + ["2.0"], tmp_path)
    assert code == cli.EXIT_CONFIG
    assert "delta" in capsys.readouterr().err
    assert not list(tmp_path.iterdir())


@pytest.mark.parametrize("argv", [
    ["run", "nonsense"],
    ["run", "smallmass"],
    ["run", "smallmass", "--family", "zonal:l=q"],
    ["run", "smallmass", "--family", "zonal:l=10", "--seed", "abc"],
    ["run", "smallmass", "--config", "/nonexistent.ini"],
    ["selftest", "--criteria", "42"],
    ["selftest", "--criteria", "one"],
])
def test_usage_errors_exit_1(argv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        code = cli.main(argv)
        raise SystemExit(code)
    assert exc.value.code == cli.EXIT_CONFIG


def test_assertion_failure_exits_2(tmp_path):
    # at a = 5 one torus ball has no zero within R/3 of its center
    code = run(["run", "smallmass", "--family", "torus:N=25,preset=random,seed=0", "--a", "5"], tmp_path)
    assert code == cli.EXIT_ASSERT
    rep = json.loads((tmp_path / "smallmass_torus_N_25_preset_random_seed_0.json").read_text())
    assert rep["assertions"]["nodal_points_found"] is False


def test_config_file_and_flag_override(tmp_path):
    ini = tmp_path / "exp.ini"
    assert cli.main(SMALLMASS_CIRCLE + ["--write-config", str(ini)]) == cli.EXIT_OK
    cfg = load_config(str(ini))
    assert cfg.delta == 0.3 and cfg.families == ("cos:k=20",)
    out = tmp_path / "o"
    assert run(["run", "smallmass", "--config", str(ini), "--delta", "0.2", "--name", "x"], out) == 0
    rep = json.loads((out / "x.json").read_text())
    assert rep["config"]["delta"] == 0.2 and rep["summary"]["delta"] == 0.2


def test_artifacts_byte_identical_across_runs_and_dirs(tmp_path):
    argv = ["run", "sweep", "--family", "zonal:l=10", "--family", "torus:N=25,preset=random,seed=2",
            "--format", "json,csv", "--plot", "rho_vs_delta,rho_histogram"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv, a) == run(argv, b)
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b)) and len(names) == 8
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_env_outdir_and_threads(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTDIR, str(tmp_path / "env"))
    assert cli.main(["run", "weyl", "--family", "zonal:l=10", "--family", "cos:k=3", "--quiet"]) == 0
    assert (tmp_path / "env" / "weyl.json").exists()
    assert cli.main(["run", "weyl", "--family", "zonal:l=10", "--quiet", "--threads", "2",
                     "--outdir", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "weyl.json").exists()


def test_plotdata_subcommand(tmp_path, capsys):
    assert run(["run", "hwexample"], tmp_path) == cli.EXIT_OK
    capsys.readouterr()
    assert cli.main(["plotdata", str(tmp_path / "hwexample.json"), "--kind", "ratio_vs_k"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# columns: k") and len(lines) == 5
    target = tmp_path / "p.csv"
    assert cli.main(["plotdata", str(tmp_path / "hwexample.json"), "--kind", "ratio_vs_k", "-o", str(target)]) == 0
    assert target.read_text().splitlines() == lines
    assert cli.main(["plotdata", str(tmp_path / "hwexample.json"), "--kind", "rho_vs_delta"]) == cli.EXIT_CONFIG
    assert cli.main(["plotdata", str(tmp_path / "missing.json"), "--kind", "rho_vs_delta"]) == cli.EXIT_CONFIG


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "planck_lab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("planck_lab ")
