import json
import subprocess
import sys

import numpy as np
import pytest

from latentslice import cli

EXPECTED_COLUMNS = {
    "bimodal": 1,
    "bivariate": 2,
    "gauss50": 50,
    "funnel": 10,
    "funnel-slice-baseline": 10,
    "mdp": 1,
    "finite-mixture": 2,
    "gp": 100,
    "gp-standard-ess": 100,
    "state-space": 501,
    "spike-slab": 90,
}


def run(tmp_path, *args, environ=None):
    return cli.main(["run", "--out", str(tmp_path), *args], environ=environ or {})


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    body = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, body


def test_bimodal_csv_shape(tmp_path):
    assert run(tmp_path, "--experiment", "bimodal", "--seed", "7", "--iters", "2000") == 0
    header, body = read_csv(tmp_path / "bimodal_seed7.csv")
    assert header == ["iter", "y1"]
    assert body.shape == (2000, 2)
    assert body[:, 0].tolist() == list(range(1, 2001))


def test_gauss50_csv_shape(tmp_path):
    assert run(tmp_path, "--experiment", "gauss50", "--seed", "1", "--iters", "5000") == 0
    header, body = read_csv(tmp_path / "gauss50_seed1.csv")
    assert len(header) == 51 and body.shape == (5000, 51)


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "--experiment", "bivariate", "--seed", "3", "--iters", "500") == 0
    assert (a / "bivariate_seed3.csv").read_bytes() == (b / "bivariate_seed3.csv").read_bytes()
    ja, jb = (json.loads((d / "bivariate_seed3.summary.json").read_text()) for d in (a, b))
    ja.pop("wall_time_s"), jb.pop("wall_time_s")
    assert ja == jb


def test_different_seeds_differ(tmp_path):
    run(tmp_path, "--experiment", "bimodal", "--seed", "1", "--iters", "50")
    run(tmp_path, "--experiment", "bimodal", "--seed", "2", "--iters", "50")
    assert (tmp_path / "bimodal_seed1.csv").read_bytes() != (tmp_path / "bimodal_seed2.csv").read_bytes()


def test_burnin_and_thin(tmp_path):
    assert run(tmp_path, "--experiment", "bimodal", "--iters", "100", "--burnin", "20", "--thin", "10") == 0
    _, body = read_csv(tmp_path / "bimodal_seed0.csv")
    assert body[:, 0].tolist() == [30, 40, 50, 60, 70, 80, 90, 100]


def parse(argv, environ):
    return cli.config_from_sources(cli._build_parser().parse_args(argv), environ).resolved()


def test_precedence_flags_env_file_defaults(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"experiment": "bimodal", "seed": 1, "iters": 10, "thin": 2, "lambda": 0.5}))
    env = {"LATENTSLICE_SEED": "2", "LATENTSLICE_ITERS": "20"}
    cfg = parse(["run", "--config", str(conf), "--seed", "3"], env)
    assert cfg.seed == 3  # flag beats env and file
    assert cfg.iters == 20  # env beats file
    assert cfg.thin == 2 and cfg.lam == 0.5  # file beats defaults
    assert cfg.burnin == 0  # default
    cfg = parse(["run", "--experiment", "gauss50"], {})
    assert (cfg.iters, cfg.lam, cfg.chains) == (5000, 0.1, 1)


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--experiment", "nope"],
        ["run"],
        ["run", "--experiment", "bimodal", "--iters", "abc"],
        ["run", "--experiment", "bimodal", "--lambda", "-1"],
        ["run", "--experiment", "bimodal", "--iters", "10", "--burnin", "10"],
        ["run", "--experiment", "bimodal", "--chains", "0"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_1(argv, tmp_path):
    if argv[:1] == ["run"]:
        argv = argv + ["--out", str(tmp_path)]
    try:
        code = cli.main(argv, environ={})
    except SystemExit as exc:  # argparse-level failures
        code = exc.code
    assert code == cli.EXIT_USAGE


def test_bad_env_value_is_usage_error(tmp_path):
    assert run(tmp_path, "--experiment", "bimodal", environ={"LATENTSLICE_SEED": "x"}) == cli.EXIT_USAGE


def test_bad_config_key_is_usage_error(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text('{"colour": "red"}')
    assert run(tmp_path, "--experiment", "bimodal", "--config", str(conf)) == cli.EXIT_USAGE


def test_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["run", "--experiment", "bimodal", "--iters", "10", "--out", str(blocker / "sub")], environ={}) == cli.EXIT_RUNTIME


def test_list_is_stable(capsys):
    assert cli.main(["list"]) == 0
    first = capsys.readouterr().out
    assert cli.main(["list"]) == 0
    assert capsys.readouterr().out == first
    names = [ln.split()[0] for ln in first.splitlines()]
    assert names == list(cli.CATALOG) and set(names) == set(EXPECTED_COLUMNS)


def test_db_check_passes(capsys):
    assert cli.main(["db-check", "--k", "3", "--n-states", "8"]) == 0
    assert "residual" in capsys.readouterr().out


def test_chains_write_separate_files(tmp_path):
    assert run(tmp_path, "--experiment", "bimodal", "--iters", "50", "--chains", "2") == 0
    a = (tmp_path / "bimodal_seed0_chain0.csv").read_bytes()
    b = (tmp_path / "bimodal_seed0_chain1.csv").read_bytes()
    assert a != b


@pytest.mark.parametrize("name", list(EXPECTED_COLUMNS))
def test_summary_schema(name, tmp_path):
    iters, extra = (200, ["--thin", "10"]) if name.startswith("funnel") else (20, [])
    if name in ("mdp", "finite-mixture"):
        extra = ["--burnin", "5"]
    assert run(tmp_path, "--experiment", name, "--seed", "4", "--iters", str(iters), *extra) == 0
    header, body = read_csv(tmp_path / f"{name}_seed4.csv")
    assert len(header) == EXPECTED_COLUMNS[name] + 1
    assert np.all(np.isfinite(body))
    s = json.loads((tmp_path / f"{name}_seed4.summary.json").read_text())
    assert s["schema_version"] == 1 and s["experiment"] == name and s["seed"] == 4
    assert s["n"] == body.shape[0] and s["chain"] is None
    assert set(s["config"]) == {"experiment", "seed", "iters", "burnin", "thin", "lam", "k", "chains"}
    assert [d["name"] for d in s["dimensions"]] == header[1:]
    assert isinstance(s["extras"], dict) and s["wall_time_s"] >= 0


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "latentslice.cli", "run", "--experiment", "bimodal", "--iters", "10", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "bimodal_seed0.csv").exists()
