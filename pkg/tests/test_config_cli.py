import csv
import json

import numpy as np
import pytest

from wavebound import cli
from wavebound.bumps import random_cauchy_data
from wavebound.config import (ExperimentConfig, default_config, load_config, parse_region,
                              validate)
from wavebound.errors import ConfigInvalid, DecayViolated
from wavebound.experiments import (_map, convergence_sweep, default_threads, load_boundary,
                                   load_profile, rows_to_csv, run, write_report)
from wavebound.field import total_energy
from wavebound.grid import GridSpec
from wavebound.regions import Ball, Box


def write_ini(path, **kw):
    lines = ["[experiment]"] + [f"{k} = {v}" for k, v in kw.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --- configuration -------------------------------------------------------------

def test_load_config_roundtrip(tmp_path):
    p = write_ini(tmp_path / "a.ini", name="bekenstein", dim=2, masses="0, 0.5",
                  sizes="64, 128", region="box:1.0,0.5", seed=3, samples=4,
                  tol="1e-7", output="out/run")
    cfg = load_config(p)
    assert cfg.masses == (0.0, 0.5) and cfg.sizes == (64, 128)
    assert cfg.make_region() == Box((-1.0, -0.5), (1.0, 0.5))
    assert cfg.tolerance == 1e-7 and cfg.seed == 3


def test_one_dimensional_defaults(tmp_path):
    assert load_config(write_ini(tmp_path / "u.ini", name="u1")).dim == 1
    assert default_config("balance", masses=(1.0,)).dim == 1


def test_gamma_default_sizes():
    assert default_config("gamma", masses=(1.0,)).sizes == (512,)
    assert default_config("gamma", dim=1, masses=(1.0,)).sizes == (256,)
    assert default_config("gamma", masses=(1.0,), sizes=(64,)).sizes == (64,)


def test_three_dimensional_default_extent(tmp_path):
    assert default_config("bekenstein", dim=3).extent == 1.25
    assert default_config("bekenstein", dim=3, extent=1.5).extent == 1.5
    assert load_config(write_ini(tmp_path / "a.ini", name="qdec", dim=3)).extent == 1.25
    assert default_config("bekenstein").extent == 1.5


def test_profile_path_relative_to_config(tmp_path):
    (tmp_path / "sub").mkdir()
    p = write_ini(tmp_path / "sub" / "u.ini", name="u1", profile_file="prof.csv")
    assert load_config(p).profile_file == str((tmp_path / "sub" / "prof.csv").resolve())


@pytest.mark.parametrize("kw", [
    dict(name="nope"),
    dict(name="bekenstein", color="red"),
    dict(name="bekenstein", sizes="100"),
    dict(name="bekenstein", sizes="8"),
    dict(name="bekenstein", masses="-1"),
    dict(name="bekenstein", tol="0"),
    dict(name="bekenstein", dim="4"),
    dict(name="bekenstein", dim="x"),
    dict(name="bekenstein", dim="1", masses="0"),
    dict(name="bekenstein", region="ball:1.4"),
    dict(name="bekenstein", region="cone:1"),
    dict(name="gamma", dim="3", masses="1"),
    dict(name="gamma", sizes="32, 40", masses="1"),
    dict(name="balance", dim="2", masses="1"),
    dict(name="eigen", sizes="32"),
    dict(name="u1", interval="1, -1"),
    dict(name="u1", levels="1"),
    dict(name="u1", samples="0"),
])
def test_invalid_configs(tmp_path, kw):
    with pytest.raises(ConfigInvalid):
        load_config(write_ini(tmp_path / "bad.ini", **kw))


def test_missing_section_and_name(tmp_path):
    (tmp_path / "a.ini").write_text("[other]\nname = u1\n")
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "a.ini")
    with pytest.raises(ConfigInvalid):
        load_config(write_ini(tmp_path / "b.ini", dim=2))
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "missing.ini")


def test_validation_precedes_compute():
    with pytest.raises(ConfigInvalid):
        run(ExperimentConfig("bekenstein", sizes=(100,)))


def test_parse_region():
    assert parse_region("ball:0.5", 3) == Ball((0.0, 0.0, 0.0), 0.5)
    with pytest.raises(ConfigInvalid):
        parse_region("box:1", 2)
    with pytest.raises(ConfigInvalid):
        parse_region("ball:a", 2)


def test_threads_environment(monkeypatch):
    monkeypatch.setenv("WAVEBOUND_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("WAVEBOUND_THREADS", "junk")
    assert default_threads() == 1
    monkeypatch.delenv("WAVEBOUND_THREADS")
    assert default_threads() == 1


# --- runs and reports -----------------------------------------------------------

def test_bekenstein_hundred_samples_pass():
    rep = run(default_config("bekenstein", samples=100))
    assert rep.verdicts == {"PASS": 100}
    assert [r["seed"] for r in rep.rows] == list(range(100))


def test_eigen_rows():
    rep = run(default_config("eigen", dim=3, sizes=(128, 256)))
    assert [r["n"] for r in rep.rows] == [128, 256]
    for r in rep.rows:
        assert r["extrapolated"] >= 2 - 1e-3 and r["verdict"] == "PASS"


def test_sample_errors_carry_index():
    def boom(x):
        if x == 2:
            raise DecayViolated("too wide")
        return x
    with pytest.raises(DecayViolated, match="sample 2"):
        _map(boom, [0, 1, 2], 1)


def test_thread_count_does_not_change_results():
    cfg = default_config("qdec", masses=(1.0,), sizes=(256,), samples=3)
    a, b = run(cfg, threads=1), run(cfg, threads=3)
    assert rows_to_csv(a.rows) == rows_to_csv(b.rows)


def test_csv_float_format(tmp_path):
    rep = run(default_config("eigen", dim=2, sizes=(64,)))
    csv_path, json_path = write_report(rep, tmp_path / "r")
    row = read_rows(csv_path)[0]
    assert float(row["lambda"]) == rep.rows[0]["lambda"]
    summary = json.loads(json_path.read_text())
    assert summary["verdicts"] == {"PASS": 1} and summary["failed"] is False


# --- command line ---------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["bekenstein", "--samples", "3", "--mass", "0", "--mass", "1"],
    ["gamma", "--dim", "1", "--mass", "1", "--samples", "2"],
    ["eigen", "--dim", "2", "--n", "64"],
    ["u1", "--samples", "2", "--N", "1024", "--extent", "8"],
    ["balance", "--mass", "1", "--N", "512", "--extent", "8", "--region", "ball:2", "--samples", "2"],
    ["qdec", "--mass", "1", "--N", "256", "--samples", "2"],
    ["sweep", "--experiment", "eigen", "--N", "64", "--levels", "3"],
])
def test_cli_runs_are_byte_identical(tmp_path, argv):
    outs = []
    for k in range(2):
        prefix = tmp_path / f"run{k}"
        assert cli.main(argv + ["--out", str(prefix), "--seed", "5"]) == 0
        outs.append(((tmp_path / f"run{k}.csv").read_bytes(),
                     (tmp_path / f"run{k}.json").read_bytes()))
    assert outs[0] == outs[1]


def test_cli_config_file_and_overrides(tmp_path):
    ini = write_ini(tmp_path / "e.ini", name="eigen", dim=3, sizes="64")
    assert cli.main(["eigen", "--config", str(ini), "--out", str(tmp_path / "e")]) == 0
    rows = read_rows(tmp_path / "e.csv")
    assert rows[0]["d"] == "3"
    assert cli.main(["eigen", "--config", str(ini), "--n", "128", "--out", str(tmp_path / "f")]) == 0
    assert read_rows(tmp_path / "f.csv")[0]["n"] == "128"
    # a config for another experiment is rejected
    assert cli.main(["gamma", "--config", str(ini), "--out", str(tmp_path / "g")]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["bekenstein", "--N", "100", "--out", str(tmp_path / "x")]) == 2
    assert "error" in capsys.readouterr().err
    # an unattainable tolerance turns verdicts into FAIL
    code = cli.main(["gamma", "--dim", "1", "--mass", "1", "--samples", "1", "--tol", "1e-14",
                     "--out", str(tmp_path / "y")])
    assert code == 1
    assert read_rows(tmp_path / "y.csv")[0]["verdict"] == "FAIL"
    with pytest.raises(SystemExit):
        cli.main(["nonsense"])


def test_cli_boundary_file(tmp_path):
    n = 64
    th = 2 * np.pi * np.arange(n) / n
    path = tmp_path / "h.csv"
    np.savetxt(path, np.column_stack([th, 1 + 0.3 * np.cos(th)]), delimiter=",",
               header="angle,value", comments="")
    assert load_boundary(path, 2).size == n
    code = cli.main(["gamma", "--boundary-file", str(path), "--mass", "1", "--refine", "1",
                     "--out", str(tmp_path / "b")])
    rows = read_rows(tmp_path / "b.csv")
    assert [r["size"] for r in rows] == ["64", "128"]
    assert code in (0, 1)
    bad = tmp_path / "bad.csv"
    np.savetxt(bad, np.column_stack([th + 0.1, th]), delimiter=",", header="angle,value",
               comments="")
    assert cli.main(["gamma", "--boundary-file", str(bad), "--mass", "1",
                     "--out", str(tmp_path / "c")]) == 2


def test_cli_profile_file(tmp_path):
    N, L = 512, 8.0
    x = -L + 2 * L * np.arange(N) / N
    path = tmp_path / "p.csv"
    np.savetxt(path, np.column_stack([x, np.exp(-x**2)]), delimiter=",", header="x,f",
               comments="")
    f = load_profile(path)
    assert f.grid.N == N and f.grid.L == pytest.approx(L)
    assert cli.main(["u1", "--profile-file", str(path), "--cut", "0", "--out",
                     str(tmp_path / "u")]) == 0
    cut_row = read_rows(tmp_path / "u.csv")[0]
    assert float(cut_row["S_right"]) == pytest.approx(np.pi / 2, rel=1e-10)
    np.savetxt(path, np.column_stack([x[:100], x[:100]]), delimiter=",", header="x,f",
               comments="")
    with pytest.raises(ConfigInvalid):
        load_profile(path)


# --- convergence sweeps -----------------------------------------------------------

def test_sweep_spectral_halfspace_entropy():
    rows = convergence_sweep(default_config("bekenstein", masses=(1.0,), sizes=(128,)), levels=4)
    judged = [r for r in rows if r["order"] is not None]
    assert all(r["verdict"] == "PASS" for r in rows if r["verdict"])
    # faster than N^-4 wherever the error is above round-off
    assert all(r["order"] >= 4 for r in judged)


def test_sweep_gamma_second_order():
    rows = convergence_sweep(default_config("gamma", dim=1, masses=(1.0,), sizes=(64,)),
                             levels=4)
    orders = [r["order"] for r in rows if r["order"] is not None]
    # errors are taken against the finest level, which biases the last order upward
    assert abs(orders[0] - 2) < 0.2 and all(1.8 < o < 2.5 for o in orders)


def test_energy_integral_refinement_stable():
    region = Ball((0.0, 0.0), 1.0)
    E = [total_energy(random_cauchy_data(GridSpec(2, N, 1.5), 1.0, 2, region))
         for N in (256, 512)]
    assert abs(E[1] - E[0]) <= 1e-10 * E[1]


def test_validate_is_idempotent():
    cfg = default_config("u1")
    assert validate(cfg) == cfg
