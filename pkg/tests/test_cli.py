"""Command-line interface: parsing, outputs, and exit codes."""

import csv
import json

import numpy as np
import pytest

from swe1d.cli import (CSV_COLUMNS, RunConfig, UsageError, _error_regions,
                       _fit_slopes, main, parse_args, run_single, run_sweep)
from swe1d.problems import get_problem, problem_setup
from swe1d.reconstruction import Scheme


def test_parse_args_defaults():
    cfg = parse_args(["--problem", "dam-break", "--scheme", "SkT"])
    assert cfg.problem_id == "dam-break"
    assert cfg.scheme is Scheme.SKT
    assert cfg.n_cells == 1000
    assert cfg.cfl == 0.25
    assert cfg.t_end is None
    assert not cfg.sweep


def test_parse_args_scheme_token_is_case_insensitive():
    cfg = parse_args(["--problem", "thacker", "--scheme", "ku07"])
    assert cfg.scheme is Scheme.KU07
    with pytest.raises(UsageError, match="unknown scheme"):
        parse_args(["--problem", "thacker", "--scheme", "upwind"])


def test_parse_args_cells_and_snapshots():
    cfg = parse_args(["--problem", "thacker", "--scheme", "SkT",
                      "--cells", "250", "--snapshots", "0.5,0.25",
                      "--t-end", "2.5"])
    assert cfg.n_cells == 250
    assert cfg.snapshot_times == (0.25, 0.5)
    assert cfg.t_end == 2.5
    sweep = parse_args(["--problem", "thacker", "--scheme", "SkT",
                        "--sweep", "--cells", "50,100"])
    assert sweep.sweep_cells == (50, 100)


def test_parse_args_rejects_bad_values():
    with pytest.raises(UsageError):
        parse_args(["--problem", "thacker", "--scheme", "SkT",
                    "--cells", "two"])
    with pytest.raises(UsageError):
        parse_args(["--problem", "thacker", "--scheme", "SkT",
                    "--cfl", "0.9"])
    with pytest.raises(UsageError):
        parse_args(["--problem", "nope", "--scheme", "SkT"])
    with pytest.raises(UsageError):
        RunConfig("thacker", Scheme.SKT, n_cells=2)


def test_run_single_outputs(tmp_path):
    cfg = RunConfig("lake-at-rest", Scheme.SKT, n_cells=50, t_end=0.5,
                    snapshot_times=(0.25,), out_dir=str(tmp_path))
    record = run_single(cfg)
    assert record.status == "ok"
    assert record.t_final == 0.5
    assert record.n_steps > 0
    # One snapshot plus the final state.
    assert len(record.snapshot_files) == 2

    run_json = tmp_path / "lake-at-rest-SkT-J50-run.json"
    payload = json.loads(run_json.read_text())
    assert payload["status"] == "ok"
    assert payload["config"]["scheme"] == "SkT"
    assert 0.0 < payload["errors"]["wet_h"] < 0.05

    with open(record.snapshot_files[-1], newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 51
    body = rows[1:]
    h = np.array([float(r[1]) for r in body])
    b = np.array([float(r[4]) for r in body])
    eta = np.array([float(r[5]) for r in body])
    np.testing.assert_allclose(eta, h + b, atol=1e-12)
    for r in body:
        if float(r[1]) <= 1e-10:
            assert r[3] == "" and r[8] == "" and r[9] == ""
        else:
            float(r[3]), float(r[8]), float(r[9])
    gamma = np.array([float(r[6]) for r in body])
    theta = np.array([float(r[7]) for r in body])
    assert np.all((gamma >= 0) & (gamma <= 1))
    assert np.all((theta >= 0) & (theta <= 1))


def test_run_single_records_failure(tmp_path):
    cfg = RunConfig("dam-break", Scheme.SKT, n_cells=30, t_end=1.0,
                    u_max_halt=0.5, out_dir=str(tmp_path))
    record = run_single(cfg)
    assert record.status == "numerical-failure"
    assert record.failure["kind"] == "u-max"
    assert record.failure["time"] is not None


def test_run_sweep_report(tmp_path):
    cfg = RunConfig("thacker", Scheme.SKT, t_end=0.4, sweep=True,
                    sweep_cells=(25, 50), out_dir=str(tmp_path))
    report = run_sweep(cfg)
    assert [row["status"] for row in report["runs"]] == ["ok", "ok"]
    assert report["slopes"]["wet_h"] < -0.5
    assert (tmp_path / "thacker-SkT-sweep.json").exists()
    with (tmp_path / "thacker-SkT-sweep.csv").open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["n_cells", "status"]
    assert len(rows) == 3


def test_run_sweep_needs_exact_solution(tmp_path):
    cfg = RunConfig("basin-drain", Scheme.SKT, sweep=True,
                    sweep_cells=(25,), out_dir=str(tmp_path))
    with pytest.raises(UsageError):
        run_sweep(cfg)


def test_error_regions_conventions():
    _, grid, _, _ = problem_setup("lake-at-rest", 40)
    regions = _error_regions(get_problem("lake-at-rest"), grid, 3.0)
    np.testing.assert_array_equal(regions["wet"],
                                  np.abs(grid.x_center) <= 1.0)
    _, grid, _, _ = problem_setup("slow-shock", 40)
    regions = _error_regions(get_problem("slow-shock"), grid, 0.0)
    assert "dry" not in regions
    assert regions["wet"].all()
    _, grid, _, _ = problem_setup("dam-break", 40)
    regions = _error_regions(get_problem("dam-break"), grid, 0.5)
    assert regions["dry"].any()


def test_fit_slopes():
    rows = [
        {"n_cells": 100, "status": "ok", "errors": {"wet_h": 1e-2}},
        {"n_cells": 1000, "status": "ok", "errors": {"wet_h": 1e-4}},
        {"n_cells": 500, "status": "numerical-failure", "errors": {}},
    ]
    slopes = _fit_slopes(rows)
    assert slopes["wet_h"] == pytest.approx(-2.0)
    only_one = _fit_slopes(rows[:1])
    assert only_one["wet_h"] is None


def test_main_exit_codes(tmp_path, capsys):
    ok = main(["--problem", "lake-at-rest", "--scheme", "SkT",
               "--cells", "30", "--t-end", "0.2", "--snapshots", "",
               "--out", str(tmp_path / "ok")])
    assert ok == 0

    usage = main(["--problem", "lake-at-rest", "--scheme", "wat"])
    assert usage == 1
    assert "usage error" in capsys.readouterr().err

    numerical = main(["--problem", "dam-break", "--scheme", "SkT",
                      "--cells", "30", "--u-max-halt", "0.5",
                      "--out", str(tmp_path / "fail")])
    assert numerical == 2
    assert "numerical failure" in capsys.readouterr().err

    blocker = tmp_path / "blocked"
    blocker.write_text("")
    io_err = main(["--problem", "lake-at-rest", "--scheme", "SkT",
                   "--cells", "30", "--t-end", "0.1",
                   "--out", str(blocker)])
    assert io_err == 3
    assert "i/o error" in capsys.readouterr().err
