from __future__ import annotations

import csv
import io
import json
import math

import numpy as np
import pytest

from fppchaos import geodesy
from fppchaos.distributions import parse_dist
from fppchaos.experiments import cli
from fppchaos.experiments.config import (
    ExperimentConfig,
    load_config,
    parse_config_text,
    parse_t_grid,
)
from fppchaos.experiments.output import EXIT_CENSORED, ExperimentResult, format_cell
from fppchaos.experiments.runners import (
    decreasing_with_separation,
    run_experiment,
    valley_sample,
    valley_schedule,
)
from fppchaos.field import DynamicalField, Region
from fppchaos.parallel import ordered_map

U01 = parse_dist("uniform:0,1")


# -- config ------------------------------------------------------------------------


def test_parse_t_grid():
    assert parse_t_grid("0:1:5") == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert parse_t_grid("0.1, 0.3") == (0.1, 0.3)
    assert parse_t_grid("0:0.3:4")[1] == 0.1
    with pytest.raises(ValueError):
        parse_t_grid("0:1:0")


def test_parse_config_text():
    text = "# comment\nexperiment = scan\n  v = 8,0  # trailing\n\nsamples=10\n"
    assert parse_config_text(text) == {"experiment": "scan", "v": "8,0", "samples": "10"}
    with pytest.raises(ValueError):
        parse_config_text("just words")


def test_load_config_with_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("experiment = valleys\nsizes = 8,16\nt-grid = 0.3\nk = 2\nseed = 4\n"
                 "padding = auto\nschedule = no\n")
    cfg = load_config(p, seed=9)
    assert cfg.experiment == "valleys" and cfg.sizes == (8, 16) and cfg.t_grid == (0.3,)
    assert cfg.seed == 9 and cfg.padding is None and cfg.schedule is False
    assert cfg.targets() == [(8, 0), (16, 0)]
    assert load_config(None).targets() == [(32, 0)]
    assert ExperimentConfig(v=(5,)).targets() == [(5, 0)]


@pytest.mark.parametrize("bad", [
    {"experiment": "nope"}, {"d": 1}, {"t_grid": (1.5,)}, {"sizes": (16, 8)}, {"n_samples": 1},
    {"v": (1, 2, 3)}, {"k": 0}, {"workers": 0}, {"dist": "gauss:0,1"},
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        ExperimentConfig(**bad)


def test_unknown_config_key():
    with pytest.raises(ValueError):
        ExperimentConfig.from_mapping({"colour": "red"})
    with pytest.raises(ValueError):
        ExperimentConfig.from_mapping({"schedule": "maybe"})


# -- output -------------------------------------------------------------------------


def test_format_cell():
    assert format_cell(np.float64(0.1)) == "0.1"
    assert format_cell(np.int64(3)) == "3"
    assert format_cell(True) == "true"
    assert format_cell(float("nan")) == "nan"
    assert format_cell(None) == ""


def test_result_csv_and_json():
    res = ExperimentResult("scan", ("a", "b"), [{"a": 1, "b": "x,y"}, {"a": np.float64(2.5)}],
                           {"inf": float("inf")}, {"seed": 1})
    text = res.to_csv()
    assert text == 'a,b\r\n1,"x,y"\r\n2.5,\r\n'
    assert list(csv.reader(io.StringIO(text))) == [["a", "b"], ["1", "x,y"], ["2.5", ""]]
    assert json.loads(res.to_json())["summary"]["inf"] == "inf"


def test_decreasing_with_separation():
    assert decreasing_with_separation([3.0, 2.0, 1.0], [0.1, 0.1, 0.1])["passed"]
    assert not decreasing_with_separation([3.0, 3.5, 1.0], [0.1, 0.1, 0.1])["passed"]
    r = decreasing_with_separation([1.0, 0.9], [0.1, 0.1])
    assert r["monotone"] and not r["passed"]
    assert r["separation_z"] == pytest.approx(0.1 / math.hypot(0.1, 0.1))


# -- parallel map ---------------------------------------------------------------------


def test_ordered_map_is_worker_independent():
    xs = list(range(37))
    assert ordered_map(abs, xs, workers=1, chunk=4) == ordered_map(abs, xs, workers=3, chunk=4) == xs


# -- valleys ----------------------------------------------------------------------------


def test_single_replica_at_time_zero():
    (s,) = valley_sample(3, U01, (8, 0), k=1, t_values=(0.0,))
    _, pi, _ = geodesy.shortest_path(
        DynamicalField(3, U01, Region.around((8, 0))).config_slice(0.0))
    assert s.O_k == len(pi) and s.dT_k == 0.0


def test_valley_stats_invariants():
    for seed in range(5):
        for s in valley_sample(seed, U01, (10, 0), k=3, t_values=(0.2, 0.6)):
            M = s.overlaps
            np.testing.assert_array_equal(M, M.T)
            assert M.shape == (4, 4)
            assert s.dT_k >= -1e-12
            assert s.O_k == M[~np.eye(4, dtype=bool)].max()
            assert np.all(M <= np.minimum.outer(np.diag(M), np.diag(M)))


def test_valley_schedule_shape():
    sch = valley_schedule(U01, 64, d=2, eps=0.1)
    assert sch["t"] == pytest.approx(0.1 ** 0.25)
    assert sch["k"] >= 1 and sch["psi"] > 0
    assert valley_schedule(U01, 64, d=2, eps=0.1, c=2.0)["psi"] < sch["psi"]


# -- runners -------------------------------------------------------------------------------


def test_var_scaling_point_mass():
    cfg = ExperimentConfig(experiment="var-scaling", dist="atomic:1=1", sizes=(4, 6, 8),
                           n_samples=5)
    res = run_experiment(cfg)
    assert [r["var_T"] for r in res.rows] == [0.0, 0.0, 0.0]
    assert [r["mean_T"] for r in res.rows] == [4.0, 6.0, 8.0]


def test_var_scaling_needs_three_sizes():
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(experiment="var-scaling", sizes=(4, 8), n_samples=4))


def test_scan_rows_and_summary():
    cfg = ExperimentConfig(experiment="scan", sizes=(4, 8), t_grid=(0.0, 1.0), n_samples=20,
                           coinfluence=True)
    res = run_experiment(cfg)
    assert len(res.rows) == 4
    t0 = [r for r in res.rows if r["t"] == 0.0]
    assert all(r["corr"] == pytest.approx(1.0) for r in t0)
    assert all(math.isfinite(r["coinfluence_sum"]) for r in res.rows)
    assert set(res.summary["transition_scale"]) == {"4", "8"}
    assert res.exit_code == 0


def test_transition_runner_small():
    cfg = ExperimentConfig(experiment="transition", v=(6, 0), n_samples=20, alphas=(0.5, 2.0))
    res = run_experiment(cfg)
    assert [r["alpha"] for r in res.rows] == [0.0, 0.5, 2.0]
    info = res.summary["sizes"]["6"]
    assert len(info["corr_steps"]) == 2


def test_lemma_runner_small():
    res = run_experiment(ExperimentConfig(experiment="lemmas", n_samples=10, box=(3, 3)))
    status = {r["check"]: r["status"] for r in res.rows}
    assert status["positive_part"] == "pass" and status["negative_control"] == "pass"
    assert status["integer_bound"] == "skip"
    res = run_experiment(ExperimentConfig(experiment="lemmas", n_samples=4, box=(3, 3),
                                          dist="atomic:1=0.5,2=0.5"))
    status = {r["check"]: r["status"] for r in res.rows}
    assert status["integer_bound"] == "pass" and res.exit_code == 0


# -- cli -------------------------------------------------------------------------------------


def test_cli_scan_to_stdout(capsys):
    code = cli.main(["scan", "--v", "4", "--samples", "6", "--t-grid", "0,0.5"])
    out = capsys.readouterr().out
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["t"] for r in rows] == ["0.0", "0.5"] and rows[0]["size"] == "4"


def test_cli_writes_files(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("sizes = 4,6\nsamples = 6\nt_grid = 0.5\n")
    out = tmp_path / "res" / "scan.csv"
    code = cli.main(["scan", "--config", str(cfg), "--out", str(out), "--plot"])
    assert code == 0
    assert out.exists() and out.with_suffix(".json").exists() and out.with_suffix(".gp").exists()
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["meta"]["v"] == [[4, 0], [6, 0]]
    assert "wrote" in capsys.readouterr().err


def test_cli_oracle_prints_json(capsys):
    code = cli.main(["oracle"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0 and payload["summary"]["failures"] == 0
    assert payload["summary"]["max_abs_residual"] <= 1e-9


def test_cli_bad_input(capsys):
    assert cli.main(["scan", "--dist", "gauss:0,1"]) == 1
    with pytest.raises(SystemExit):
        cli.main(["unknown"])


def test_cli_censoring_exit_code(capsys):
    assert cli.main(["scan", "--v", "6", "--samples", "4", "--padding", "0"]) == EXIT_CENSORED
