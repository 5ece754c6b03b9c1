import csv
import json

import jsonschema
import numpy as np
import pytest

from langevin_care import NoiseSpec, OUModel, Trajectory, io as lio
from langevin_care.cli import main
from langevin_care.montecarlo import loglog_slope, rows_to_csv, run_study, summarize

CFG = {
    "model": {"theta": [[1.0, 0.3], [0.3, 2.0]],
              "noise": {"components": [{"kind": "BM"}, {"kind": "FBM", "hurst": 0.65}]}},
    "sim": {"dt": 0.01, "T": 20.0, "seed": 3},
    "estimation": {"t": 1.0},
    "mc": {"n_reps": 2, "T_grid": [50.0], "base_seed": 1},
}


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(CFG))
    return p


def run(*args):
    return main([str(a) for a in args])


def test_trajectory_csv_round_trip(rng):
    traj = Trajectory(0.25, rng.standard_normal((7, 3)), t0=1.0)
    text = lio.trajectory_to_csv(traj)
    assert text.splitlines()[0] == "t,x1,x2,x3"
    back = lio.trajectory_from_csv(text)
    assert np.array_equal(back.values, traj.values)
    assert back.dt == pytest.approx(0.25) and back.t0 == 1.0
    for bad in ("", "t,y1\n0,1\n1,2\n", "t,x1\n0,1\n1,2\n3,4\n", "t,x1\n0,a\n1,2\n"):
        with pytest.raises(lio.InvalidInput):
            lio.trajectory_from_csv(bad)


def test_simulate_shapes_and_reproducibility(tmp_path, cfg):
    out = tmp_path / "u.csv"
    assert run("simulate", "--config", cfg, "--out", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "x1", "x2"] and len(rows) - 1 == 2001
    meta = json.loads((tmp_path / "u.json").read_text())
    lio.validate(meta, "simulate_metadata")
    assert meta["seed"] == 3 and meta["tool_version"]
    first = out.read_bytes(), (tmp_path / "u.json").read_bytes()
    assert run("simulate", "--config", cfg, "--out", out) == 0
    assert (out.read_bytes(), (tmp_path / "u.json").read_bytes()) == first


def test_simulate_one_dimensional_header(tmp_path):
    cfg = dict(CFG, model={"theta": [[1.0]], "noise": {"components": [{"kind": "BM"}]}})
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert run("simulate", "--config", p, "--out", tmp_path / "u.csv") == 0
    assert (tmp_path / "u.csv").read_text().startswith("t,x1\n")


def test_estimate(tmp_path, cfg):
    run("simulate", "--config", cfg, "--out", tmp_path / "u.csv")
    rep = tmp_path / "r.json"
    assert run("estimate", "--input", tmp_path / "u.csv", "--variance-spec", cfg, "--t", 1.0,
               "--out", rep) == 0
    d = json.loads(rep.read_text())
    lio.validate(d, "estimation_report")
    assert "residual_norm" in d and "wall_time" not in d
    assert run("estimate", "--input", tmp_path / "u.csv", "--variance-spec", cfg,
               "--select-t", "0.5,1,2", "--out", rep) == 0
    d = json.loads(rep.read_text())
    assert d["t_window"] in (0.5, 1.0, 2.0) and d["candidate_ts"] == [0.5, 1.0, 2.0]


def test_estimate_zero_convention_exit_code(tmp_path):
    (tmp_path / "z.csv").write_text(lio.trajectory_to_csv(Trajectory(0.01, np.zeros((300, 1)))))
    (tmp_path / "n.json").write_text(json.dumps(NoiseSpec.brownian(1).to_dict()))
    assert run("estimate", "--input", tmp_path / "z.csv", "--variance-spec", tmp_path / "n.json",
               "--t", 1.0, "--out", tmp_path / "r.json") == 1
    assert json.loads((tmp_path / "r.json").read_text())["zero_convention_applied"] is True


def test_errors_exit_two_without_output(tmp_path, cfg, capsys):
    out = tmp_path / "r.json"
    assert run("estimate", "--input", tmp_path / "missing.csv", "--variance-spec", cfg,
               "--t", 1.0, "--out", out) == 2
    assert not out.exists()
    assert "error" in capsys.readouterr().err
    assert run("simulate", "--config", tmp_path / "nope.json", "--out", tmp_path / "u.csv") == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(CFG, model={"theta": [[1.0, 2.0], [0.0, 1.0]], "noise": CFG["model"]["noise"]})))
    assert run("simulate", "--config", bad, "--out", tmp_path / "u.csv") == 2
    assert not (tmp_path / "u.csv").exists()
    with pytest.raises(SystemExit) as exc:
        run("estimate")
    assert exc.value.code == 2
    assert run("simulate", "--config", cfg, "--out", tmp_path / "no_dir" / "u.csv") == 2


def test_care_solve(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"b": [[1.0]], "c": [[2.0]], "d": [[3.0]], "t": 1.0}))
    assert run("care-solve", "--input", tmp_path / "c.json", "--out", tmp_path / "s.json") == 0
    d = json.loads((tmp_path / "s.json").read_text())
    lio.validate(d, "care_solution")
    assert d["theta_hat"][0][0] == pytest.approx((1 + np.sqrt(7)) / 2)
    (tmp_path / "n.json").write_text(json.dumps({"b": [[0.0]], "c": [[1.0]], "d": [[-1.0]], "t": 1.0}))
    assert run("care-solve", "--input", tmp_path / "n.json", "--out", tmp_path / "x.json") == 1
    assert not (tmp_path / "x.json").exists()


def test_theory_cov(tmp_path, cfg):
    out = tmp_path / "g.json"
    assert run("theory-cov", "--config", cfg, "--max-lag", 1.0, "--step", 0.5, "--out", out) == 0
    d = json.loads(out.read_text())
    lio.validate(d, "theory_cov")
    lio.validate({"lags": d["lags"], "matrices": d["matrices"]}, "lag_covariance")
    assert d["lags"] == [0.0, 0.5, 1.0]


def test_mc_and_clt_commands(tmp_path, cfg):
    s, m = tmp_path / "s.csv", tmp_path / "m.json"
    assert run("mc", "--config", cfg, "--out", s, "--summary", m) == 0
    rows = list(csv.reader(s.open()))
    assert rows[0] == ["T", "seed", "error_norm", "residual", "zero_convention"] and len(rows) == 3
    summary = json.loads(m.read_text())
    lio.validate(summary, "mc_summary")
    assert "slope" not in summary
    first = s.read_bytes(), m.read_bytes()
    run("mc", "--config", cfg, "--out", s, "--summary", m)
    assert (s.read_bytes(), m.read_bytes()) == first
    c = tmp_path / "c.json"
    assert run("clt-check", "--config", cfg, "--T", 100, "--n-reps", 4, "--out", c) == 0
    lio.validate(json.loads(c.read_text()), "clt_report")


def test_schema_rejects_malformed():
    with pytest.raises(jsonschema.ValidationError):
        lio.validate({"lags": [0.0]}, "lag_covariance")


def test_study_rows_sorted_and_job_independent():
    model = OUModel(np.eye(1), NoiseSpec.brownian(1))
    a = run_study(model, 1.0, [80.0, 40.0, 20.0], 2, base_seed=5)
    assert [(r.T, r.rep) for r in a] == sorted((r.T, r.rep) for r in a)
    b = run_study(model, 1.0, [80.0, 40.0, 20.0], 2, base_seed=5, jobs=2)
    assert rows_to_csv(a) == rows_to_csv(b)
    s = summarize(a)
    assert "slope" in s and len(s["median_error"]) == 3
    assert loglog_slope([1, 10, 100], [1, 0.1, 0.01]) == pytest.approx(-1)
    with pytest.raises(lio.InvalidInput):
        run_study(model, 1.0, [20.0], 0, 0)
