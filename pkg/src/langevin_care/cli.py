"""Command-line front end.

Every command is deterministic: the same inputs and seeds give byte-identical
files. Exit status is 0 on success, 1 when the estimator falls back to the
zero matrix (or the Riccati equation has no admissible solution) and 2 on
usage or I/O errors. Outputs are written only after all computation succeeded.

Config files are JSON::

    {
      "model": {"theta": [[1.0, 0.3], [0.3, 2.0]],
                "noise": {"components": [{"kind": "BM", "scale": 1.0},
                                         {"kind": "FBM", "hurst": 0.65}]}},
      "sim": {"dt": 0.01, "T": 100.0, "burn_in": null, "seed": 0},
      "estimation": {"t": 1.0},
      "mc": {"n_reps": 50, "T_grid": [250, 1000, 4000], "base_seed": 0},
      "output": {"trajectory": "u.csv", "metadata": "u.json"}
    }

Only the sections a command needs are required; command-line flags take
precedence over the ``output`` section.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as lio
from .asymptotics import mc_clt_check
from .care import CareCoefficients, solve_care
from .covariance import theoretical_gamma
from .errors import InvalidInput, LangevinCareError, NoSolution
from .estimator import estimate_theta, select_window
from .montecarlo import rows_to_csv, run_study, summarize
from .noise import NoiseSpec, variance_fn
from .simulate import OUModel, SimConfig, simulate_u


class UsageError(Exception):
    pass


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _section(cfg: dict, key: str) -> dict:
    if key not in cfg:
        raise UsageError(f"config is missing the '{key}' section")
    return cfg[key]


def _model(cfg: dict) -> OUModel:
    m = _section(cfg, "model")
    try:
        return OUModel(np.array(m["theta"], dtype=float), NoiseSpec.from_dict(m["noise"]))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed model section: {exc}") from None


def _out(args, cfg: dict, flag: str, key: str) -> str:
    val = getattr(args, flag, None) or cfg.get("output", {}).get(key)
    if not val:
        raise UsageError(f"no output path given for {key}")
    return val


def _write(files: dict[str, str]) -> None:
    for path, text in files.items():
        try:
            lio.write_atomic(path, text)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_simulate(args) -> int:
    cfg = _load_json(args.config)
    model = _model(cfg)
    sim = _section(cfg, "sim")
    sc = SimConfig(float(sim["dt"]), float(sim["T"]), sim.get("burn_in"), int(sim.get("seed", 0)))
    traj = simulate_u(model, sc)
    meta = {
        "theta": model.theta.tolist(), "noise": model.noise.to_dict(), "dt": sc.dt,
        "T": sc.horizon, "burn_in": sc.resolved_burn_in(model), "seed": sc.rng_seed,
        "tool_version": __version__,
    }
    lio.validate(meta, "simulate_metadata")
    out = _out(args, cfg, "out", "trajectory")
    meta_path = args.meta or cfg.get("output", {}).get("metadata") or str(Path(out).with_suffix(".json"))
    _write({out: lio.trajectory_to_csv(traj), meta_path: lio.dumps(meta)})
    return 0


def _noise_from_file(path) -> NoiseSpec:
    d = _load_json(path)
    if "model" in d:
        d = d["model"]["noise"]
    elif "noise" in d:
        d = d["noise"]
    try:
        return NoiseSpec.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed variance spec: {exc}") from None


def cmd_estimate(args) -> int:
    try:
        traj = lio.read_trajectory(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    vfn = variance_fn(_noise_from_file(args.variance_spec))
    cands = None
    if args.select_t:
        cands = _floats(args.select_t)
        t = select_window(traj, vfn, cands)
    elif args.t is not None:
        t = args.t
    else:
        raise UsageError("give --t or --select-t")
    rep = estimate_theta(traj, vfn, t, seed=args.seed, demean=args.demean)
    d = rep.to_dict()
    d.pop("wall_time")
    if cands is not None:
        d["candidate_ts"] = cands
    lio.validate(d, "estimation_report")
    _write({args.out: lio.dumps(d)})
    return 1 if rep.zero_convention_applied else 0


def cmd_care_solve(args) -> int:
    try:
        coef = CareCoefficients.from_dict(_load_json(args.input))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed coefficients: {exc}") from None
    try:
        sol = solve_care(coef, method=args.method)
    except NoSolution as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    d = sol.to_dict()
    lio.validate(d, "care_solution")
    _write({args.out: lio.dumps(d)})
    return 0


def cmd_theory_cov(args) -> int:
    cfg = _load_json(args.config)
    model = _model(cfg)
    k = int(round(args.max_lag / args.step))
    lags = args.step * np.arange(k + 1)
    g = theoretical_gamma(model.theta, variance_fn(model.noise), lags)
    d = {"theta": model.theta.tolist(), "noise": model.noise.to_dict(),
         "lags": g.lags.tolist(), "matrices": g.matrices.tolist()}
    lio.validate(d, "theory_cov")
    _write({_out(args, cfg, "out", "theory_cov"): lio.dumps(d)})
    return 0


def cmd_mc(args) -> int:
    cfg = _load_json(args.config)
    model = _model(cfg)
    mc = _section(cfg, "mc")
    sim = cfg.get("sim", {})
    t = float(_section(cfg, "estimation")["t"])
    dt = float(sim.get("dt", 0.01))
    rows = run_study(model, t, mc["T_grid"], int(mc["n_reps"]), int(mc.get("base_seed", 0)),
                     dt=dt, burn_in=sim.get("burn_in"), jobs=args.jobs)
    summary = {"theta": model.theta.tolist(), "noise": model.noise.to_dict(), "t_window": t,
               "dt": dt, "n_reps": int(mc["n_reps"]), "base_seed": int(mc.get("base_seed", 0)),
               "tool_version": __version__, **summarize(rows)}
    lio.validate(summary, "mc_summary")
    _write({_out(args, cfg, "out", "study"): rows_to_csv(rows),
            _out(args, cfg, "summary", "summary"): lio.dumps(summary)})
    return 0


def cmd_clt_check(args) -> int:
    cfg = _load_json(args.config)
    model = _model(cfg)
    sim = cfg.get("sim", {})
    t = float(args.t if args.t is not None else _section(cfg, "estimation")["t"])
    rep = mc_clt_check(model, t, args.T, args.n_reps, args.seed,
                       dt=float(sim.get("dt", 0.01)), burn_in=sim.get("burn_in"), jobs=args.jobs)
    d = rep.to_dict()
    lio.validate(d, "clt_report")
    _write({_out(args, cfg, "out", "clt_report"): lio.dumps(d)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="langevin-care", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="sample a stationary path to CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="trajectory CSV")
    s.add_argument("--meta", help="metadata JSON (default: CSV path with .json suffix)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="estimate the drift matrix from a trajectory")
    s.add_argument("--input", required=True)
    s.add_argument("--variance-spec", required=True, help="noise spec or config JSON")
    s.add_argument("--t", type=float, help="window length")
    s.add_argument("--select-t", help="comma-separated candidate windows")
    s.add_argument("--seed", type=int, default=None, help="recorded in the report")
    s.add_argument("--demean", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("care-solve", help="solve B^T X + X B - X C X + D = 0")
    s.add_argument("--input", required=True, help="JSON with b, c, d, t")
    s.add_argument("--method", choices=("schur", "newton"), default="schur")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_care_solve)

    s = sub.add_parser("theory-cov", help="stationary cross-covariance on a lag grid")
    s.add_argument("--config", required=True)
    s.add_argument("--max-lag", type=float, default=5.0)
    s.add_argument("--step", type=float, default=0.01)
    s.add_argument("--out")
    s.set_defaults(func=cmd_theory_cov)

    s = sub.add_parser("mc", help="replicated estimation study")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="study CSV")
    s.add_argument("--summary", help="summary JSON")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("clt-check", help="Monte Carlo check of the limit covariance")
    s.add_argument("--config", required=True)
    s.add_argument("--t", type=float)
    s.add_argument("--T", type=float, default=4000.0)
    s.add_argument("--n-reps", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_clt_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LangevinCareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error: bad input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
