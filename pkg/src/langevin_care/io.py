"""File formats: trajectory CSV, JSON reports and their schemas."""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import InvalidInput
from .noise import Trajectory

SCHEMAS = ("care_solution", "estimation_report", "clt_report", "lag_covariance",
           "mc_summary", "simulate_metadata", "theory_cov")


def trajectory_to_csv(traj: Trajectory) -> str:
    """Header ``t,x1,...,xn`` then one row per sample, full round-trip precision."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{i + 1}" for i in range(traj.dim)])
    for t, row in zip(traj.times, traj.values):
        w.writerow([repr(float(t))] + [repr(float(x)) for x in row])
    return buf.getvalue()


def trajectory_from_csv(text: str) -> Trajectory:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise InvalidInput("empty trajectory file")
    header = [h.strip() for h in rows[0]]
    n = len(header) - 1
    if n < 1 or header != ["t"] + [f"x{i + 1}" for i in range(n)]:
        raise InvalidInput("trajectory header must be t,x1,...,xn")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidInput(f"non-numeric trajectory entry: {exc}") from None
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != n + 1:
        raise InvalidInput("trajectory needs at least two rows of n+1 columns")
    dts = np.diff(data[:, 0])
    dt = float(dts.mean())
    if not dt > 0 or not np.allclose(dts, dt, rtol=1e-6, atol=0):
        raise InvalidInput("trajectory must be equispaced in time")
    return Trajectory(dt, data[:, 1:], float(data[0, 0]))


def read_trajectory(path) -> Trajectory:
    return trajectory_from_csv(Path(path).read_text())


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path, text: str) -> None:
    """Write through a temporary file so a failure leaves no partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(name)
    text = resources.files(__package__).joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def validate(obj, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``obj`` does not match schema ``name``."""
    jsonschema.validate(obj, load_schema(name))
