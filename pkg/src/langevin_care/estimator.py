"""Drift estimation through the perturbed Riccati equation.

From a cross-covariance function gamma and the driver variance v the
coefficients are

    B_t = int_0^t (gamma(s) - gamma(s)^T) ds
    C_t = int_0^t (t - s) (gamma(s) + gamma(s)^T) ds
    D_t = v(t) - (2 gamma(0) - gamma(t) - gamma(t)^T)

and the estimate is the stabilising PSD solution of
``B^T X + X B - X C X + D = 0``. If C or D fails the positive-definiteness
pre-check, or no solution exists, the estimate is the zero matrix.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .care import (
    CareCoefficients,
    Certificate,
    PerturbationDiagnostics,
    certify_uniqueness,
    solve_care,
)
from .covariance import LagCovariance, empirical_gamma, lag_grid
from .errors import InvalidInput, NoSolution, WindowSelectionFailed
from .matrix_core import min_eig, spectral_norm
from .noise import Trajectory, VarianceFunction

PD_RTOL = 1e-10


def _trapz_weights(m: int, h: float) -> np.ndarray:
    w = np.full(m, h)
    w[0] = w[-1] = 0.5 * h
    return w


def build_coefficients(gamma: LagCovariance, vfn: VarianceFunction, t: float) -> CareCoefficients:
    """Riccati coefficients from gamma on a uniform lag grid starting at 0."""
    if gamma.lags[0] != 0.0:
        raise InvalidInput("lag grid must start at 0")
    if t <= 0:
        raise InvalidInput("t must be positive")
    k = gamma.index(t)
    if k == 0:
        raise InvalidInput("t must be a positive grid lag")
    lags = gamma.lags[: k + 1]
    h = np.diff(lags)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise InvalidInput("lag grid must be uniform on [0, t]")
    g = gamma.matrices[: k + 1]
    gt = np.transpose(g, (0, 2, 1))
    w = _trapz_weights(k + 1, float(h[0]))
    t_grid = float(lags[-1])
    b = np.einsum("k,kij->ij", w, g - gt)
    c = np.einsum("k,kij->ij", w * (t_grid - lags), g + gt)
    d = vfn(t_grid) - (2 * g[0] - g[-1] - gt[-1])
    return CareCoefficients(b, c, d, t_grid)


def pd_precheck(coef: CareCoefficients, rtol: float = PD_RTOL) -> tuple[bool, float, float]:
    """Relative PD test of C and D: ``min_eig > rtol * ||M||``."""
    out = []
    for m in (coef.c, coef.d):
        nrm = spectral_norm(m)
        out.append(min_eig(m) / nrm if nrm > 0 else -np.inf)
    return bool(out[0] > rtol and out[1] > rtol), out[0], out[1]


@dataclass
class EstimationReport:
    theta_hat: np.ndarray
    coefficients: CareCoefficients
    residual_norm: float
    certificate: Certificate
    zero_convention_applied: bool
    t_window: float
    diagnostics: PerturbationDiagnostics | None = None
    seed: int | None = None
    wall_time: float = 0.0
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "theta_hat": np.asarray(self.theta_hat).tolist(),
            "coefficients": self.coefficients.to_dict(),
            "residual_norm": self.residual_norm,
            "certificate": self.certificate.to_dict(),
            "zero_convention_applied": self.zero_convention_applied,
            "t_window": self.t_window,
            "diagnostics": None if self.diagnostics is None else self.diagnostics.to_dict(),
            "seed": self.seed,
            "wall_time": self.wall_time,
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def estimate_from_gamma(gamma: LagCovariance, vfn: VarianceFunction, t: float,
                        seed: int | None = None) -> EstimationReport:
    """Solve the Riccati equation built from a given covariance function."""
    start = time.perf_counter()
    coef = build_coefficients(gamma, vfn, t)
    ok, _, _ = pd_precheck(coef)
    n = coef.dim
    message = ""
    if ok:
        try:
            sol = solve_care(coef)
            return EstimationReport(
                sol.theta_hat, coef, sol.residual_norm, sol.certificate, False,
                coef.t_window, seed=seed, wall_time=time.perf_counter() - start,
            )
        except NoSolution as exc:
            message = f"no solution: {exc}"
    else:
        message = "C or D failed the positive-definiteness pre-check"
    zero = np.zeros((n, n))
    return EstimationReport(
        zero, coef, spectral_norm(coef.residual(zero)), certify_uniqueness(coef), True,
        coef.t_window, seed=seed, wall_time=time.perf_counter() - start, message=message,
    )


def estimate_theta(u: Trajectory, vfn: VarianceFunction, t: float,
                   seed: int | None = None, demean: bool = False) -> EstimationReport:
    """Estimate the drift matrix from an observed path."""
    if not u.span > t:
        raise InvalidInput("trajectory span must exceed t")
    if u.dim != vfn.dim:
        raise InvalidInput("trajectory and variance function dimensions differ")
    gamma = empirical_gamma(u, lag_grid(t, u.dt), demean=demean)
    return estimate_from_gamma(gamma, vfn, t, seed=seed)


def window_score(coef: CareCoefficients) -> float:
    ok, sc, sd = pd_precheck(coef)
    return min(sc, sd) if ok else -np.inf


def select_window(u: Trajectory, vfn: VarianceFunction, candidate_ts) -> float:
    """Pick the best-conditioned window among ``candidate_ts``.

    Each candidate is scored by ``min(min_eig(C)/||C||, min_eig(D)/||D||)``;
    candidates failing the PD pre-check are discarded and ties go to the
    smallest t.
    """
    cands = sorted(float(x) for x in candidate_ts)
    if not cands:
        raise InvalidInput("no candidate windows")
    for c in cands:
        lag_grid(c, u.dt)
    gamma = empirical_gamma(u, lag_grid(cands[-1], u.dt))
    best, best_score = None, -np.inf
    for c in cands:
        score = window_score(build_coefficients(gamma, vfn, c))
        if score > best_score:
            best, best_score = c, score
    if best is None:
        raise WindowSelectionFailed("every candidate window failed the PD pre-check")
    return best
