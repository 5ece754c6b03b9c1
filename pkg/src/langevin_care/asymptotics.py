"""Limit distribution of the drift estimator.

If ``sqrt(T) vec(gamma_hat - gamma)`` converges to a Gaussian process X on
``[0, t]``, then ``sqrt(T) vec(C_hat - C, B_hat - B, D_hat - D) -> L1(X)`` and
``sqrt(T) vec(Theta_hat - Theta) -> L2 L1(X)``. This module builds both maps,
the covariance of X for Gaussian drivers, and a Monte Carlo check of the
propagated covariance.

Stacking order is ``(dC, dB, dD)`` top to bottom, each block column-stacked.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covariance import LagCovariance, QuadratureConfig, theoretical_gamma
from .errors import InvalidInput, NotStable, TailNotIntegrable
from .estimator import build_coefficients, estimate_theta
from .matrix_core import commutation_matrix, kron_sum, stability_report, vec
from .noise import child_seed, variance_fn
from .simulate import OUModel, SimConfig, simulate_u

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErrorPath:
    """An n^2-dimensional path on ``[0, t]``; row k is vec-ordered."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != g.size or g.size < 2 or np.any(np.diff(g) <= 0):
            raise InvalidInput("grid must be ascending with one row of values per point")
        n = int(round(np.sqrt(v.shape[1])))
        if n * n != v.shape[1]:
            raise InvalidInput("path values must have n^2 columns")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(round(np.sqrt(self.values.shape[1])))

    @classmethod
    def from_lag_covariance(cls, gamma: LagCovariance) -> "ErrorPath":
        return cls(gamma.lags, np.stack([vec(m) for m in gamma.matrices]))


def tilde(values: np.ndarray) -> np.ndarray:
    """Reorder vec(M) entries into vec(M^T), row-wise on a (m, n^2) array."""
    v = np.asarray(values, dtype=float)
    n = int(round(np.sqrt(v.shape[-1])))
    return v @ commutation_matrix(n).T


def _trapz_weights(grid: np.ndarray) -> np.ndarray:
    h = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def l1_weights(grid, t: float, n: int) -> np.ndarray:
    """Matrix W with ``L1(X) = W @ concat(X_{s_0}, ..., X_{s_m})``.

    The dD block is ``X_t + X~_t - 2 X_0``, matching
    ``D_hat - D = -(2 dgamma(0) - dgamma(t) - dgamma(t)^T)``.
    """
    grid = np.asarray(grid, dtype=float)
    if abs(grid[0]) > 1e-12 or abs(grid[-1] - t) > 1e-9 * max(1.0, t):
        raise InvalidInput("grid must start at 0 and end at t")
    n2 = n * n
    eye = np.eye(n2)
    k = commutation_matrix(n)
    w = _trapz_weights(grid)
    m = grid.size
    out = np.zeros((3 * n2, m * n2))
    for i in range(m):
        sl = slice(i * n2, (i + 1) * n2)
        out[:n2, sl] = w[i] * (t - grid[i]) * (eye + k)
        out[n2:2 * n2, sl] = w[i] * (eye - k)
    out[2 * n2:, (m - 1) * n2:] += eye + k
    out[2 * n2:, :n2] -= 2 * eye
    return out


def l1_apply(x: ErrorPath, t: float) -> np.ndarray:
    """Map an error path to the coefficient errors ``(dC, dB, dD)``."""
    grid = x.grid
    if abs(grid[0]) > 1e-12 or abs(grid[-1] - t) > 1e-9 * max(1.0, t):
        raise InvalidInput("grid must include the end points 0 and t")
    xs = x.values
    xt = tilde(xs)
    w = _trapz_weights(grid)
    dc = ((w * (t - grid))[:, None] * (xs + xt)).sum(axis=0)
    db = (w[:, None] * (xs - xt)).sum(axis=0)
    dd = xs[-1] + xt[-1] - 2 * xs[0]
    return np.concatenate([dc, db, dd])


def f_jacobian(theta) -> np.ndarray:
    """Jacobian of ``(C, B, D) -> vec(Theta C Theta - D - B^T Theta - Theta B)``."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    eye = np.eye(n)
    jc = np.kron(theta, theta)
    jb = -np.kron(theta, eye) @ commutation_matrix(n) - np.kron(eye, theta)
    jd = -np.eye(n * n)
    return np.hstack([jc, jb, jd])


def l2_matrix(theta, coef) -> np.ndarray:
    """``(Phi^T (+) Phi^T)^{-1} J_f`` with ``Phi = B - C Theta``; shape (n^2, 3n^2)."""
    theta = np.asarray(theta, dtype=float)
    phi = coef.b - coef.c @ theta
    if not stability_report(phi).stable:
        raise NotStable("B - C Theta is not stable")
    ks = kron_sum(phi.T, phi.T)
    return np.linalg.solve(ks, f_jacobian(theta))


# --- covariance of the limit process ------------------------------------------

def half_line_product(gamma: LagCovariance, ij, pq, tau: float, eta: float) -> float:
    """``int_0^inf gamma_ij(r + tau) gamma_pq(r + eta) dr`` by the trapezoidal rule."""
    h = gamma.step
    a = gamma.index(tau)
    b = gamma.index(eta)
    m = gamma.lags.size - max(a, b)
    if m < 2:
        return 0.0
    x = gamma.matrices[a:a + m, ij[0], ij[1]]
    y = gamma.matrices[b:b + m, pq[0], pq[1]]
    w = np.full(m, h)
    w[0] = w[-1] = 0.5 * h
    return float(np.sum(w * x * y))


def _full_line(gamma: LagCovariance) -> np.ndarray:
    """gamma on ``-R..R``: index ``M + k`` holds gamma(k h)."""
    g = gamma.matrices
    neg = np.transpose(g[:0:-1], (0, 2, 1))
    return np.concatenate([neg, g], axis=0)


def tail_decay_slope(gamma: LagCovariance) -> float:
    """Log-log slope of ||gamma(r)|| over the last decade of lags."""
    lags = gamma.lags
    r_max = lags[-1]
    sel = (lags >= r_max / 10) & (lags > 0)
    nrm = np.linalg.norm(gamma.matrices[sel], axis=(1, 2))
    scale = np.linalg.norm(gamma.matrices[0])
    if scale == 0 or np.all(nrm <= 1e-12 * scale):
        return -np.inf
    pos = nrm > 0
    if pos.sum() < 2:
        return -np.inf
    return float(np.polyfit(np.log(lags[sel][pos]), np.log(nrm[pos]), 1)[0])


@dataclass(frozen=True)
class LimitCovariance:
    """Blocks ``cov[k, l] = E[X_{s_k} X_{s_l}^T]`` for the lag grid ``lags``."""

    lags: np.ndarray
    blocks: np.ndarray

    def block(self, tau: float, eta: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.lags - tau)))
        j = int(np.argmin(np.abs(self.lags - eta)))
        return self.blocks[i, j]

    def stacked(self) -> np.ndarray:
        m, _, n2, _ = self.blocks.shape
        return self.blocks.transpose(0, 2, 1, 3).reshape(m * n2, m * n2)


def limit_covariance(gamma: LagCovariance, lags) -> LimitCovariance:
    """Covariance of the Gaussian limit X of ``sqrt(T) vec(gamma_hat - gamma)``.

    For Gaussian U,

        E[X^{ij}_tau X^{pq}_eta] = int_R gamma_ip(r + tau - eta) gamma_jq(r) dr
                                 + int_R gamma_iq(r + tau + eta) gamma_jp(r) dr,

    evaluated by the trapezoidal rule on gamma's uniform lag grid, extended to
    negative arguments through ``gamma(-r) = gamma(r)^T``. Both terms are
    sums of integrals of products ``gamma_ab(r + .) gamma_cd(r + .)``.
    """
    h = gamma.step
    if gamma.lags[0] != 0.0:
        raise InvalidInput("gamma must start at lag 0")
    slope = tail_decay_slope(gamma)
    if slope >= -0.5:
        raise TailNotIntegrable(f"||gamma(r)|| decays with log-log slope {slope:.3f} >= -1/2")
    lags = np.asarray(lags, dtype=float).ravel()
    ks = np.rint(lags / h).astype(int)
    if np.any(np.abs(ks * h - lags) > 1e-9 * np.maximum(1.0, lags)):
        raise InvalidInput("lags must lie on gamma's grid")
    if 2 * ks.max() >= gamma.lags.size:
        raise InvalidInput("gamma grid too short for the requested lags")
    full = _full_line(gamma)
    nfull = full.shape[0]
    n = gamma.dim
    nfft = 1 << int(np.ceil(np.log2(2 * nfull)))
    spec = np.fft.rfft(full.reshape(nfull, n * n), n=nfft, axis=0)
    # corr[s, a*n+b, c*n+d] = h * sum_m gamma_ab(m + s) gamma_cd(m)
    corr_f = np.einsum("fx,fy->fxy", spec.conj(), spec)
    corr = np.fft.irfft(corr_f, n=nfft, axis=0) * h
    # shift s >= 0 sits at s, s < 0 at nfft + s

    tail = np.linalg.norm(gamma.matrices[-1]) ** 2 * gamma.lags[-1]
    log.debug("limit covariance: R=%.3g, tail slope %.3f, tail size ~ %.3g",
              gamma.lags[-1], slope, tail)
    # vec index u = i + j n, v = p + q n
    i, j = np.divmod(np.arange(n * n), n)[::-1]
    p, q = i[None, :], j[None, :]
    i, j = i[:, None], j[:, None]
    s1 = (ks[:, None] - ks[None, :]) % nfft
    s2 = (ks[:, None] + ks[None, :]) % nfft
    blocks = corr[s1][:, :, p * n + i, q * n + j] + corr[s2][:, :, q * n + i, p * n + j]
    return LimitCovariance(lags, blocks)


def propagated_covariance(theta, coef, gamma: LagCovariance, t: float, h: float | None = None):
    """Predicted covariance of ``sqrt(T) vec(Theta_hat - Theta)`` and of L1(X)."""
    h = gamma.step if h is None else h
    k = int(round(t / h))
    grid = h * np.arange(k + 1)
    cov_x = limit_covariance(gamma, grid).stacked()
    w = l1_weights(grid, t, gamma.dim)
    cov_l1 = w @ cov_x @ w.T
    l2 = l2_matrix(theta, coef)
    pred = l2 @ cov_l1 @ l2.T
    return 0.5 * (pred + pred.T), 0.5 * (cov_l1 + cov_l1.T)


# --- Monte Carlo check ---------------------------------------------------------

@dataclass
class CltReport:
    empirical_cov: np.ndarray
    predicted_cov: np.ndarray
    rel_frobenius: float
    mean_z_scores: np.ndarray
    n_reps: int
    T: float
    seed: int
    n_zero_convention: int = 0
    samples: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "empirical_cov": np.asarray(self.empirical_cov).tolist(),
            "predicted_cov": np.asarray(self.predicted_cov).tolist(),
            "rel_frobenius": self.rel_frobenius,
            "mean_z_scores": np.asarray(self.mean_z_scores).tolist(),
            "n_reps": self.n_reps,
            "T": self.T,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def replication_seed(base_seed: int, *counters: int) -> int:
    """Integer seed for one replication, derived from ``base_seed`` and counters."""
    return int(child_seed(base_seed, *counters).generate_state(1, dtype=np.uint32)[0])


def _one_rep(args):
    theta, noise, t, T, dt, burn_in, seed = args
    model = OUModel(theta, noise)
    u = simulate_u(model, SimConfig(dt, T, burn_in, seed))
    rep = estimate_theta(u, variance_fn(noise), t, seed=seed)
    return rep.theta_hat, rep.zero_convention_applied


def mc_clt_check(model: OUModel, t: float, T: float, n_reps: int, seed: int,
                 dt: float = 0.01, burn_in: float | None = None, cov_step: float | None = None,
                 r_max: float | None = None, jobs: int = 1,
                 quad: QuadratureConfig | None = None) -> CltReport:
    """Compare the sample covariance of ``sqrt(T) vec(Theta_hat - Theta)`` with
    the propagated limit covariance."""
    if np.any(model.noise.hursts >= 0.75):
        raise InvalidInput("the sqrt(T) limit needs every Hurst index below 3/4")
    theta = model.theta
    n = model.dim
    vfn = variance_fn(model.noise)
    h = dt if cov_step is None else cov_step
    r_max = 50.0 / model.lambda_min if r_max is None else r_max
    k_max = int(np.ceil((r_max + 2 * t) / h))
    gamma = theoretical_gamma(theta, vfn, h * np.arange(k_max + 1), quad)
    coef = build_coefficients(gamma, vfn, t)
    predicted, _ = propagated_covariance(theta, coef, gamma, t, h)

    tasks = [(theta, model.noise, t, T, dt, burn_in, replication_seed(seed, r))
             for r in range(n_reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_one_rep, tasks))
    else:
        results = [_one_rep(a) for a in tasks]
    zero = sum(z for _, z in results)
    samples = np.array([np.sqrt(T) * vec(th - theta) for th, z in results if not z])
    emp = np.atleast_2d(np.cov(samples, rowvar=False))
    rel = float(np.linalg.norm(emp - predicted) / np.linalg.norm(predicted))
    sd = samples.std(axis=0, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0, samples.mean(axis=0) / (sd / np.sqrt(samples.shape[0])), 0.0)
    return CltReport(emp, predicted, rel, z, n_reps, T, seed, int(zero), samples)
