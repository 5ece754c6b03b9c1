"""Stationary solutions of the Langevin equation ``dU = -Theta U dt + dG``.

The driver is generated on ``[-burn_in, T]`` starting from zero, and

    U_t = G_t - exp(-Theta t) Theta int_{-burn_in}^t exp(Theta s) G_s ds

is evaluated exactly for the piecewise-linear interpolant of G on the
simulation grid (an exponential integrator). Unlike the plain trapezoidal
rule this maps a constant driver to exactly zero, so the random level
``G_{-burn_in}`` cannot leak into U. The running integral is propagated as a
first-order recursion in the eigenbasis of Theta, which avoids forming
``exp(Theta s)`` for large ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidInput
from .matrix_core import as_square, mat_exp, mat_power, sym_eig
from .noise import NoiseSpec, Trajectory, driver_path


def as_theta(theta) -> np.ndarray:
    """Validate a symmetric positive definite drift matrix."""
    a = as_square(theta, "theta")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise InvalidInput("theta must be symmetric")
    a = 0.5 * (a + a.T)
    if np.linalg.eigvalsh(a)[0] <= 0:
        raise InvalidInput("theta must be positive definite")
    return a


@dataclass(frozen=True)
class OUModel:
    theta: np.ndarray
    noise: NoiseSpec

    def __post_init__(self):
        th = as_theta(self.theta)
        if th.shape[0] != self.noise.dim:
            raise InvalidInput("theta and noise dimensions differ")
        object.__setattr__(self, "theta", th)

    @property
    def dim(self) -> int:
        return self.theta.shape[0]

    @property
    def lambda_min(self) -> float:
        return float(np.linalg.eigvalsh(self.theta)[0])


@dataclass(frozen=True)
class SimConfig:
    dt: float
    horizon: float
    burn_in: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if not self.dt > 0 or not self.horizon > 0:
            raise InvalidInput("dt and horizon must be positive")

    def resolved_burn_in(self, model: OUModel) -> float:
        if self.burn_in is None:
            return 10.0 / model.lambda_min
        return float(self.burn_in)


def _steps(length: float, dt: float) -> int:
    return int(round(length / dt))


def langevin_response(theta, driver: np.ndarray, dt: float) -> np.ndarray:
    """Apply the stationary-solution map to a sampled driver.

    ``driver`` has shape (N, n) and must start at zero; row k is G at the
    k-th grid point. Returns U on the same grid.
    """
    theta = np.asarray(theta, dtype=float)
    g = np.asarray(driver, dtype=float)
    lam, q = sym_eig(theta)
    gt = g @ q
    a = np.exp(-lam * dt)
    one_minus_a = -np.expm1(-lam * dt)
    # int_0^h e^{-lam (h - s)} (g0 + (g1 - g0) s / h) ds = w0 g0 + w1 g1
    z = lam * dt
    with np.errstate(divide="ignore", invalid="ignore"):
        phi2 = np.where(z > 1e-3, (z - one_minus_a) / z**2, 0.5 - z / 6 + z**2 / 24)
    w1 = dt * phi2
    w0 = one_minus_a / lam - w1
    x = w0 * gt[:-1] + w1 * gt[1:]
    j = np.zeros_like(gt)
    for k in range(lam.size):
        j[1:, k] = lfilter([1.0], [1.0, -a[k]], x[:, k])
    return (gt - lam * j) @ q.T


def simulate_u(model: OUModel, cfg: SimConfig, return_driver: bool = False):
    """Sample the stationary solution on ``[0, T]``.

    Returns a :class:`Trajectory`; with ``return_driver`` also the driver on
    ``[0, T]`` shifted so that ``G_0 = 0``.
    """
    burn_in = cfg.resolved_burn_in(model)
    if burn_in < cfg.dt:
        raise InvalidInput("burn_in must be at least one time step")
    nb = _steps(burn_in, cfg.dt)
    nt = _steps(cfg.horizon, cfg.dt)
    g = driver_path(model.noise, nb + nt, cfg.dt, cfg.rng_seed).values
    u = langevin_response(model.theta, g, cfg.dt)[nb:]
    traj = Trajectory(cfg.dt, u)
    if return_driver:
        return traj, Trajectory(cfg.dt, g[nb:] - g[nb])
    return traj


def recover_g(u: Trajectory, theta) -> Trajectory:
    """Driver implied by a path: ``G_t = U_t - U_0 + Theta int_0^t U_s ds``."""
    theta = as_square(theta, "theta")
    vals = u.values
    integ = np.zeros_like(vals)
    if u.n_samples > 1:
        integ[1:] = np.cumsum(0.5 * u.dt * (vals[1:] + vals[:-1]), axis=0)
    g = vals - vals[0] + integ @ theta.T
    g[0] = 0.0
    return Trajectory(u.dt, g, u.t0)


@dataclass(frozen=True)
class SampledPath:
    """Path on an arbitrary (not necessarily uniform) time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != t.size:
            raise InvalidInput("times and values lengths differ")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def _as_path(p) -> SampledPath:
    if isinstance(p, Trajectory):
        return SampledPath(p.times, p.values)
    return p


def lamperti(u, theta, times=None) -> SampledPath:
    """``(L U)_t = t^Theta U_{log t}``.

    Without ``times`` the output is evaluated at ``t = exp(s)`` for every
    sample time ``s`` of ``u``. With ``times`` (all strictly positive) the
    samples of ``u`` at ``log t`` are looked up on its grid.
    """
    u = _as_path(u)
    theta = as_square(theta, "theta")
    if times is None:
        s = u.times
        vals = u.values
    else:
        t = np.asarray(times, dtype=float).ravel()
        if np.any(t <= 0):
            raise InvalidInput("Lamperti transform needs strictly positive times")
        s = np.log(t)
        idx = np.searchsorted(u.times, s)
        idx = np.clip(idx, 0, u.times.size - 1)
        lo = np.clip(idx - 1, 0, u.times.size - 1)
        pick = np.where(np.abs(u.times[lo] - s) < np.abs(u.times[idx] - s), lo, idx)
        if np.any(np.abs(u.times[pick] - s) > 1e-9 * np.maximum(1.0, np.abs(s))):
            raise InvalidInput("log(times) must lie on the path's time grid")
        vals = u.values[pick]
    out = np.stack([mat_exp(theta, si) @ v for si, v in zip(s, vals)])
    return SampledPath(np.exp(s), out)


def lamperti_inverse(x, theta) -> SampledPath:
    """``(L^{-1} X)_t = exp(-Theta t) X_{e^t}``, returned on ``t = log(times)``."""
    x = _as_path(x)
    theta = as_square(theta, "theta")
    if np.any(x.times <= 0):
        raise InvalidInput("inverse Lamperti transform needs strictly positive times")
    out = np.stack([mat_power(theta, tau) @ v for tau, v in zip(1.0 / x.times, x.values)])
    return SampledPath(np.log(x.times), out)
