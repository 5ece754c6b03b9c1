"""Cross-covariance ``gamma(tau) = E[U_tau U_0^T]``: estimation from paths and
evaluation from the driver's variance function.

Theoretical values use the double-integral representation

    gamma(r) = Theta/2 int int_{(-inf,0]^2} e^{Theta x}
               (v(x+r) - v(r) + v(r-s) - v(x+r-s)) e^{Theta s} Theta dx ds.

In the eigenbasis of Theta each entry of the double integral separates into
one-sided Laplace integrals of ``|r +- u|^(2H)`` which are evaluated by
adaptive Gauss-Kronrod quadrature (algebraic end-point weights at the kink
``u = r``) and, for the Brownian exponents, in closed form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import InvalidInput, QuadratureError, UnsupportedModel
from .matrix_core import as_square, sym_eig
from .noise import Trajectory, VarianceFunction


@dataclass(frozen=True)
class LagCovariance:
    """gamma sampled on non-negative lags; ``gamma(-tau) = gamma(tau).T``."""

    lags: np.ndarray
    matrices: np.ndarray

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float).ravel()
        mats = np.asarray(self.matrices, dtype=float)
        if mats.ndim == 1:
            mats = mats[:, None, None]
        if mats.shape[0] != lags.size or mats.shape[1] != mats.shape[2]:
            raise InvalidInput("matrices must have shape (n_lags, n, n)")
        if np.any(lags < 0) or np.any(np.diff(lags) <= 0):
            raise InvalidInput("lags must be non-negative and strictly increasing")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def index(self, tau: float, atol: float = 1e-9) -> int:
        i = int(np.argmin(np.abs(self.lags - abs(tau))))
        if abs(self.lags[i] - abs(tau)) > atol * max(1.0, abs(tau)):
            raise InvalidInput(f"lag {tau} is not on the grid")
        return i

    def at(self, tau: float) -> np.ndarray:
        m = self.matrices[self.index(tau)]
        return m if tau >= 0 else m.T

    @property
    def step(self) -> float:
        d = np.diff(self.lags)
        if d.size == 0 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise InvalidInput("lag grid is not uniform")
        return float(d[0])

    def to_json(self) -> str:
        return json.dumps(
            {"lags": self.lags.tolist(), "matrices": self.matrices.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "LagCovariance":
        d = json.loads(text)
        return cls(np.array(d["lags"]), np.array(d["matrices"]))


def lag_grid(t: float, dt: float) -> np.ndarray:
    k = int(round(t / dt))
    if abs(k * dt - t) > 1e-9 * max(1.0, t):
        raise InvalidInput(f"t={t} is not a multiple of dt={dt}")
    return dt * np.arange(k + 1)


def _lag_steps(lags, dt: float) -> np.ndarray:
    lags = np.asarray(lags, dtype=float).ravel()
    k = np.rint(lags / dt).astype(int)
    if np.any(np.abs(k * dt - lags) > 1e-9 * np.maximum(1.0, lags)) or np.any(k < 0):
        raise InvalidInput("lags must be non-negative multiples of dt")
    return k


def empirical_gamma(u: Trajectory, lags, demean: bool = False) -> LagCovariance:
    """Trapezoidal time average of ``U_{s+tau} U_s^T``.

    All lags share the integration window ``[0, span - max_lag]``.
    """
    k = _lag_steps(lags, u.dt)
    vals = u.values - u.values.mean(axis=0) if demean else u.values
    m = u.n_samples - int(k.max())
    if m < 2:
        raise InvalidInput("integration window is shorter than one step")
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    w /= m - 1
    base = vals[:m] * w[:, None]
    mats = np.stack([vals[kk:kk + m].T @ base for kk in k])
    return LagCovariance(k * u.dt, mats)


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the theoretical covariance integrals.

    ``truncation`` multiplies ``1/lambda_min(Theta)`` to give the cut-off of
    each infinite integral. ``tol`` bounds the accumulated absolute error
    estimate reported by the adaptive rule.
    """

    tol: float = 1e-6
    epsrel: float = 1e-12
    truncation: float = 50.0
    limit: int = 500
    closed_form_brownian: bool = True
    commute_rtol: float = 1e-12


class _Laplace:
    """One-sided Laplace integrals of ``|r +- u|^p`` with error bookkeeping."""

    def __init__(self, cut: float, cfg: QuadratureConfig):
        self.cut = cut
        self.cfg = cfg
        self.err = 0.0

    def _quad(self, f, a, b, **kw):
        val, err = integrate.quad(
            f, a, b, epsabs=0.0, epsrel=self.cfg.epsrel, limit=self.cfg.limit, **kw
        )
        self.err += err
        return val

    def _closed(self, p) -> bool:
        return self.cfg.closed_form_brownian and p in (0.0, 1.0)

    def plus(self, lam: float, r: float, p: float) -> float:
        """int_0^inf e^{-lam u} (r + u)^p du."""
        if self._closed(p):
            return 1.0 / lam if p == 0 else r / lam + 1.0 / lam**2
        if r == 0:
            return gamma_fn(p + 1) / lam ** (p + 1)
        return self._quad(lambda u: np.exp(-lam * u) * (r + u) ** p, 0.0, self.cut)

    def minus(self, lam: float, r: float, p: float, sign_right: float = 1.0) -> float:
        """int_0^inf e^{-lam u} w(r - u) du with w(y) = y^p (y > 0), sign_right*|y|^p (y < 0)."""
        right = sign_right * np.exp(-lam * r) * gamma_fn(p + 1) / lam ** (p + 1)
        if r == 0:
            return right
        if self._closed(p):
            e = np.exp(-lam * r)
            left = (1 - e) / lam if p == 0 else r / lam - (1 - e) / lam**2
            return left + right
        if r <= self.cut:
            left = self._quad(
                lambda u: np.exp(-lam * u), 0.0, r, weight="alg", wvar=(0.0, p)
            )
        else:
            left = self._quad(lambda u: np.exp(-lam * u) * (r - u) ** p, 0.0, self.cut)
        return left + right


def _check_diagonal(vfn) -> None:
    if not isinstance(vfn, VarianceFunction):
        raise UnsupportedModel("only independent-component (diagonal) variance functions are supported")


def commutes(theta, vfn: VarianceFunction, rtol: float = 1e-12) -> bool:
    """Whether ``v(t)`` and Theta commute for all t (checked at t = 0.5, 1, 2)."""
    theta = np.asarray(theta, dtype=float)
    for t in (0.5, 1.0, 2.0):
        v = vfn(t)
        c = v @ theta - theta @ v
        if np.linalg.norm(c) >= rtol * max(1.0, np.linalg.norm(v) * np.linalg.norm(theta)):
            return False
    return True


def _gamma_at(theta, lam, q, vfn, r, cfg, derivative, use_commuting):
    n = lam.size
    cut = cfg.truncation / lam.min()
    lap = _Laplace(cut, cfg)
    s2 = vfn.scales2
    expo = 2 * vfn.hursts
    if derivative:
        # v'(y) = s2 * 2H * sign(y) |y|^(2H-1)
        coef = s2 * expo
        p = expo - 1
        vr = coef * r**p
        sign_right = -1.0
    else:
        coef = s2
        p = expo
        vr = coef * r**p
        sign_right = 1.0
    fm = np.empty((n, n))  # [a, k] = F_-^k(lam_a)
    fp = np.empty((n, n))
    for a in range(n):
        for k in range(n):
            fm[a, k] = coef[k] * lap.minus(lam[a], r, p[k], sign_right)
            fp[a, k] = coef[k] * lap.plus(lam[a], r, p[k])
    if lap.err > cfg.tol:
        raise QuadratureError(f"quadrature error estimate {lap.err:.3g} exceeds tol {cfg.tol:.3g}")
    if use_commuting:
        # Theta/4 int e^{Theta x} (v(x+r) + v(r-x) - 2 v(r)) dx
        out = np.zeros((n, n))
        for a in range(n):
            diag = fm[a] + fp[a] - 2 * vr / lam[a]
            pa = np.outer(q[:, a], q[:, a])
            out += lam[a] * pa @ np.diag(diag)
        return 0.25 * out
    la = lam[:, None]
    lb = lam[None, :]
    m = np.zeros((n, n))
    for k in range(n):
        ik = (
            fm[:, k][:, None] * la / (lb * (la + lb))
            + fp[:, k][None, :] * lb / (la * (la + lb))
            - vr[k] / (la * lb)
        )
        m += np.outer(q[k], q[k]) * ik
    return 0.5 * theta @ q @ m @ q.T @ theta


def _theory(theta, vfn, lags, quad, derivative):
    _check_diagonal(vfn)
    theta = as_square(theta, "theta")
    theta = 0.5 * (theta + theta.T)
    if theta.shape[0] != vfn.dim:
        raise InvalidInput("theta and variance function dimensions differ")
    quad = quad or QuadratureConfig()
    lam, q = sym_eig(theta)
    if lam.min() <= 0:
        raise InvalidInput("theta must be positive definite")
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    use_comm = commutes(theta, vfn, quad.commute_rtol)
    mats = np.stack(
        [_gamma_at(theta, lam, q, vfn, float(r), quad, derivative, use_comm) for r in lags]
    )
    return LagCovariance(lags, mats)


def theoretical_gamma(theta, vfn: VarianceFunction, lags,
                      quad: QuadratureConfig | None = None) -> LagCovariance:
    """Stationary cross-covariance for independent-component drivers."""
    return _theory(theta, vfn, lags, quad, derivative=False)


DERIVATIVE_GUARD = 1e-3


def gamma_derivative(theta, vfn: VarianceFunction, lags,
                     quad: QuadratureConfig | None = None) -> LagCovariance:
    """``d gamma / dr`` for r >= 0 (right derivative at 0).

    Lags below ``DERIVATIVE_GUARD`` are refused when some component has
    ``H < 1/2``, where the derivative blows up at the origin.
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    if np.any(vfn.hursts < 0.5) and np.any(lags < DERIVATIVE_GUARD):
        raise InvalidInput(
            f"derivative undefined near 0 for H < 1/2; use lags >= {DERIVATIVE_GUARD}"
        )
    return _theory(theta, vfn, lags, quad, derivative=True)
