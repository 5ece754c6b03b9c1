"""Continuous-time algebraic Riccati equation

    B^T X + X B - X C X + D = 0

solved for the positive semidefinite stabilising solution (``B - C X``
stable).

Hamiltonian convention: with ``(A, R, Q) = (B, C, D)`` the matrix is
``H = [[A, -R], [-Q, -A^T]]``. Its stable invariant subspace ``[X1; X2]``
gives ``X = X2 X1^{-1}``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DiagnosticUnavailable, InvalidInput, NoSolution
from .matrix_core import (
    DEFAULT_RTOL,
    as_square,
    commutation_matrix,
    kron_sum,
    min_eig,
    spectral_norm,
    stability_report,
    symmetric_basis,
    symmetrize,
)


@dataclass(frozen=True)
class CareCoefficients:
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    t_window: float = 1.0
    pd_c: bool = field(init=False)
    pd_d: bool = field(init=False)

    def __post_init__(self):
        b = as_square(self.b, "b")
        c = symmetrize(self.c)
        d = symmetrize(self.d)
        if not (b.shape == c.shape == d.shape):
            raise InvalidInput("b, c, d must have equal shapes")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "pd_c", _pd(c))
        object.__setattr__(self, "pd_d", _pd(d))

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    def residual(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.b.T @ x + x @ self.b - x @ self.c @ x + self.d

    def to_dict(self) -> dict:
        return {"b": self.b.tolist(), "c": self.c.tolist(), "d": self.d.tolist(),
                "t": self.t_window}

    @classmethod
    def from_dict(cls, d: dict) -> "CareCoefficients":
        return cls(np.array(d["b"], dtype=float), np.array(d["c"], dtype=float),
                   np.array(d["d"], dtype=float), float(d.get("t", 1.0)))


def _pd(m: np.ndarray, rtol: float = DEFAULT_RTOL) -> bool:
    nrm = spectral_norm(m)
    return nrm > 0 and min_eig(m) > rtol * nrm


@dataclass(frozen=True)
class Certificate:
    unique: bool
    phi_stable: bool = False
    method: str = ""
    min_eig_c: float = float("nan")
    min_eig_d: float = float("nan")
    asymmetry: float = 0.0

    def to_dict(self) -> dict:
        return {
            "unique": self.unique,
            "phi_stable": self.phi_stable,
            "method": self.method,
            "min_eig_c": self.min_eig_c,
            "min_eig_d": self.min_eig_d,
            "asymmetry": self.asymmetry,
        }


@dataclass(frozen=True)
class CareSolution:
    theta_hat: np.ndarray
    residual_norm: float
    phi: np.ndarray
    certificate: Certificate

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.tolist(),
            "residual_norm": self.residual_norm,
            "phi": self.phi.tolist(),
            "phi_max_real_eig": float(np.linalg.eigvals(self.phi).real.max()),
            "certificate": self.certificate.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def certify_uniqueness(coef: CareCoefficients, rtol: float = DEFAULT_RTOL) -> Certificate:
    """Sufficient condition for a unique PSD solution: C and D positive definite."""
    return Certificate(
        unique=bool(coef.pd_c and coef.pd_d) if rtol == DEFAULT_RTOL
        else bool(_pd(coef.c, rtol) and _pd(coef.d, rtol)),
        min_eig_c=min_eig(coef.c),
        min_eig_d=min_eig(coef.d),
    )


def hamiltonian(coef: CareCoefficients) -> np.ndarray:
    return np.block([[coef.b, -coef.c], [-coef.d, -coef.b.T]])


def _schur_solve(coef: CareCoefficients, cond_max: float) -> np.ndarray:
    n = coef.dim
    h = hamiltonian(coef)
    # Balance to reduce sensitivity to badly scaled coefficients.
    hb, (scale, _) = scipy.linalg.matrix_balance(h, separate=True, permute=False)
    t, z, sdim = scipy.linalg.schur(hb, output="real", sort="lhp")
    if sdim != n:
        raise NoSolution(f"Hamiltonian has {sdim} stable eigenvalues, expected {n}")
    basis = scale[:, None] * z[:, :n]
    x1, x2 = basis[:n], basis[n:]
    if np.linalg.cond(x1) > cond_max:
        raise NoSolution("stable subspace basis X1 is singular")
    return np.linalg.solve(x1.T, x2.T).T


def _newton_kleinman(coef: CareCoefficients, x0=None, tol: float = 1e-13,
                     max_iter: int = 100) -> np.ndarray:
    n = coef.dim
    if x0 is None:
        alpha = 1.0
        for _ in range(60):
            if stability_report(coef.b - alpha * coef.c).stable:
                break
            alpha *= 2.0
        else:
            raise NoSolution("no stabilising initial guess alpha*I found")
        x = alpha * np.eye(n)
    else:
        x = np.asarray(x0, dtype=float)
    for _ in range(max_iter):
        ak = coef.b - coef.c @ x
        rhs = -(coef.d + x @ coef.c @ x)
        # solve_continuous_lyapunov solves A X + X A^H = Q
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            x_new = scipy.linalg.solve_continuous_lyapunov(ak.T, rhs)
        x_new = 0.5 * (x_new + x_new.T)
        if not np.all(np.isfinite(x_new)):
            raise NoSolution("Newton-Kleinman diverged")
        step = np.linalg.norm(x_new - x)
        x = x_new
        if np.linalg.norm(x) > 1e150:
            raise NoSolution("Newton-Kleinman diverged")
        if step <= tol * max(1.0, np.linalg.norm(x)):
            return x
    raise NoSolution("Newton-Kleinman did not converge")


def _polish(coef: CareCoefficients, x: np.ndarray, steps: int = 2) -> np.ndarray:
    """A few Newton steps from ``x``, kept only while the residual drops."""
    best = 0.5 * (x + x.T)
    best_res = np.linalg.norm(coef.residual(best))
    cur = best
    for _ in range(steps):
        ak = coef.b - coef.c @ cur
        try:
            cur = scipy.linalg.solve_continuous_lyapunov(ak.T, -(coef.d + cur @ coef.c @ cur))
        except (np.linalg.LinAlgError, ValueError):
            break
        cur = 0.5 * (cur + cur.T)
        res = np.linalg.norm(coef.residual(cur))
        if not res < best_res:
            break
        best, best_res = cur, res
    return best


def _finish(coef: CareCoefficients, x: np.ndarray, method: str,
            cert: Certificate) -> CareSolution:
    asym = np.linalg.norm(x - x.T) / max(np.linalg.norm(x), 1e-300)
    xs = 0.5 * (x + x.T)
    phi = coef.b - coef.c @ xs
    res = spectral_norm(coef.residual(xs))
    return CareSolution(
        theta_hat=xs,
        residual_norm=float(res),
        phi=phi,
        certificate=Certificate(
            unique=cert.unique,
            phi_stable=stability_report(phi).stable,
            method=method,
            min_eig_c=cert.min_eig_c,
            min_eig_d=cert.min_eig_d,
            asymmetry=float(asym),
        ),
    )


def solve_care(coef: CareCoefficients, method: str = "schur", cond_max: float = 1e12,
               refine: bool = True) -> CareSolution:
    """Stabilising solution of the CARE.

    The Schur route falls back to Newton-Kleinman when the invariant-subspace
    basis is ill-conditioned. When ``refine`` is set, a Schur solution is
    polished by Newton steps started from it. Raises :class:`NoSolution`
    when no route yields a stabilising positive semidefinite solution.
    """
    cert = certify_uniqueness(coef)
    if method not in ("schur", "newton"):
        raise InvalidInput(f"unknown method {method!r}")
    x = None
    used = method
    if method == "schur":
        try:
            x = _schur_solve(coef, cond_max)
            if refine:
                x = _polish(coef, x)
        except (NoSolution, np.linalg.LinAlgError, ValueError):
            used = "newton"
    if x is None:
        try:
            x = _newton_kleinman(coef)
        except (np.linalg.LinAlgError, ValueError, scipy.linalg.LinAlgError) as exc:
            raise NoSolution(str(exc)) from exc
        used = "newton"
    if not np.all(np.isfinite(x)):
        raise NoSolution("solver produced non-finite entries")
    with np.errstate(over="ignore", invalid="ignore"):
        sol = _finish(coef, x, used, cert)
    scale = max(1.0, spectral_norm(coef.d))
    size = max(scale, spectral_norm(coef.c) * np.square(spectral_norm(sol.theta_hat)))
    if not np.isfinite(sol.residual_norm) or sol.residual_norm > 1e-6 * size:
        raise NoSolution(f"no solution found (residual {sol.residual_norm:.3g})")
    if not sol.certificate.phi_stable:
        raise NoSolution("solution is not stabilising")
    if min_eig(sol.theta_hat) < -1e-8 * max(1.0, spectral_norm(sol.theta_hat)):
        raise NoSolution("stabilising solution is not positive semidefinite")
    if sol.residual_norm > 1e-8 * scale:
        warnings.warn(f"CARE residual {sol.residual_norm:.3g} above 1e-8 * max(1, ||D||)")
    return sol


# --- perturbation diagnostics --------------------------------------------------

@dataclass(frozen=True)
class PerturbationDiagnostics:
    """Perturbation quantities in the Frobenius norm.

    ``l = 1/||L^{-1}||`` with ``L(M) = Phi^T M + M Phi`` on symmetric matrices,
    ``p = ||P||`` for ``P(M) = L^{-1}(Theta M + M^T Theta)`` on all n x n
    matrices, ``q = ||Q||`` for ``Q(M) = L^{-1}(Theta M Theta)`` on symmetric
    matrices. All operator norms are induced by the Frobenius norm.
    """

    l: float
    p: float
    q: float
    delta_b: float
    delta_c: float
    delta_d: float
    eps: float
    delta: float
    g: float
    condition_holds: bool
    eps_star: float | None
    error: float | None = None

    @property
    def guarantee_holds(self) -> bool | None:
        if self.eps_star is None or self.error is None:
            return None
        return self.error <= self.eps_star

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["guarantee_holds"] = self.guarantee_holds
        return d


def _fro(m) -> float:
    return float(np.linalg.norm(m, "fro"))


def operator_constants(theta, coef: CareCoefficients) -> tuple[float, float, float]:
    """Return ``(l, p, q)`` for the linearised Riccati operator at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    phi = coef.b - coef.c @ theta
    if not stability_report(phi).stable:
        raise DiagnosticUnavailable("B - C Theta is not stable; L is not invertible")
    lmat = kron_sum(phi.T, phi.T)
    s = symmetric_basis(n)
    # L maps S^n to S^n; restrict to an orthonormal basis of vec(S^n).
    l_sym = s.T @ lmat @ s
    try:
        l_inv = np.linalg.inv(l_sym)
    except np.linalg.LinAlgError as exc:
        raise DiagnosticUnavailable("L is singular") from exc
    l = 1.0 / np.linalg.norm(l_inv, 2)
    eye = np.eye(n)
    kmat = commutation_matrix(n)
    p_map = np.kron(eye, theta) + np.kron(theta, eye) @ kmat  # vec(Theta M + M^T Theta)
    p_op = l_inv @ s.T @ p_map
    q_op = l_inv @ s.T @ np.kron(theta, theta) @ s
    return float(l), float(np.linalg.norm(p_op, 2)), float(np.linalg.norm(q_op, 2))


def perturbation_bound(coef_true: CareCoefficients, coef_hat: CareCoefficients, theta_true,
                       theta_hat=None) -> PerturbationDiagnostics:
    """Evaluate the perturbation bound for the perturbed CARE.

    When ``theta_hat`` is given, its Frobenius distance to ``theta_true`` is
    recorded so that the guarantee ``||theta_hat - theta|| <= eps*`` can be
    checked.
    """
    theta = np.asarray(theta_true, dtype=float)
    l, p, q = operator_constants(theta, coef_true)
    db = _fro(coef_hat.b - coef_true.b)
    dc = _fro(coef_hat.c - coef_true.c)
    dd = _fro(coef_hat.d - coef_true.d)
    eps = dd / l + p * db + q * dc
    delta = db + dc * _fro(theta)
    g = _fro(coef_true.c) + dc
    cond = delta + np.sqrt(l * g * eps) < l / 2
    eps_star = None
    if cond:
        disc = (l - 2 * delta) ** 2 - 4 * l * g * eps
        eps_star = 2 * l * eps / (l - 2 * delta + np.sqrt(max(disc, 0.0)))
    err = None if theta_hat is None else _fro(np.asarray(theta_hat) - theta)
    return PerturbationDiagnostics(l, p, q, db, dc, dd, eps, delta, g, bool(cond), eps_star, err)
