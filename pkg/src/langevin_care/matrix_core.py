"""Dense real matrix primitives.

Everything here is a pure function of its array arguments. ``vec`` stacks
columns, so that ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)`` holds with the
ordinary Kronecker product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInput

DEFAULT_RTOL = 1e-10


def as_square(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D square float array or raise InvalidInput."""
    a = np.array(m, dtype=float, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite entries")
    return a


def symmetrize(m) -> np.ndarray:
    a = as_square(m)
    return 0.5 * (a + a.T)


def sym_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns
    -------
    eigenvalues : ndarray
        Sorted in descending order.
    eigenvectors : ndarray
        Orthogonal matrix whose columns match ``eigenvalues``.
    """
    a = symmetrize(m)
    w, q = np.linalg.eigh(a)
    return w[::-1].copy(), q[:, ::-1].copy()


def _is_symmetric(a: np.ndarray) -> bool:
    return np.array_equal(a, a.T)


def mat_exp(m, scale: float = 1.0) -> np.ndarray:
    """Matrix exponential ``exp(scale * m)``.

    Symmetric input goes through the eigendecomposition; anything else uses
    scaling and squaring with a Pade approximant.
    """
    a = as_square(m)
    if not np.isfinite(scale):
        raise InvalidInput("scale must be finite")
    if _is_symmetric(a):
        w, q = sym_eig(a)
        return (q * np.exp(scale * w)) @ q.T
    return scipy.linalg.expm(scale * a)


def mat_power(m, a: float) -> np.ndarray:
    """Real matrix power ``a**m = exp(m log a)`` for ``a > 0``."""
    if not a > 0:
        raise InvalidInput(f"base must be positive, got {a}")
    return mat_exp(m, np.log(a))


def kron_sum(a, b) -> np.ndarray:
    """Kronecker sum ``(I_n kron a) + (b kron I_m)`` for a (m x m), b (n x n)."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    m, n = a.shape[0], b.shape[0]
    return np.kron(np.eye(n), a) + np.kron(b, np.eye(m))


def vec(m) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(m, dtype=float).reshape(-1, order="F")


def unvec(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise InvalidInput(f"length {v.size} is not a perfect square")
    return v.reshape((n, n), order="F")


def commutation_matrix(n: int) -> np.ndarray:
    """Permutation ``K`` with ``K @ vec(M) == vec(M.T)`` for n x n ``M``."""
    idx = np.arange(n * n).reshape((n, n), order="F")
    k = np.zeros((n * n, n * n))
    k[np.arange(n * n), idx.T.reshape(-1, order="F")] = 1.0
    return k


def symmetric_basis(n: int) -> np.ndarray:
    """Orthonormal basis of vec(S^n) in the Frobenius inner product.

    Returns an ``(n*n, n*(n+1)/2)`` matrix with orthonormal columns.
    """
    cols = []
    for j in range(n):
        for i in range(j, n):
            e = np.zeros((n, n))
            if i == j:
                e[i, i] = 1.0
            else:
                e[i, j] = e[j, i] = np.sqrt(0.5)
            cols.append(vec(e))
    return np.column_stack(cols)


def spectral_norm(m) -> float:
    a = np.array(m, dtype=float, ndmin=2)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    min_real_part: float
    max_real_part: float
    min_eigenvalue_sym: float | None = None

    @property
    def stable(self) -> bool:
        """All eigenvalues strictly in the open left half-plane."""
        return self.max_real_part < 0


def stability_report(m) -> SpectralReport:
    a = as_square(m)
    ev = np.linalg.eigvals(a)
    sym_min = None
    if _is_symmetric(a):
        sym_min = float(np.linalg.eigvalsh(a)[0])
    return SpectralReport(
        eigenvalues=ev,
        min_real_part=float(ev.real.min()),
        max_real_part=float(ev.real.max()),
        min_eigenvalue_sym=sym_min,
    )


def min_eig(m) -> float:
    """Smallest eigenvalue of the symmetric part of ``m``."""
    return float(np.linalg.eigvalsh(symmetrize(m))[0])


def is_pd(m, rtol: float = DEFAULT_RTOL) -> bool:
    """Relative positive-definiteness check: ``min_eig > rtol * ||m||``."""
    a = symmetrize(m)
    nrm = spectral_norm(a)
    return nrm > 0 and min_eig(a) > rtol * nrm
