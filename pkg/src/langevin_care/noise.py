"""Gaussian stationary-increment drivers: Brownian and fractional Brownian motion.

Seeds
-----
Every random stream is drawn from a :class:`numpy.random.SeedSequence` whose
``spawn_key`` is a tuple of counters appended to the user seed, e.g.
``child_seed(seed, 3, 1)`` is ``SeedSequence(seed, spawn_key=(3, 1))``. Two
different counter tuples give statistically independent streams, and the same
tuple always gives the same stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import GenerationError, InvalidInput

CHOLESKY_MAX_STEPS = 4096


def child_seed(seed, *counters: int) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(counters)
        )
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counters))


def make_rng(seed, *counters: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(seed, *counters))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled path; row ``k`` is the state at ``t0 + k*dt``."""

    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1:
            raise InvalidInput("trajectory needs at least one sample")
        if not self.dt > 0:
            raise InvalidInput("dt must be positive")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("trajectory values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def span(self) -> float:
        return self.dt * (self.n_samples - 1)


@dataclass(frozen=True)
class NoiseComponent:
    kind: str = "BM"
    hurst: float = 0.5
    scale: float = 1.0

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in ("BM", "FBM"):
            raise InvalidInput(f"unknown noise kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "BM":
            object.__setattr__(self, "hurst", 0.5)
        if not 0.0 < self.hurst < 1.0:
            raise InvalidInput(f"hurst index must lie in (0, 1), got {self.hurst}")
        if not self.scale >= 0:
            raise InvalidInput("scale must be non-negative")


@dataclass(frozen=True)
class NoiseSpec:
    components: tuple[NoiseComponent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, NoiseComponent) else NoiseComponent(**c)
            for c in self.components
        )
        if not comps:
            raise InvalidInput("noise spec needs at least one component")
        object.__setattr__(self, "components", comps)

    @classmethod
    def brownian(cls, dim: int, scale: float = 1.0) -> "NoiseSpec":
        return cls(tuple(NoiseComponent("BM", 0.5, scale) for _ in range(dim)))

    @classmethod
    def fractional(cls, hursts: Sequence[float], scales: Sequence[float] | None = None):
        scales = [1.0] * len(hursts) if scales is None else scales
        return cls(tuple(NoiseComponent("FBM", h, s) for h, s in zip(hursts, scales)))

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def hursts(self) -> np.ndarray:
        return np.array([c.hurst for c in self.components])

    @property
    def scales(self) -> np.ndarray:
        return np.array([c.scale for c in self.components])

    def to_dict(self) -> dict:
        return {
            "components": [
                {"kind": c.kind, "hurst": c.hurst, "scale": c.scale}
                for c in self.components
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(tuple(NoiseComponent(**c) for c in d["components"]))


class VarianceFunction:
    """Diagonal variance ``v(t) = E[G_t G_t^T]`` with ``v_ii(t) = s_i^2 |t|^(2 H_i)``."""

    def __init__(self, spec: NoiseSpec):
        self.spec = spec
        self.hursts = spec.hursts
        self.scales2 = spec.scales**2

    @property
    def dim(self) -> int:
        return self.spec.dim

    def diag(self, t) -> np.ndarray:
        """Diagonal entries, shape ``t.shape + (n,)``."""
        t = np.abs(np.asarray(t, dtype=float))[..., None]
        return self.scales2 * t ** (2 * self.hursts)

    def diag_derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        a = np.abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.scales2 * 2 * self.hursts * np.sign(t) * a ** (2 * self.hursts - 1)
        return np.where(a == 0, 0.0, out)

    def __call__(self, t) -> np.ndarray:
        return np.diag(self.diag(float(t)))

    def cross(self, t, s) -> np.ndarray:
        """``E[G_t G_s^T] = (v(t) + v(s) - v(t - s)) / 2``."""
        return 0.5 * (self(t) + self(s) - self(t - s))


def variance_fn(spec: NoiseSpec) -> VarianceFunction:
    return VarianceFunction(spec)


def fgn_autocovariance(hurst: float, n_lags: int, dt: float = 1.0) -> np.ndarray:
    """Autocovariance of increments of fBm sampled with step ``dt``, lags 0..n_lags-1."""
    k = np.arange(n_lags, dtype=float)
    h2 = 2.0 * hurst
    rho = 0.5 * (np.abs(k + 1) ** h2 - 2 * np.abs(k) ** h2 + np.abs(k - 1) ** h2)
    return rho * dt**h2


def _fgn_circulant(acov: np.ndarray, rng: np.random.Generator) -> np.ndarray | None:
    # Davies-Harte: embed the Toeplitz covariance into a 2N circulant.
    n = acov.size
    row = np.concatenate([acov, [0.0], acov[:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * max(1.0, lam.max()):
        return None
    lam = np.clip(lam, 0.0, None)
    m = row.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(lam / m) * z)
    return y.real[:n]


def _fgn_cholesky(acov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cov = scipy.linalg.toeplitz(acov)
    chol = np.linalg.cholesky(cov)
    return chol @ rng.standard_normal(acov.size)


def fgn(hurst: float, n_steps: int, dt: float, rng: np.random.Generator,
        method: str = "auto") -> np.ndarray:
    """Exact-law fractional Gaussian noise of length ``n_steps``."""
    if not 0.0 < hurst < 1.0:
        raise InvalidInput(f"hurst index must lie in (0, 1), got {hurst}")
    if n_steps < 1 or not dt > 0:
        raise InvalidInput("need n_steps >= 1 and dt > 0")
    if hurst == 0.5:
        return np.sqrt(dt) * rng.standard_normal(n_steps)
    acov = fgn_autocovariance(hurst, n_steps, dt)
    if method in ("auto", "circulant"):
        out = _fgn_circulant(acov, rng)
        if out is not None:
            return out
        if method == "circulant":
            raise GenerationError("circulant embedding is not nonnegative definite")
    if n_steps > CHOLESKY_MAX_STEPS:
        raise GenerationError(
            f"circulant embedding failed and {n_steps} steps exceeds the "
            f"Cholesky limit of {CHOLESKY_MAX_STEPS}"
        )
    return _fgn_cholesky(acov, rng)


def fbm_path(hurst: float, n_steps: int, dt: float, rng_seed, scale: float = 1.0,
             method: str = "auto") -> Trajectory:
    """Sample ``scale * B^H`` on ``0, dt, ..., n_steps*dt``; the path starts at 0."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else make_rng(rng_seed)
    inc = fgn(hurst, n_steps, dt, rng, method=method)
    path = np.concatenate([[0.0], np.cumsum(scale * inc)])
    return Trajectory(dt, path)


def driver_path(spec: NoiseSpec, n_steps: int, dt: float, rng_seed) -> Trajectory:
    """Independent components; component ``i`` uses ``child_seed(rng_seed, i)``."""
    cols = [
        fbm_path(c.hurst, n_steps, dt, make_rng(rng_seed, i), scale=c.scale).values[:, 0]
        for i, c in enumerate(spec.components)
    ]
    return Trajectory(dt, np.column_stack(cols))
