import numpy as np
import pytest
from scipy.linalg import expm, solve_continuous_lyapunov

from langevin_care import LagCovariance


def random_spd(rng, n, lo=0.5, hi=3.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ np.diag(rng.uniform(lo, hi, n)) @ q.T


def bm_gamma_exact(theta, scales, lags):
    """gamma(r) = exp(-Theta r) S with Theta S + S Theta = diag(s^2)."""
    theta = np.asarray(theta, float)
    s = solve_continuous_lyapunov(theta, np.diag(np.asarray(scales, float) ** 2))
    return LagCovariance(lags, np.stack([expm(-theta * r) @ s for r in lags]))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def multiset_distance(a, b):
    """Largest gap after optimally pairing two equal-size complex multisets."""
    from scipy.optimize import linear_sum_assignment

    a, b = np.asarray(a), np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())
