import numpy as np
import pytest

from langevin_care import GenerationError, InvalidInput, NoiseSpec, Trajectory, variance_fn
from langevin_care.noise import (
    NoiseComponent, child_seed, driver_path, fbm_path, fgn, fgn_autocovariance, make_rng,
)


def test_fgn_autocovariance_formula():
    rho = fgn_autocovariance(0.7, 3)
    assert rho[0] == pytest.approx(1.0)
    assert rho[1] == pytest.approx(0.5 * (2**1.4 - 2))
    assert rho[1] == pytest.approx(0.3195, abs=1e-4)
    assert np.allclose(fgn_autocovariance(0.5, 5, 0.1), [0.1, 0, 0, 0, 0])


def test_bm_increments_iid():
    p = fbm_path(0.5, 200_000, 0.01, 1)
    inc = np.diff(p.values[:, 0])
    assert p.values[0, 0] == 0.0
    assert inc.var() == pytest.approx(0.01, rel=4 * np.sqrt(2 / inc.size))
    lag1 = np.mean(inc[1:] * inc[:-1]) / 0.01
    assert abs(lag1) < 4 / np.sqrt(inc.size)


def test_fbm_variance_at_one():
    # 10^4 independent paths of B^H on [0, 1]
    for h in (0.3, 0.7):
        end = np.array([fbm_path(h, 64, 1 / 64, child_seed(5, r)).values[-1, 0] for r in range(10_000)])
        se = np.sqrt(2 / end.size)
        assert abs(end.var() - 1.0) < 3 * se


def test_fgn_lag_one_correlation():
    x = fgn(0.7, 2**17, 1.0, make_rng(11))
    r1 = np.mean(x[1:] * x[:-1]) / np.mean(x * x)
    assert r1 == pytest.approx(0.5 * (2**1.4 - 2), abs=0.02)


def test_cholesky_and_circulant_agree_in_law():
    acov = fgn_autocovariance(0.8, 32)
    xs = np.array([fgn(0.8, 32, 1.0, make_rng(3, r), method="cholesky") for r in range(4000)])
    emp = xs.T @ xs / xs.shape[0]
    assert np.abs(emp[0, :5] - acov[:5]).max() < 0.1


def test_generation_errors(monkeypatch):
    with pytest.raises(InvalidInput):
        fbm_path(1.0, 10, 0.1, 0)
    with pytest.raises(InvalidInput):
        NoiseComponent("FBM", 0.0)
    with pytest.raises(InvalidInput):
        NoiseComponent("levy")
    import langevin_care.noise as nz

    monkeypatch.setattr(nz, "_fgn_circulant", lambda acov, rng: None)
    monkeypatch.setattr(nz, "CHOLESKY_MAX_STEPS", 16)
    with pytest.raises(GenerationError):
        nz.fgn(0.7, 32, 1.0, make_rng(0))
    assert nz.fgn(0.7, 16, 1.0, make_rng(0)).shape == (16,)


def test_driver_path_properties():
    spec = NoiseSpec.fractional([0.6, 0.8], [1.0, 2.0])
    g = driver_path(spec, 50_000, 0.01, 9)
    assert np.array_equal(g.values[0], [0.0, 0.0])
    inc = np.diff(g.values, axis=0)
    corr = np.corrcoef(inc.T)[0, 1]
    assert abs(corr) < 4 / np.sqrt(inc.shape[0])
    # same seed, same path; component i follows child stream i
    again = driver_path(spec, 50_000, 0.01, 9)
    assert np.array_equal(g.values, again.values)
    solo = fbm_path(0.6, 50_000, 0.01, make_rng(9, 0))
    assert np.array_equal(solo.values[:, 0], g.values[:, 0])


def test_driver_marginal_variances():
    spec = NoiseSpec.fractional([0.6, 0.8])
    ends = np.array([driver_path(spec, 32, 1 / 32, child_seed(2, r)).values[-1] for r in range(10_000)])
    se = np.sqrt(2 / ends.shape[0])
    assert np.all(np.abs(ends.var(axis=0) - 1.0) < 4 * se)


def test_stationary_increments_long_path():
    h, dt, lag = 0.7, 0.01, 10
    g = driver_path(NoiseSpec.fractional([h]), 2**16, dt, 4).values[:, 0]
    d = g[lag::lag] - g[:-lag:lag]
    v = (lag * dt) ** (2 * h)
    # long-range dependence inflates the standard error; bound it generously
    assert abs(d.mean()) < 4 * np.sqrt(v) * d.size ** (h - 1)
    assert d.var() == pytest.approx(v, rel=0.1)


def test_variance_function():
    vf = variance_fn(NoiseSpec.brownian(2))
    assert np.allclose(vf(3.0), 3 * np.eye(2))
    assert np.array_equal(vf(0.0), np.zeros((2, 2)))
    assert variance_fn(NoiseSpec.fractional([0.75]))(2.0)[0, 0] == pytest.approx(2**1.5)
    mixed = variance_fn(NoiseSpec((NoiseComponent("BM"), NoiseComponent("FBM", 0.7))))
    assert np.allclose(mixed(-2.0), np.diag([2.0, 2.0**1.4]))
    assert np.allclose(mixed.cross(1.0, 1.0), mixed(1.0))


def test_spec_round_trip():
    spec = NoiseSpec((NoiseComponent("BM", scale=2.0), NoiseComponent("fbm", 0.3)))
    assert NoiseSpec.from_dict(spec.to_dict()) == spec


def test_trajectory_validation():
    with pytest.raises(InvalidInput):
        Trajectory(0.1, np.array([[np.inf]]))
    with pytest.raises(InvalidInput):
        Trajectory(0.0, np.zeros(3))
    t = Trajectory(0.5, np.zeros(5), t0=1.0)
    assert t.span == 2.0 and t.times[-1] == 3.0 and t.dim == 1
