import numpy as np
import pytest

from langevin_care import InvalidInput, NoiseSpec, OUModel, SimConfig, Trajectory
from langevin_care.covariance import theoretical_gamma
from langevin_care.noise import NoiseComponent, driver_path, variance_fn
from langevin_care.simulate import (
    SampledPath, lamperti, lamperti_inverse, langevin_response, recover_g, simulate_u,
)

from conftest import random_spd

BM1 = OUModel(np.eye(1), NoiseSpec.brownian(1))


def test_zero_noise_gives_zero_path():
    model = OUModel(2.0 * np.eye(2), NoiseSpec.brownian(2, scale=0.0))
    u = simulate_u(model, SimConfig(0.01, 5.0, rng_seed=1))
    assert np.array_equal(u.values, np.zeros_like(u.values))


def test_stationary_moments_1d():
    T = 20_000.0
    u = simulate_u(BM1, SimConfig(0.01, T, rng_seed=3)).values[:, 0]
    g0 = theoretical_gamma(np.eye(1), variance_fn(BM1.noise), [0.0]).matrices[0, 0, 0]
    assert g0 == pytest.approx(0.5, abs=1e-10)
    assert abs(np.mean(u * u) - g0) < 4 * np.sqrt(0.5 / T)
    assert abs(u.mean()) < 4 / np.sqrt(T)


def test_output_shape_and_determinism():
    model = OUModel([[1.0, 0.3], [0.3, 2.0]], NoiseSpec.fractional([0.5, 0.7]))
    cfg = SimConfig(0.01, 3.0, rng_seed=8)
    u = simulate_u(model, cfg)
    assert u.values.shape == (301, 2)
    assert np.array_equal(u.values, simulate_u(model, cfg).values)
    assert not np.array_equal(u.values, simulate_u(model, SimConfig(0.01, 3.0, rng_seed=9)).values)


def test_burn_in_validation():
    with pytest.raises(InvalidInput):
        simulate_u(BM1, SimConfig(0.01, 1.0, burn_in=0.001))
    with pytest.raises(InvalidInput):
        OUModel([[1.0, 0.5], [0.0, 1.0]], NoiseSpec.brownian(2))
    with pytest.raises(InvalidInput):
        OUModel(-np.eye(1), NoiseSpec.brownian(1))


def test_burn_in_forgetting():
    theta = np.array([[1.0, 0.3], [0.3, 2.0]])
    lam = np.linalg.eigvalsh(theta)[0]
    dt, T = 0.01, 5.0
    nt = int(round(T / dt))
    gaps = np.zeros(3)
    for seed in range(20):
        g = driver_path(NoiseSpec.brownian(2), int(round((40 / lam + T) / dt)), dt, seed).values

        def u_with(burn):
            seg = g[g.shape[0] - nt - 1 - int(round(burn / dt)):]
            return langevin_response(theta, seg - seg[0], dt)[-nt - 1:]

        ref = u_with(40 / lam)
        gaps += [np.abs(u_with(b / lam) - ref).max() for b in (5, 10, 20)]
    gaps /= 20
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 10 * np.exp(-20)


def test_recover_g_round_trip_first_order():
    theta = np.array([[1.0, 0.3], [0.3, 2.0]])
    model = OUModel(theta, NoiseSpec.brownian(2))
    errs = []
    for dt in (0.02, 0.01, 0.005, 0.0025):
        e = []
        for seed in range(5):
            u, g = simulate_u(model, SimConfig(dt, 10.0, rng_seed=seed), return_driver=True)
            e.append(np.abs(recover_g(u, theta).values - g.values).max())
        errs.append(np.mean(e))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates > 0.6)
    assert errs[-1] < 2e-3


def test_recover_g_simple_paths():
    theta = np.array([[2.0, 0.5], [0.5, 1.0]])
    c = np.array([1.0, -2.0])
    u = Trajectory(0.1, np.tile(c, (11, 1)))
    g = recover_g(u, theta)
    assert np.array_equal(g.values[0], [0, 0])
    assert np.allclose(g.values, np.outer(u.times, theta @ c))
    tiny = recover_g(u, 1e-6 * np.eye(2))
    assert np.allclose(tiny.values, 0.0, atol=1e-5)


def test_lamperti_scalar_and_zero(rng):
    u = Trajectory(0.1, rng.standard_normal(20), t0=-1.0)
    x = lamperti(u, np.eye(1))
    assert np.allclose(x.times, np.exp(u.times))
    assert np.allclose(x.values[:, 0], x.times * u.values[:, 0])
    z = lamperti(Trajectory(0.1, np.zeros((5, 2))), np.eye(2))
    assert np.array_equal(z.values, np.zeros((5, 2)))


def test_lamperti_round_trip(rng):
    theta = random_spd(rng, 3)
    u = Trajectory(0.05, rng.standard_normal((40, 3)), t0=-1.0)
    back = lamperti_inverse(lamperti(u, theta), theta)
    assert np.allclose(back.times, u.times, atol=1e-12)
    assert np.allclose(back.values, u.values, atol=1e-10)


def test_lamperti_explicit_times(rng):
    u = Trajectory(0.5, rng.standard_normal((5, 1)))
    x = lamperti(u, 2 * np.eye(1), times=np.exp([0.5, 1.5]))
    assert np.allclose(x.values[:, 0], np.exp([1.0, 3.0]) * u.values[[1, 3], 0])
    with pytest.raises(InvalidInput):
        lamperti(u, np.eye(1), times=[0.0, 1.0])
    with pytest.raises(InvalidInput):
        lamperti(u, np.eye(1), times=[np.exp(0.25)])
    with pytest.raises(InvalidInput):
        lamperti_inverse(SampledPath([-1.0, 1.0], [[1.0], [2.0]]), np.eye(1))
