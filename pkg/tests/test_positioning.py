import math

import numpy as np
import pytest

from vlpc.errors import DomainError
from vlpc.fisher import crlb
from vlpc.positioning import (RssObservation, expected_rx_power, gain_estimate_noise_var,
                              p_p_for_snr, positioning_rmse, powers_to_gain_estimates,
                              residuals_eta, simulate_gain_estimates, solve_position)
from vlpc.scenario import ChannelParams, gain_vector, los_gain


def test_expected_rx_power_nadir(corner_sc):
    h = 1e-4 / math.pi / 4
    got = expected_rx_power(corner_sc, 0, 1.0)
    assert got == pytest.approx(5 * h * h + 20e6 * 1e-21, rel=1e-12)
    assert got == pytest.approx(3.16645e-10, rel=1e-5)


def test_expected_rx_power_noise_floor(sc):
    # a narrow FoV puts the PD outside the beam, so h = 0
    clipped = sc.replace(channel=ChannelParams(fov_deg=10.0), mu_position=(0.2, 0.2, 1.5))
    assert expected_rx_power(clipped, 0, 1.0) == sc.bandwidth_hz * sc.sigma2_p


def test_expected_rx_power_signal_linear(sc):
    floor = sc.bandwidth_hz * sc.sigma2_p
    # P_p eps + I^2: 0 -> 4, 4 -> 8 doubles the drive level
    s0 = expected_rx_power(sc, 1, 0.0) - floor
    s1 = expected_rx_power(sc, 1, 4.0) - floor
    assert s1 == pytest.approx(2 * s0, rel=1e-10)


def test_noise_variance(sc):
    v = gain_estimate_noise_var(sc, 1.0)
    # B sigma2_p / (T_p (P_p eps + I^2)) with B = 20 MHz
    assert v == pytest.approx(20e6 * 1e-21 / 0.6, rel=1e-12)
    assert gain_estimate_noise_var(sc.replace(t_p=0.24), 1.0) == pytest.approx(v / 2, rel=1e-14)
    # unbounded as T_p -> 0: T_p times the variance stays fixed
    for t in (1e-3, 1e-6, 1e-9, 1e-12):
        assert gain_estimate_noise_var(sc.replace(t_p=t), 1.0) * t == pytest.approx(v * 0.12)


def test_simulate_zero_noise(sc):
    obs = simulate_gain_estimates(sc.replace(sigma2_p=0.0), 1.0, 7)
    np.testing.assert_array_equal(obs.gain_estimates, gain_vector(sc))


def test_simulate_deterministic(sc):
    a = simulate_gain_estimates(sc, 1.0, 11).gain_estimates
    b = simulate_gain_estimates(sc, 1.0, 11).gain_estimates
    np.testing.assert_array_equal(a, b)


def test_simulate_unbiased(sc):
    n = 100_000
    rng = np.random.default_rng(5)
    std = math.sqrt(gain_estimate_noise_var(sc, 1.0))
    draws = gain_vector(sc) + std * rng.standard_normal((n, sc.n_pd))
    # same generator path as simulate_gain_estimates, batched for speed
    one = simulate_gain_estimates(sc, 1.0, 5).gain_estimates
    np.testing.assert_array_equal(one, draws[0])
    se = std / math.sqrt(n)
    assert np.all(np.abs(draws.mean(axis=0) - gain_vector(sc)) < 4 * se)


def test_powers_round_trip(sc):
    pf = 1.0 * sc.eps_sym + sc.i_dc**2
    rx = np.array([expected_rx_power(sc, i, 1.0) for i in range(sc.n_pd)])
    obs = RssObservation(p_p=1.0, noise_power=sc.bandwidth_hz * sc.sigma2_p, rx_power=rx,
                         power_factor=pf)
    g, clamped = powers_to_gain_estimates(obs)
    np.testing.assert_allclose(g, gain_vector(sc), rtol=1e-12)
    assert not clamped.any()


def test_powers_at_and_below_floor(sc):
    floor = sc.bandwidth_hz * sc.sigma2_p
    obs = RssObservation(p_p=1.0, noise_power=floor, rx_power=np.array([floor, 0.5 * floor, 2 * floor]),
                         power_factor=5.0)
    g, clamped = powers_to_gain_estimates(obs)
    assert g[0] == 0.0 and g[1] == 0.0 and g[2] > 0.0
    assert clamped.tolist() == [False, True, False]


def test_observation_needs_exactly_one_field():
    with pytest.raises(DomainError):
        RssObservation(p_p=1.0, noise_power=1.0)


def test_residuals_zero_at_truth(sc):
    np.testing.assert_array_equal(residuals_eta(sc, sc.mu_position, gain_vector(sc)), 0.0)


def test_residuals_positive_when_displaced(sc):
    h = gain_vector(sc)
    xs = np.linspace(0.5, 4.5, 9)
    zs = np.linspace(0.3, 2.7, 7)
    for x in xs:
        for y in xs:
            for z in zs:
                u = np.array([x, y, z])
                if np.linalg.norm(u - sc.mu_position) > 1e-3:
                    assert np.linalg.norm(residuals_eta(sc, u, h)) > 0


def test_residuals_above_lamp(sc):
    with pytest.raises(DomainError):
        residuals_eta(sc, (2.0, 2.0, 3.5), gain_vector(sc))


def test_noiseless_recovery(sc):
    est = solve_position(sc, gain_vector(sc), init_guess=(2.5, 2.5, 1.5))
    assert est.converged
    assert np.linalg.norm(est.u_hat - sc.mu_position) < 1e-6


@pytest.mark.parametrize("u", [(1.0, 1.0, 1.5), (2.5, 2.5, 1.5), (4.0, 1.5, 0.8), (3.2, 3.7, 2.2)])
def test_noiseless_recovery_other_points(sc, u):
    s = sc.replace(mu_position=u)
    est = solve_position(s, gain_vector(s))
    assert np.linalg.norm(est.u_hat - np.asarray(u)) < 1e-6


def test_init_above_lamp(sc):
    with pytest.raises(DomainError):
        solve_position(sc, gain_vector(sc), init_guess=(2.0, 2.0, 3.2))


def test_snr_definition(sc):
    p = p_p_for_snr(sc, 15.0)
    h1 = los_gain(sc, 0)
    assert 10 * math.log10(p * h1**2 / (sc.bandwidth_hz * sc.sigma2_p)) == pytest.approx(15.0)


def test_rmse_near_crlb_at_15db(sc):
    p = p_p_for_snr(sc, 15.0)
    res = positioning_rmse(sc, p, 300, seed=1)
    assert res.sqrt_crlb == pytest.approx(math.sqrt(crlb(sc, None, p)))
    assert 0.8 <= res.rmse / res.sqrt_crlb <= 3.0
    assert res.stderr > 0 and res.failures == 0
