import math

import numpy as np
import pytest

from vlpc.errors import DegenerateGeometryError, DomainError
from vlpc.scenario import (ChannelParams, Scenario, alpha_const, gain_jacobian, gain_vector,
                           lambertian_order, los_gain, los_gain_gradient, triangle_offsets)

ALPHA = 1e-4 / math.pi


def test_lambertian_order_values():
    assert lambertian_order(60.0) == pytest.approx(1.0, abs=1e-14)
    assert lambertian_order(30.0) == pytest.approx(4.8188, abs=1e-4)


@pytest.mark.parametrize("bad", [0.0, 90.0, -5.0, 120.0])
def test_lambertian_order_domain(bad):
    with pytest.raises(DomainError):
        lambertian_order(bad)


def test_alpha_const():
    p = ChannelParams()
    assert alpha_const(p) == pytest.approx(3.18310e-5, rel=1e-5)
    assert alpha_const(ChannelParams(a_pd=2e-4)) == pytest.approx(2 * alpha_const(p), rel=1e-15)
    assert alpha_const(p, order=0.0) == pytest.approx(1e-4 / (2 * math.pi), rel=1e-15)


def test_los_gain_hand_values(corner_sc):
    assert los_gain(corner_sc, 0) == pytest.approx(ALPHA / 4, rel=1e-12)
    assert los_gain(corner_sc, 0) == pytest.approx(7.9577e-6, rel=1e-4)
    g = los_gain(corner_sc, 0, mu_position=(4.5, 2.5, 1.0))
    assert g == pytest.approx(ALPHA * 4 / 64, rel=1e-12)
    assert g == pytest.approx(1.9894e-6, rel=1e-4)


def test_gain_zero_at_lamp_plane(sc):
    # the scenario itself forbids this, but the channel function is total
    assert np.all(gain_vector(sc, (2.0, 2.0, 3.0)) == 0.0)


def test_fov_clipping():
    sc = Scenario(channel=ChannelParams(fov_deg=30.0))
    assert np.all(gain_vector(sc, (0.0, 0.0, 1.5)) == 0.0)
    assert np.all(gain_vector(sc, (2.5, 2.5, 1.5)) > 0.0)
    with pytest.raises(DegenerateGeometryError):
        gain_jacobian(sc, (0.0, 0.0, 1.5))


def test_batch_matches_pointwise(sc):
    pts = np.array([[1.0, 1.0, 1.0], [2.0, 3.0, 0.5], [2.5, 2.5, 2.0]])
    batch = gain_vector(sc, pts)
    for k, p in enumerate(pts):
        np.testing.assert_array_equal(batch[k], gain_vector(sc, p))


def test_nadir_gradient(corner_sc):
    g = los_gain_gradient(corner_sc, 0)
    h = los_gain(corner_sc, 0)
    assert g[0] == 0.0 and g[1] == 0.0
    assert g[2] == pytest.approx(2 * h / 2.0, rel=1e-12)


def _fd_grad(sc, i, u, step=1e-6):
    out = np.empty(3)
    for a in range(3):
        e = np.zeros(3)
        e[a] = step
        out[a] = (los_gain(sc, i, u + e) - los_gain(sc, i, u - e)) / (2 * step)
    return out


def test_gradient_matches_finite_differences(sc):
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = np.array([rng.uniform(0.5, 4.5), rng.uniform(0.5, 4.5), rng.uniform(0.2, 2.5)])
        for i in range(sc.n_pd):
            np.testing.assert_allclose(los_gain_gradient(sc, i, u), _fd_grad(sc, i, u),
                                       rtol=1e-6, atol=1e-6 * np.abs(_fd_grad(sc, i, u)).max())


def test_jacobian_rows_match_single_gradients(sc):
    jac = gain_jacobian(sc)
    for i in range(sc.n_pd):
        np.testing.assert_array_equal(jac[i], los_gain_gradient(sc, i))


def test_triangle_is_equilateral_and_centered():
    offs = triangle_offsets(0.3)
    np.testing.assert_allclose(offs.mean(axis=0), 0.0, atol=1e-15)
    sides = [np.linalg.norm(offs[i] - offs[(i + 1) % 3]) for i in range(3)]
    np.testing.assert_allclose(sides, 0.3, rtol=1e-14)


def test_scenario_invariants():
    with pytest.raises(DomainError, match="below the lamp"):
        Scenario(mu_position=(2.0, 2.0, 3.0))
    with pytest.raises(DomainError, match="collinear"):
        Scenario(pd_offsets=[[0, 0, 0], [0.1, 0, 0], [0.2, 0, 0]])
    with pytest.raises(DomainError, match="at least 3"):
        Scenario(pd_offsets=[[0, 0, 0], [0.1, 0, 0]])


def test_power_caps(sc):
    assert sc.p_p_max == pytest.approx(12.0, rel=1e-14)
    assert sc.p_c_max == pytest.approx(653061.2244897959, rel=1e-12)


def test_pd_index_range(sc):
    with pytest.raises(IndexError):
        los_gain(sc, 3)
