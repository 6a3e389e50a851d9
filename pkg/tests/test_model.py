import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdnet.model import (
    AntennaSystem, ConfigError, NetworkConfig, antenna_gains, db_to_linear, linear_to_db,
    passive_suppression, sector_offsets, thinning_table,
)


@pytest.mark.parametrize("m, gamma, expected", [
    (1, 0.2, (1.0, 0.2)),
    (4, 0.2, (2.5, 0.5)),
    (8, 0.2, (10.0 / 3.0, 2.0 / 3.0)),
])
def test_antenna_gains_values(m, gamma, expected):
    np.testing.assert_allclose(antenna_gains(m, gamma), expected, rtol=1e-15)


def test_antenna_gains_pencil_limit():
    assert antenna_gains(math.inf, 0.2) == (5.0, 1.0)
    main, side = antenna_gains(10 ** 9, 0.2)
    np.testing.assert_allclose((main, side), (5.0, 1.0), rtol=1e-8)


@pytest.mark.parametrize("m, gamma", [(0, 0.2), (0.5, 0.2), (2.5, 0.2), (4, -0.1), (4, 1.1), (math.inf, 0.0)])
def test_antenna_gains_rejects(m, gamma):
    with pytest.raises(ConfigError):
        antenna_gains(m, gamma)


@given(st.integers(1, 64), st.floats(0.0, 0.99))
def test_main_gain_monotone_in_m(m, gamma):
    assert antenna_gains(m + 1, gamma)[0] >= antenna_gains(m, gamma)[0]


@given(st.integers(1, 64))
def test_isotropic_side_lobe(m):
    assert antenna_gains(m, 1.0) == (1.0, 1.0)


def test_thinning_table_mixed_sectors():
    t = thinning_table(4, 0.2, 2, 0.2, 0.01)
    np.testing.assert_allclose(t.densities, (0.00125, 0.00125, 0.00375, 0.00375), rtol=1e-12)
    assert math.isclose(t.total_density, 0.01, rel_tol=1e-12)


def test_thinning_table_omni_has_unit_gains():
    t = thinning_table(1, 0.2, 1, 0.2, 0.3)
    assert t.densities == (0.3, 0.0, 0.0, 0.0)
    assert t.gains == (1.0, 1.0, 1.0, 1.0)


def test_thinning_table_eight_sector_gains():
    t = thinning_table(8, 0.2, 8, 0.2, 0.01)
    np.testing.assert_allclose(t.gains[0], (10.0 / 3.0) ** 2, rtol=1e-14)
    np.testing.assert_allclose(t.gains[3], (2.0 / 3.0) ** 2, rtol=1e-14)


def test_thinning_table_pencil_beam():
    t = thinning_table(math.inf, 0.2, math.inf, 0.2, 0.01)
    assert t.densities == (0.0, 0.0, 0.0, 0.01)
    assert t.gains[3] == 1.0


@pytest.mark.parametrize("mi", range(1, 17))
def test_thinning_densities_sum_to_lambda(mi):
    for mj in range(1, 17):
        t = thinning_table(mi, 0.2, mj, 0.3, 0.01)
        assert abs(t.total_density - 0.01) <= 1e-12


def test_mean_gain_of_omni_is_one():
    assert thinning_table(1, 0.2, 1, 0.2, 0.01).mean_gain() == 1.0


def test_mean_gain_matches_orientation_average():
    # a random interferer lands in the main lobe w.p. 1/M and points at the receiver w.p. 1/M
    g, h = antenna_gains(6, 0.2)
    avg = (g / 6 + h * 5 / 6) ** 2
    assert math.isclose(thinning_table(6, 0.2, 6, 0.2, 0.01).mean_gain(), avg, rel_tol=1e-13)


@pytest.mark.parametrize("theta, theta_max, expected", [
    (0.0, 2 * math.pi / 3, 1.0),
    (2 * math.pi / 3, 2 * math.pi / 3, math.exp(-1.5)),
    (math.pi, math.pi / 3, 1.0),
])
def test_passive_suppression_values(theta, theta_max, expected):
    assert math.isclose(passive_suppression(theta, theta_max), expected, rel_tol=1e-14)


def test_passive_suppression_unclamped():
    assert math.isclose(passive_suppression(math.pi, math.pi / 3, clamp=False), math.e, rel_tol=1e-14)


@pytest.mark.parametrize("theta_max", [0.0, -1.0, 3.2])
def test_passive_suppression_rejects(theta_max):
    with pytest.raises(ConfigError):
        passive_suppression(0.1, theta_max)


@given(st.floats(-math.pi, math.pi), st.floats(0.01, math.pi))
def test_passive_suppression_symmetric_and_bounded(theta, theta_max):
    a = passive_suppression(theta, theta_max)
    assert a == passive_suppression(-theta, theta_max)
    assert 0.0 < a <= 1.0


@pytest.mark.parametrize("m", [3, 4, 6, 8, 12, 16])
def test_suppression_minimum_on_grid_is_nearest_theta_max(m):
    theta_max = 2 * math.pi / 3
    grid = sector_offsets(m)
    values = passive_suppression(grid, theta_max)
    distance = np.abs(np.abs(grid) - theta_max)
    assert set(np.flatnonzero(values == values.min())) <= set(np.flatnonzero(np.isclose(distance, distance.min())))


def test_sector_offsets():
    np.testing.assert_allclose(sector_offsets(4), [0.0, math.pi / 2, -math.pi, -math.pi / 2])
    assert np.all((sector_offsets(7) >= -math.pi) & (sector_offsets(7) < math.pi))


def test_network_config_validation():
    with pytest.raises(ConfigError):
        NetworkConfig(lam=0.0)
    with pytest.raises(ConfigError):
        NetworkConfig(alpha1=2.0)
    with pytest.raises(ConfigError):
        NetworkConfig(rate=-1.0)
    with pytest.raises(ConfigError):
        NetworkConfig(bs_li_power="p_x")
    assert NetworkConfig(rate=0.0).tau == 0.0
    assert NetworkConfig(rate=2.0).tau == 3.0


def test_db_conversion():
    assert db_to_linear(-math.inf) == 0.0
    assert linear_to_db(0.0) == -math.inf
    assert math.isclose(db_to_linear(-30.0), 1e-3)
    assert math.isclose(linear_to_db(db_to_linear(7.5)), 7.5)
    cfg = NetworkConfig.from_db(sigma_l2_db=-30.0)
    assert math.isclose(cfg.sigma_l2, 1e-3) and cfg.sigma_n2 == 0.0


def test_bs_loopback_power_choice():
    cfg = NetworkConfig(p_b=2.0, p_u=0.5)
    assert cfg.bs_loopback_power == 2.0
    assert cfg.with_(bs_li_power="p_u").bs_loopback_power == 0.5


def test_antenna_system_accessors():
    ant = AntennaSystem(m_b=8, m_u=4, gamma_b=0.2, gamma_u=0.1)
    assert (ant.g_b, ant.h_b) == antenna_gains(8, 0.2)
    assert (ant.g_u, ant.h_u) == antenna_gains(4, 0.1)
    assert ant.table("u", "b", 0.01) == thinning_table(4, 0.1, 8, 0.2, 0.01)
    with pytest.raises(ConfigError):
        AntennaSystem(theta_max=0.0)
