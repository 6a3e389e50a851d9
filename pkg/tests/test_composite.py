import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdnet import analytic, composite
from fdnet.analytic import SpecialCaseParams
from fdnet.composite import CompositeMix, composite_outage_downlink, composite_outage_uplink, uplink_config
from fdnet.model import ConfigError, NetworkConfig
from fdnet.montecarlo import SimulationOptions, estimate_composite_mc

GAMMA = 0.2


def dl(sigma_db=-30.0, lam=0.01, rate=1.0):
    return NetworkConfig.from_db(sigma_db, lam=lam, rate=rate)


def test_mix_accessors():
    mix = CompositeMix(0.3, 0.5)
    assert mix.p_3n == pytest.approx(0.7)
    assert mix.activity == pytest.approx(0.5 * 0.3 + 0.7)
    with pytest.raises(ConfigError):
        CompositeMix(1.2)
    with pytest.raises(ConfigError):
        CompositeMix(0.5, -0.1)


@pytest.mark.parametrize("p_u", [0.0, 0.5, 1.0])
def test_pure_three_node_downlink(p_u):
    out = composite_outage_downlink(dl(), GAMMA, CompositeMix(0.0, p_u))
    assert out.total == out.three_node


def test_hd_closed_form_matches_pencil_limit():
    cfg = dl()
    q1 = composite.outage_3d_composite(cfg, GAMMA, 1.0)
    assert math.isclose(q1, analytic.outage_asymptotic("3D", cfg, GAMMA).value, rel_tol=1e-9)


@pytest.mark.parametrize("sigma_db", [-math.inf, -30.0, 0.0])
@pytest.mark.parametrize("p_2n", [0.0, 0.4, 1.0])
def test_full_duplex_users_reduce_to_pencil_limits(sigma_db, p_2n):
    cfg = dl(sigma_db)
    out = composite_outage_downlink(cfg, GAMMA, CompositeMix(p_2n, 1.0))
    p2 = analytic.outage_asymptotic("2D", cfg, GAMMA).value
    p3 = analytic.outage_asymptotic("3D", cfg, GAMMA).value
    assert math.isclose(out.total, p_2n * p2 + (1 - p_2n) * p3, rel_tol=1e-9, abs_tol=1e-15)

    up = uplink_config(cfg)
    out = composite_outage_uplink(up, GAMMA, CompositeMix(p_2n, 1.0))
    assert math.isclose(out.two_node, analytic.outage_asymptotic("2U", up, GAMMA).value, rel_tol=1e-9)
    assert math.isclose(out.three_node, analytic.outage_asymptotic("3U", up, GAMMA).value, rel_tol=1e-9)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.sampled_from([-math.inf, -30.0, -10.0]))
def test_composite_outage_is_convex_combination(p_2n, p_u, sigma_db):
    cfg = dl(sigma_db)
    for out in (composite_outage_downlink(cfg, GAMMA, CompositeMix(p_2n, p_u)),
                composite_outage_uplink(uplink_config(cfg), GAMMA, CompositeMix(p_2n, p_u))):
        lo, hi = sorted((out.two_node, out.three_node))
        assert lo - 1e-12 <= out.total <= hi + 1e-12


def test_downlink_prefers_three_node_with_strong_loopback():
    p_star, value = composite.optimize_p2n_success("downlink", dl(0.0), GAMMA, 1.0)
    assert p_star == 0.0
    assert math.isclose(value, 1 - composite_outage_downlink(dl(0.0), GAMMA, CompositeMix(0.0)).total)


def test_uplink_mostly_in_outage_with_strong_loopback():
    up = uplink_config(dl(0.0))
    for p_2n in (0.0, 0.5, 1.0):
        for p_u in (0.0, 0.5, 1.0):
            assert composite_outage_uplink(up, GAMMA, CompositeMix(p_2n, p_u)).total > 0.85


def test_silent_uplink_users_drop_out():
    up = uplink_config(dl(-30.0))
    special = SpecialCaseParams.asymptotic(GAMMA)
    got = composite_outage_uplink(up, GAMMA, CompositeMix(1.0, 0.0)).two_node
    li = lambda r: 1 / (1 + up.sigma_l2 * up.tau * np.asarray(r) ** up.alpha1)  # noqa: E731
    ref = analytic._fd_integral(lambda r: analytic.g_factor_up(r, up, special, user_scale=0.0), li, up, None).value
    assert math.isclose(got, ref, rel_tol=1e-12)


def test_architectures_coincide_without_uplink_users():
    # p_u = 0 and p_2n = 1: no uplink user anywhere, so FD and HD receivers see the same field
    out = composite_outage_downlink(dl(-math.inf), GAMMA, CompositeMix(1.0, 0.0))
    assert math.isclose(out.two_node, out.three_node, rel_tol=1e-9)


def test_half_duplex_uplink_load_shapes_downlink_at_zero_fd_time():
    # p_u = 0: the uplink-user density q = 1 - p_2n still falls with p_2n, so the objective is not flat
    vals = [1 - composite_outage_downlink(dl(-math.inf), GAMMA, CompositeMix(p, 0.0)).total for p in (0, 0.5, 1)]
    assert np.all(np.diff(vals) > 0)


def test_success_optimizer_matches_dense_grid():
    cfg = dl(-30.0)
    p_star, value = composite.optimize_p2n_success("downlink", cfg, GAMMA, 0.0)
    grid = np.linspace(0.0, 1.0, 10_000)
    vals = np.array([1 - composite_outage_downlink(cfg, GAMMA, CompositeMix(float(p), 0.0)).total for p in grid])
    assert 0.0 < p_star < 1.0
    assert abs(p_star - grid[np.argmax(vals)]) < 1e-3
    assert value >= vals.max() - 1e-12


@pytest.mark.parametrize("direction", ["downlink", "uplink"])
def test_success_optimizer_dominates_its_grid(direction):
    cfg = dl(-30.0) if direction == "downlink" else uplink_config(dl(-30.0))
    fn = composite_outage_downlink if direction == "downlink" else composite_outage_uplink
    p_star, value = composite.optimize_p2n_success(direction, cfg, GAMMA, 0.5)
    grid = [1 - fn(cfg, GAMMA, CompositeMix(p, 0.5)).total for p in np.linspace(0, 1, 201)]
    assert value >= max(grid) - 1e-12
    assert math.isclose(value, 1 - fn(cfg, GAMMA, CompositeMix(p_star, 0.5)).total, rel_tol=1e-12)
    with pytest.raises(ConfigError):
        composite.optimize_p2n_success("sidelink", cfg, GAMMA, 0.5)


# --- throughput ----------------------------------------------------------------------------


def test_throughput_zero_rate():
    assert composite.throughput(dl(rate=0.0), GAMMA, CompositeMix(0.5)).throughput == 0.0


def test_pure_hd_downlink_ignores_loopback():
    a = composite.throughput(dl(-30.0), GAMMA, CompositeMix(0.0))
    b = composite.throughput(dl(0.0), GAMMA, CompositeMix(0.0))
    assert a.downlink_success == b.downlink_success


@pytest.mark.parametrize("lam", [0.01, 0.1])
@pytest.mark.parametrize("p_2n", [0.0, 0.3, 1.0])
def test_throughput_expanded_form(lam, p_2n):
    cfg = dl(-30.0, lam=lam)
    t = composite.throughput(cfg, GAMMA, CompositeMix(p_2n, 1.0)).throughput
    assert math.isclose(t, composite.throughput_full_fd(cfg, GAMMA, p_2n), rel_tol=1e-9)


def test_throughput_components():
    cfg = dl(-30.0)
    res = composite.throughput(cfg, GAMMA, CompositeMix(0.4, 0.5))
    mix = res.mix
    expected = cfg.lam * (res.downlink_success + mix.activity * res.uplink_success)
    assert math.isclose(res.throughput, expected, rel_tol=1e-14)


@pytest.mark.parametrize("lam", [0.01, 0.1])
def test_throughput_affine_in_p2n(lam):
    cfg = dl(-30.0, lam=lam)
    xs = np.linspace(0, 1, 5)
    ys = np.array([composite.throughput(cfg, GAMMA, CompositeMix(x, 1.0)).throughput for x in xs])
    fit = np.polyval(np.polyfit(xs, ys, 1), xs)
    assert np.max(np.abs(fit - ys)) < 1e-8 * np.max(ys)


@pytest.mark.parametrize("lam, expected", [(0.1, 1), (0.01, 0)])
def test_throughput_decision(lam, expected):
    cfg = dl(-30.0, lam=lam)
    dec = composite.optimize_p2n_throughput(cfg, GAMMA)
    grid, values = composite.throughput_grid(cfg, GAMMA)
    assert dec.p_2n == expected
    assert grid[np.argmax(values)] == expected
    assert math.isclose(dec.throughput, values.max(), rel_tol=1e-9)


def test_throughput_decision_with_overwhelming_loopback():
    dec = composite.optimize_p2n_throughput(dl(40.0, lam=0.1), GAMMA)
    assert dec.p_2n == 0 and dec.gain < dec.threshold


def test_uplink_config_must_match():
    with pytest.raises(ConfigError):
        composite.throughput(dl(), GAMMA, CompositeMix(0.5), uplink_cfg=dl(rate=2.0))
    with pytest.raises(ConfigError):
        composite_outage_downlink(NetworkConfig(alpha2=3.0), GAMMA, CompositeMix(0.5))
    with pytest.raises(ConfigError):
        composite_outage_downlink(dl(), SpecialCaseParams(8, GAMMA), CompositeMix(0.5))


# --- simulation cross-check -----------------------------------------------------------------

MC_GRID = [(p, q) for p in (0.0, 0.5, 1.0) for q in (0.0, 0.5, 1.0)]


@pytest.mark.parametrize("direction", ["downlink", "uplink"])
def test_composite_matches_simulation(direction):
    cfg = dl(-30.0) if direction == "downlink" else uplink_config(dl(-30.0))
    fn = composite_outage_downlink if direction == "downlink" else composite_outage_uplink
    opts = SimulationOptions(geometry="guard", expected_points=300.0)
    for i, (p_2n, p_u) in enumerate(MC_GRID):
        est = estimate_composite_mc(direction, cfg, GAMMA, p_2n, p_u, 3000, seed=i, options=opts)
        exact = fn(cfg, GAMMA, CompositeMix(p_2n, p_u)).total
        assert abs(est.value - exact) <= 3 * est.std_error, (p_2n, p_u, est.value, exact)
