import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sci

from fdnet import analytic
from fdnet.analytic import NumericalError, OutageEstimate, Scenario, SpecialCaseParams
from fdnet.model import AntennaSystem, ConfigError, NetworkConfig, antenna_gains, passive_suppression, sector_offsets
from fdnet.specfun import hyp_F

from conftest import ANCHOR_3D

OMNI = AntennaSystem.symmetric(1)
UP43 = dict(alpha1=4.0, alpha2=3.0)


def ppp_laplace_oracle(lam, s, alpha, inner=0.0, intensity=lambda x: 1.0):
    """exp(-2 pi lam int_inner^inf intensity(x) (1 - 1/(1 + s x^-alpha)) x dx), unit-mean exponential fading."""
    f = lambda x: intensity(x) * x / (1.0 + x ** alpha / s)  # noqa: E731
    val = sci.quad(f, inner, np.inf, epsabs=1e-14, epsrel=1e-12, limit=500)[0]
    return math.exp(-2.0 * math.pi * lam * val)


def nearest_guard_oracle(lam, s, alpha, n=4000):
    """Average of the guarded transform over the nearest-neighbour distance, trapezoid outer rule."""
    rho = np.linspace(1e-9, 8.0 / math.sqrt(math.pi * lam), n)
    vals = np.array([2 * math.pi * lam * r * math.exp(-math.pi * lam * r * r) * ppp_laplace_oracle(lam, s, alpha, r)
                     for r in rho])
    return np.trapezoid(vals, rho)


# --- loopback ------------------------------------------------------------------


def test_li_2node_values():
    cfg = NetworkConfig(sigma_l2=0.001)
    assert math.isclose(analytic.laplace_li_2node(1.0, cfg, OMNI), 1 / 1.001, rel_tol=1e-15)
    assert analytic.laplace_li_2node(0.0, cfg, OMNI) == 1.0
    assert analytic.laplace_li_2node(123.0, cfg.with_(sigma_l2=0.0), OMNI) == 1.0
    with pytest.raises(ConfigError):
        analytic.laplace_li_2node(1.0, cfg, OMNI, node="relay")


def test_li_3u_omni_bs_reduces_to_two_node():
    cfg = NetworkConfig(sigma_l2=0.01)
    s = np.array([0.0, 0.5, 3.0, 40.0])
    np.testing.assert_allclose(analytic.laplace_li_3u(s, cfg, OMNI),
                               analytic.laplace_li_2node(s, cfg, OMNI, node="bs"), rtol=1e-15)


def test_li_3u_eight_sectors_enumerated():
    cfg = NetworkConfig(sigma_l2=1.0)
    ant = AntennaSystem.symmetric(8, 0.2)
    g, h = antenna_gains(8, 0.2)
    terms = [1.0 / (1.0 + g * g)]
    for k in range(1, 8):
        theta = 2 * math.pi * k / 8
        theta = theta - 2 * math.pi if theta >= math.pi else theta
        terms.append(1.0 / (1.0 + g * h * min(1.0, math.exp(math.cos(2 * math.pi / 3) - math.cos(abs(theta) - 2 * math.pi / 3)))))
    assert math.isclose(analytic.laplace_li_3u(1.0, cfg, ant), sum(terms) / 8, rel_tol=1e-14)


def test_li_3u_pencil_beam_is_angle_average():
    cfg = NetworkConfig(sigma_l2=0.1)
    ant = AntennaSystem.symmetric(math.inf, 0.2)
    k = 2.0 * 0.1 * 5.0
    oracle = sci.quad(lambda t: 1.0 / (1.0 + k * passive_suppression(t, 2 * math.pi / 3)), -math.pi, math.pi,
                      points=[-4 * math.pi / 3 + 2 * math.pi, 4 * math.pi / 3 - 2 * math.pi], epsrel=1e-13)[0]
    assert math.isclose(analytic.laplace_li_3u(2.0, cfg, ant), oracle / (2 * math.pi), rel_tol=1e-10)


# --- co-channel interference -------------------------------------------------------


def test_bs_down_values():
    cfg = NetworkConfig(lam=0.01, rate=1.0)
    expected = math.exp(-2 * math.pi * 0.01 / 2 * (math.pi / 4) * 25)
    assert math.isclose(analytic.laplace_interference_bs_down(5.0, cfg, OMNI), expected, rel_tol=1e-13)
    assert math.isclose(analytic.laplace_interference_bs_down(5.0, cfg, OMNI),
                        ppp_laplace_oracle(0.01, 625.0, 4.0, inner=5.0), rel_tol=1e-9)
    assert analytic.laplace_interference_bs_down(5.0, cfg, OMNI, tau=0.0) == 1.0
    assert analytic.laplace_interference_bs_down(0.0, cfg, OMNI) == 1.0


def test_bs_down_against_simulated_field():
    # E[prod 1/(1 + tau (r/d)^4)] over BSs beyond r, one PPP draw per sample
    rng = np.random.default_rng(11)
    lam, r, w = 0.01, 5.0, 200.0
    vals = np.empty(4000)
    for i in range(vals.size):
        n = rng.poisson(lam * math.pi * (w * w - r * r))
        d2 = r * r + (w * w - r * r) * rng.random(n)
        vals[i] = np.prod(1.0 / (1.0 + r ** 4 / d2 ** 2))
    exact = analytic.laplace_interference_bs_down(r, NetworkConfig(lam=lam), OMNI)
    assert abs(vals.mean() - exact) < 4 * vals.std() / math.sqrt(vals.size) + 1e-3


def test_user_2d_nested_oracle():
    cfg = NetworkConfig(lam=0.01, alpha2=3.0)
    got = analytic.laplace_interference_user_2d(10.0, cfg, OMNI)
    assert math.isclose(got, nearest_guard_oracle(0.01, 10.0, 3.0), rel_tol=1e-6)


def test_bs_up_nested_oracle():
    cfg = NetworkConfig(lam=0.01, alpha2=3.0, p_b=2.0)
    got = analytic.laplace_interference_bs_up(5.0, cfg, OMNI)
    assert math.isclose(got, nearest_guard_oracle(0.01, 10.0, 3.0), rel_tol=1e-6)


def test_nearest_guard_transforms_at_zero():
    cfg = NetworkConfig(lam=0.01, alpha2=3.0)
    assert analytic.laplace_interference_user_2d(0.0, cfg, OMNI) == 1.0
    assert analytic.laplace_interference_bs_up(0.0, cfg, OMNI) == 1.0


def test_user_2d_decreasing_in_s():
    cfg = NetworkConfig(lam=0.01, alpha2=3.5)
    ant = AntennaSystem.symmetric(4)
    vals = analytic.laplace_interference_user_2d(np.logspace(-2, 4, 13), cfg, ant)
    assert np.all(np.diff(vals) < 0) and np.all((vals > 0) & (vals <= 1))


def test_user_3d_value():
    cfg = NetworkConfig(lam=0.01)
    assert math.isclose(analytic.laplace_interference_user_3d(1.0, cfg, OMNI), 0.95185, abs_tol=5e-6)
    assert analytic.laplace_interference_user_3d(0.0, cfg, OMNI) == 1.0


@pytest.mark.parametrize("m", [1, 4, 8])
@pytest.mark.parametrize("alpha", [3.0, 4.0])
def test_guarded_exponent_limit_is_full_plane(m, alpha):
    cfg = NetworkConfig(lam=0.01, alpha2=alpha)
    ant = AntennaSystem.symmetric(m)
    expo = analytic.guarded_field_exponent(1e-9, 2.0, cfg.p_u, ant.table("u", "u", cfg.lam), alpha)
    assert math.isclose(math.exp(-float(expo)), analytic.laplace_interference_user_3d(2.0, cfg, ant), rel_tol=1e-6)


def test_user_3u_oracle_and_homogeneous_bound():
    cfg = NetworkConfig(lam=0.01)
    got = analytic.laplace_interference_user_3u(1.0, cfg, OMNI)
    oracle = ppp_laplace_oracle(0.01, 1.0, 4.0, intensity=lambda x: -math.expm1(-math.pi * 0.01 * x * x))
    assert math.isclose(got, oracle, rel_tol=1e-9)
    homog = analytic.laplace_interference_user_3u(1.0, cfg, OMNI, homogeneous=True)
    assert math.isclose(homog, ppp_laplace_oracle(0.01, 1.0, 4.0), rel_tol=1e-9)
    assert got >= homog
    assert analytic.laplace_interference_user_3u(0.0, cfg, OMNI) == 1.0


@given(st.floats(1e-3, 1e3), st.floats(1.01, 10.0), st.sampled_from([1, 4, 8]))
def test_laplace_factors_bounded_and_decreasing(s, k, m):
    cfg = NetworkConfig(lam=0.01, sigma_l2=1e-2, alpha1=4.0, alpha2=3.0)
    ant = AntennaSystem.symmetric(m)
    for fn in (lambda x: analytic.laplace_li_2node(x, cfg, ant),
               lambda x: analytic.laplace_li_3u(x, cfg, ant),
               lambda x: analytic.laplace_interference_user_3d(x, cfg, ant),
               lambda x: analytic.laplace_interference_user_3u(x, cfg, ant)):
        a, b = fn(s), fn(s * k)
        assert 0.0 < b <= a <= 1.0


# --- theorem outage -------------------------------------------------------------------


def test_anchor_theorem():
    est = analytic.outage("3D", NetworkConfig(lam=0.01, rate=1.0), OMNI)
    assert math.isclose(est.value, ANCHOR_3D, rel_tol=1e-7)
    assert est.error_bound is not None and est.error_bound < 1e-8


@pytest.mark.parametrize("scenario", ["2D", "3D", "2U", "3U"])
def test_zero_rate_gives_zero_outage(scenario):
    cfg = NetworkConfig(lam=0.01, rate=0.0, sigma_l2=1e-3)
    assert analytic.outage(scenario, cfg, AntennaSystem.symmetric(4)).value == 0.0
    small = analytic.outage(scenario, cfg.with_(rate=1e-10), AntennaSystem.symmetric(4)).value
    assert 0.0 <= small < 1e-4


@pytest.mark.parametrize("scenario", ["2D", "3D", "2U", "3U"])
@pytest.mark.parametrize("m", [1, 8])
def test_outage_increases_with_rate(scenario, m):
    alphas = UP43 if scenario.endswith("U") else {}
    cfg = NetworkConfig.from_db(-30.0, lam=0.01, **alphas)
    vals = [analytic.outage(scenario, cfg.with_(rate=r), AntennaSystem.symmetric(m)).value
            for r in (0.1, 0.5, 1.0, 2.0, 4.0)]
    assert np.all(np.diff(vals) > 0)
    assert all(0.0 <= v <= 1.0 for v in vals)


LOW_RATE_EXCEPTION = pytest.mark.xfail(
    strict=True, reason="with 4 sectors at R = 0.1 the intra-cell uplink user, whose interference grows like "
                        "tau^(2/alpha), outweighs a -30 dB loopback; simulation agrees (0.1316 vs 0.1257)")


@pytest.mark.parametrize("m, rate", [
    pytest.param(4, 0.1, marks=LOW_RATE_EXCEPTION), (4, 0.2), (4, 1.0), (4, 4.0), (4, 8.0),
    (8, 0.1), (8, 0.2), (8, 1.0), (8, 4.0), (8, 8.0),
])
def test_three_node_downlink_beats_two_node(m, rate):
    cfg = NetworkConfig.from_db(-30.0, lam=0.01, rate=rate)
    ant = AntennaSystem.symmetric(m)
    assert analytic.outage("3D", cfg, ant).value <= analytic.outage("2D", cfg, ant).value


@pytest.mark.parametrize("m", [1, 4, 8])
def test_uplink_architectures_equal_without_loopback(m):
    cfg = NetworkConfig(lam=0.01, rate=1.0, **UP43)
    ant = AntennaSystem.symmetric(m)
    assert math.isclose(analytic.outage("2U", cfg, ant).value, analytic.outage("3U", cfg, ant).value, rel_tol=1e-9)


def test_homogeneous_uplink_is_pessimistic():
    cfg = NetworkConfig.from_db(-30.0, lam=0.01, rate=1.0, **UP43)
    ant = AntennaSystem.symmetric(4)
    exact = analytic.outage("3U", cfg, ant).value
    assert analytic.outage("3U", cfg, ant, homogeneous_uplink=True).value > exact


@pytest.mark.parametrize("scenario", ["2D", "2U", "3U"])
def test_dense_network_approaches_perfect_cancellation(scenario):
    alphas = UP43 if scenario.endswith("U") else {}
    ant = AntennaSystem.symmetric(4)
    gaps = []
    for lam in (0.01, 0.1, 0.5, 1.0):
        cfg = NetworkConfig.from_db(-10.0, lam=lam, rate=1.0, **alphas)
        gaps.append(analytic.outage(scenario, cfg, ant).value
                    - analytic.outage(scenario, cfg.with_(sigma_l2=0.0), ant).value)
    assert np.all(np.diff(gaps) < 0) and gaps[-1] >= 0.0


def test_noise_increases_outage():
    cfg = NetworkConfig(lam=0.01, rate=1.0)
    assert analytic.outage("3D", cfg.with_(sigma_n2=1e-3), OMNI).value > ANCHOR_3D


def test_checked_estimate():
    assert OutageEstimate.checked(1.0 + 5e-10, "x").value == 1.0
    assert OutageEstimate.checked(-5e-10, "x").value == 0.0
    with pytest.raises(NumericalError):
        OutageEstimate.checked(1.01, "x")


def test_scenario_parse():
    assert Scenario.parse("2d") is Scenario.D2
    assert Scenario.U3.architecture == "three-node" and Scenario.U3.link == "uplink"
    assert not Scenario.D3.has_loopback
    with pytest.raises(ConfigError):
        Scenario.parse("4X")


# --- special cases --------------------------------------------------------------------------


def test_special_closed_forms():
    cfg = NetworkConfig(lam=0.01, rate=1.0)
    sp = SpecialCaseParams(1, 0.2)
    assert math.isclose(analytic.outage_approx_fd("2D", cfg, sp).value, 1 - 1 / (1 + math.pi / 2), rel_tol=1e-13)
    for sc in ("2U", "3U"):
        assert math.isclose(analytic.outage_approx_fd(sc, cfg, sp).value, ANCHOR_3D, rel_tol=1e-13)
    assert math.isclose(analytic.outage_3d_special(cfg, sp).value, ANCHOR_3D, rel_tol=1e-13)
    assert math.isclose(analytic.outage_alpha4_closed("2D", cfg, sp).value, 1 - 1 / (1 + math.pi / 2), rel_tol=1e-13)


def test_2d_closed_form_close_to_theorem():
    cfg = NetworkConfig(lam=0.01, rate=1.0)
    assert abs(analytic.outage("2D", cfg, OMNI).value - (1 - 1 / (1 + math.pi / 2))) < 0.02


def test_3d_special_term_enumeration():
    cfg = NetworkConfig(lam=0.01, rate=1.0)
    w = np.array([1, 7, 7, 49]) / 64
    g = np.array([1, 0.2, 0.2, 0.04])
    y = 1 + sum(wi * (hyp_F(4.0, gi) * gi + 0.5 * math.pi * math.sqrt(gi)) for wi, gi in zip(w, g))
    assert math.isclose(analytic.outage_3d_special(cfg, SpecialCaseParams(8, 0.2)).value, 1 - 1 / y, rel_tol=1e-12)


def test_3d_special_closed_form_matches_quadrature():
    cfg = NetworkConfig(lam=0.01, rate=2.0, alpha1=3.5, alpha2=3.5)
    sp = SpecialCaseParams(6, 0.3)
    closed = analytic.outage_3d_special(cfg, sp).value
    quad = analytic.outage_3d_special(cfg, sp, force_quadrature=True).value
    assert math.isclose(closed, quad, rel_tol=1e-8)


def test_3d_special_matches_theorem_for_equal_parameters():
    cfg = NetworkConfig(lam=0.01, rate=1.5, alpha1=4.0, alpha2=3.0)
    m = 4
    special = analytic.outage_3d_special(cfg, SpecialCaseParams(m, 0.2)).value
    theorem = analytic.outage("3D", cfg, AntennaSystem.symmetric(m)).value
    assert math.isclose(special, theorem, rel_tol=1e-6)


def test_3d_special_interference_free_limit():
    cfg = NetworkConfig(lam=0.01, rate=1.0)
    vals = [analytic.outage_3d_special(cfg, SpecialCaseParams(m, 0.0)).value for m in (10, 100, 10_000)]
    assert np.all(np.diff(vals) < 0) and vals[-1] < 1e-3


def test_special_requires_assumptions():
    sp = SpecialCaseParams(4, 0.2)
    with pytest.raises(ConfigError):
        analytic.outage_approx_fd("2D", NetworkConfig(sigma_n2=1.0), sp)
    with pytest.raises(ConfigError):
        analytic.outage_approx_fd("2D", NetworkConfig(p_b=2.0), sp)
    with pytest.raises(ConfigError):
        analytic.outage_approx_fd("3D", NetworkConfig(), sp)
    with pytest.raises(ConfigError):
        SpecialCaseParams.from_config(NetworkConfig(), AntennaSystem(m_b=4, m_u=8))
    assert SpecialCaseParams.from_config(NetworkConfig(), AntennaSystem.symmetric(4)) == SpecialCaseParams(4, 0.2)


@pytest.mark.parametrize("scenario", ["2U", "3U"])
@pytest.mark.parametrize("sigma_db", [-math.inf, -30.0])
def test_uplink_approximation_is_upper_bound(scenario, sigma_db):
    cfg = NetworkConfig.from_db(sigma_db, lam=0.01, rate=1.0, **UP43)
    for m in (1, 4):
        approx = analytic.outage_approx_fd(scenario, cfg, SpecialCaseParams(m, 0.2)).value
        assert approx >= analytic.outage(scenario, cfg, AntennaSystem.symmetric(m)).value


@pytest.mark.parametrize("scenario", ["2D", "2U", "3U"])
@pytest.mark.parametrize("sigma_db", [-30.0, -10.0, 0.0])
def test_alpha4_route_matches_radial_route(scenario, sigma_db):
    cfg = NetworkConfig.from_db(sigma_db, lam=0.01, rate=1.0)
    sp = SpecialCaseParams(8, 0.2)
    a = analytic.outage_alpha4_closed(scenario, cfg, sp).value
    b = analytic.outage_approx_fd(scenario, cfg, sp).value
    assert math.isclose(a, b, rel_tol=1e-8)


def test_alpha4_rejects_other_exponents():
    with pytest.raises(ConfigError):
        analytic.outage_alpha4_closed("2D", NetworkConfig(alpha2=3.0), SpecialCaseParams(1, 0.2))


@pytest.mark.parametrize("scenario", ["2D", "2U", "3U"])
def test_perfect_cancellation_density_independent(scenario):
    sp = SpecialCaseParams(4, 0.2)
    vals = [analytic.outage_alpha4_closed(scenario, NetworkConfig(lam=lam, rate=1.0), sp).value
            for lam in (1e-3, 1e-2, 1e-1)]
    assert max(vals) - min(vals) <= 1e-12


@pytest.mark.parametrize("scenario", ["2D", "3D", "2U", "3U"])
@pytest.mark.parametrize("rate", [0.1, 1.0, 4.0])
@pytest.mark.parametrize("sigma_db", [-math.inf, -30.0])
def test_finite_m_converges_to_pencil_limit(scenario, rate, sigma_db):
    alphas = UP43 if scenario.endswith("U") else {}
    cfg = NetworkConfig.from_db(sigma_db, lam=0.01, rate=rate, **alphas)
    limit = analytic.outage_asymptotic(scenario, cfg, 0.2).value

    def special(m):
        if scenario == "3D":
            return analytic.outage_3d_special(cfg, SpecialCaseParams(m, 0.2)).value
        return analytic.outage_approx_fd(scenario, cfg, SpecialCaseParams(m, 0.2)).value

    assert abs(special(64) - limit) < abs(special(8) - limit)


def test_asymptotic_3u_vanishes_with_side_lobes():
    cfg = NetworkConfig.from_db(-30.0, lam=0.01, rate=1.0, **UP43)
    assert analytic.outage_asymptotic("3U", cfg, 1e-4).value < 1e-2


def test_asymptotic_2d_driven_by_loopback_only():
    cfg = NetworkConfig.from_db(-10.0, lam=0.01, rate=1.0)
    lam, tau = cfg.lam, cfg.tau
    li_only = 1 - sci.quad(lambda r: 2 * math.pi * lam * r * math.exp(-lam * math.pi * r * r)
                           / (1 + cfg.sigma_l2 * tau * r ** 4), 0, np.inf, epsrel=1e-12)[0]
    got = analytic.outage_asymptotic("2D", cfg, 1e-8).value
    assert math.isclose(got, li_only, rel_tol=1e-6)


def test_asymptotic_accepts_special_params():
    cfg = NetworkConfig.from_db(-20.0, lam=0.01, rate=0.5)
    a = analytic.outage_asymptotic("2U", cfg, 0.2).value
    assert a == analytic.outage_asymptotic("2U", cfg, SpecialCaseParams(8, 0.2)).value
