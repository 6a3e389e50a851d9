"""Composite networks mixing two-node and three-node cells.

A cell is two-node with probability ``p_2n``.  FD users of two-node cells
transmit uplink a fraction ``p_u`` of the time, HD uplink users of
three-node cells always do, so the uplink-user field has density
``q * lam`` with ``q = p_u * p_2n + p_3n``.  Everything here is in the
pencil-beam regime (only side lobes interfere, gain ratio gamma^2) with
equal powers and no noise.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .analytic import (
    OutageEstimate, SpecialCaseParams, check_special, g_factor_2d, g_factor_up, li_special, _fd_integral,
)
from .model import ConfigError
from .specfun import QuadratureSpec, csc2pi_over, hyp_F, quad

UPLINK_EXPONENTS = (4.0, 3.0)
GRID_POINTS = 201
REFINE_TOL = 1e-4


@dataclass(frozen=True)
class CompositeMix:
    p_2n: float
    p_u: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p_2n <= 1.0:
            raise ConfigError(f"p_2n must lie in [0, 1], got {self.p_2n}")
        if not 0.0 <= self.p_u <= 1.0:
            raise ConfigError(f"p_u must lie in [0, 1], got {self.p_u}")

    @property
    def p_3n(self):
        return 1.0 - self.p_2n

    @property
    def activity(self):
        """Fraction of cells with an active uplink user."""
        return self.p_u * self.p_2n + self.p_3n


class CompositeOutage(NamedTuple):
    two_node: float
    three_node: float
    total: float


@dataclass(frozen=True)
class ThroughputResult:
    throughput: float
    downlink_success: float
    uplink_success: float
    mix: CompositeMix


def _asymptotic(gamma):
    if isinstance(gamma, SpecialCaseParams):
        if not math.isinf(gamma.m):
            raise ConfigError("composite formulas hold in the M -> inf regime only")
        gamma = gamma.gamma
    return SpecialCaseParams.asymptotic(gamma)


def uplink_config(cfg, alpha1=UPLINK_EXPONENTS[0], alpha2=UPLINK_EXPONENTS[1]):
    """Uplink counterpart of a downlink config (own path-loss exponents)."""
    return cfg.with_(alpha1=alpha1, alpha2=alpha2)


def _check_downlink(cfg):
    check_special(cfg)
    if cfg.alpha1 != cfg.alpha2:
        raise ConfigError("composite downlink needs alpha1 == alpha2")


def outage_3d_composite(cfg, gamma, q):
    """Closed-form HD-user outage with uplink-user activity ``q``."""
    a = cfg.alpha1
    tg = cfg.tau * gamma * gamma
    den = (a - 2.0) * (a + 2.0 * math.pi * tg ** (2.0 / a) * csc2pi_over(a) * q) + 2.0 * a * tg * hyp_F(a, tg)
    return 1.0 - a * (a - 2.0) / den


def _li_2node(cfg):
    return lambda r: 1.0 / (1.0 + cfg.sigma_l2 * cfg.tau * np.asarray(r) ** cfg.alpha1)


def _fd_outage(g_fn, li_fn, cfg, spec):
    if cfg.tau == 0.0:
        return 0.0
    if cfg.sigma_l2 == 0.0 and cfg.alpha1 == cfg.alpha2:
        return OutageEstimate.checked(1.0 - 1.0 / float(g_fn(1.0)), "closed-form").value
    return _fd_integral(g_fn, li_fn, cfg, spec).value


def composite_outage_downlink(cfg, gamma, mix, spec=None):
    """Downlink outage of FD users, HD users and the mixed population."""
    _check_downlink(cfg)
    special = _asymptotic(gamma)
    q = mix.activity
    spec = spec or QuadratureSpec()
    p2 = _fd_outage(lambda r: g_factor_2d(r, cfg, special, user_scale=q), _li_2node(cfg), cfg, spec)
    p3 = 0.0 if cfg.tau == 0.0 else outage_3d_composite(cfg, special.gamma, q)
    return CompositeOutage(p2, p3, mix.p_2n * p2 + mix.p_3n * p3)


def composite_outage_uplink(cfg, gamma, mix, spec=None):
    """Uplink outage at two-node BSs, three-node BSs and on average."""
    check_special(cfg)
    special = _asymptotic(gamma)
    q = mix.activity
    spec = spec or QuadratureSpec()
    g_fn = lambda r: g_factor_up(r, cfg, special, user_scale=q)  # noqa: E731
    p2 = _fd_outage(g_fn, _li_2node(cfg), cfg, spec)
    p3 = _fd_outage(g_fn, lambda r: li_special("3U", r, cfg, special, spec=spec.tightened()), cfg, spec)
    return CompositeOutage(p2, p3, mix.p_2n * p2 + mix.p_3n * p3)


def _resolve_uplink(cfg, uplink_cfg):
    up = uplink_config(cfg) if uplink_cfg is None else uplink_cfg
    if up.rate != cfg.rate or up.lam != cfg.lam:
        raise ConfigError("uplink and downlink configs must share rate and density")
    return up


def throughput(cfg, gamma, mix, uplink_cfg=None, spec=None):
    """Sum of downlink and uplink successful rates per unit area.

    ``cfg`` drives the downlink, ``uplink_cfg`` (default: ``cfg`` with
    path-loss exponents 4 and 3) the uplink.
    """
    up = _resolve_uplink(cfg, uplink_cfg)
    d = composite_outage_downlink(cfg, gamma, mix, spec).total
    u = composite_outage_uplink(up, gamma, mix, spec).total
    bits = math.log2(1.0 + cfg.tau)
    t = cfg.lam * (1.0 - d) * bits + cfg.lam * mix.activity * (1.0 - u) * bits
    return ThroughputResult(t, 1.0 - d, 1.0 - u, mix)


def _radial(fn, lam, spec):
    """2*pi*lam * integral_0^inf r * fn(r) dr."""
    res = quad(lambda r: 2.0 * math.pi * lam * r * fn(r), 0.0, spec=spec, scale=1.0 / math.sqrt(math.pi * lam))
    return res.value


def _full_fd_terms(cfg, gamma, up, spec):
    """Ingredients of the throughput when every FD user is bidirectional."""
    special = _asymptotic(gamma)
    lam = cfg.lam
    a = cfg.alpha1
    tg = cfg.tau * special.gamma ** 2
    g2d = float(g_factor_2d(1.0, cfg, special))
    hd = 2.0 / (1.0 + 4.0 * math.pi / a * tg ** (2.0 / a) * csc2pi_over(a) + g2d)
    li2d = _li_2node(cfg)
    fd_down = _radial(lambda r: np.exp(-g2d * math.pi * lam * r * r) * li2d(r), lam, spec)
    li2u = _li_2node(up)

    def g2u(r):
        return g_factor_up(r, up, special)

    def li3u(r):
        return li_special("3U", r, up, special, spec=spec.tightened())

    up2 = _radial(lambda r: np.exp(-g2u(r) * math.pi * lam * r * r) * li2u(r), lam, spec)
    up3 = _radial(lambda r: np.exp(-g2u(r) * math.pi * lam * r * r) * li3u(r), lam, spec)
    return hd, fd_down, up2, up3


def throughput_full_fd(cfg, gamma, p_2n, uplink_cfg=None, spec=None):
    """Throughput at ``p_u = 1`` written directly as a function of ``p_2n``;
    must agree with :func:`throughput` and is affine in ``p_2n``."""
    check_special(cfg)
    _check_downlink(cfg)
    up = _resolve_uplink(cfg, uplink_cfg)
    spec = spec or QuadratureSpec()
    hd, fd_down, up2, up3 = _full_fd_terms(cfg, gamma, up, spec)
    bits = math.log2(1.0 + cfg.tau)
    return cfg.lam * bits * ((1.0 - p_2n) * hd + p_2n * fd_down + p_2n * up2 + (1.0 - p_2n) * up3)


def _maximize(objective, grid_points=GRID_POINTS, tol=REFINE_TOL):
    grid = np.linspace(0.0, 1.0, grid_points)
    values = np.array([objective(p) for p in grid])
    i = int(np.argmax(values))
    best_p, best_v = float(grid[i]), float(values[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
    res = minimize_scalar(lambda p: -objective(p), bounds=(lo, hi), method="bounded",
                          options={"xatol": tol})
    if res.success and -res.fun > best_v:
        best_p, best_v = float(res.x), float(-res.fun)
    return best_p, best_v


def optimize_p2n_success(direction, cfg, gamma, p_u, spec=None, grid_points=GRID_POINTS):
    """Two-node fraction maximising downlink or uplink success probability.

    A 201-point grid locates the best bracket, a bounded scalar search
    refines it to 1e-4 in ``p_2n``.
    """
    if direction == "downlink":
        fn = composite_outage_downlink
    elif direction == "uplink":
        fn = composite_outage_uplink
    else:
        raise ConfigError(f"direction must be 'downlink' or 'uplink', got {direction!r}")
    return _maximize(lambda p: 1.0 - fn(cfg, gamma, CompositeMix(float(p), p_u), spec).total, grid_points)


@dataclass(frozen=True)
class ThroughputDecision:
    p_2n: int
    throughput: float
    gain: float
    threshold: float


def optimize_p2n_throughput(cfg, gamma, uplink_cfg=None, spec=None):
    """Throughput-optimal two-node fraction when FD users are always
    bidirectional.

    Throughput is affine in ``p_2n``, so the optimum is 0 or 1 according to
    the sign of its slope: two-node cells win when the FD gain integral
    exceeds the HD downlink success.
    """
    check_special(cfg)
    _check_downlink(cfg)
    up = _resolve_uplink(cfg, uplink_cfg)
    spec = spec or QuadratureSpec()
    hd, fd_down, up2, up3 = _full_fd_terms(cfg, gamma, up, spec)
    gain = fd_down + up2 - up3
    p_star = 1 if gain > hd else 0
    bits = math.log2(1.0 + cfg.tau)
    t = cfg.lam * bits * (fd_down + up2 if p_star else hd + up3)
    return ThroughputDecision(p_star, t, gain, hd)


def throughput_grid(cfg, gamma, p_u=1.0, points=GRID_POINTS, uplink_cfg=None, spec=None):
    """Throughput on an even grid of ``p_2n`` values."""
    grid = np.linspace(0.0, 1.0, points)
    return grid, np.array([throughput(cfg, gamma, CompositeMix(float(p), p_u), uplink_cfg, spec).throughput
                           for p in grid])
