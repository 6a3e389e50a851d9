"""Outage probability of full-duplex cellular networks from stochastic
geometry.

Every expression has the same skeleton: condition on the serving distance
r (Rayleigh distributed with density 2*pi*lam*r*exp(-lam*pi*r^2)), write the
conditional coverage as a product of Laplace transforms of the interference
terms evaluated at s(r) = tau * r^alpha1 / (P * G_b * G_u), and integrate
over r.  The Laplace transforms that have no closed form (the nearest
co-channel interferer at a random distance, and the inhomogeneous uplink
user field) are computed with nested quadrature.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .model import ConfigError, passive_suppression, sector_offsets
from .specfun import QuadratureSpec, csc2pi_over, hyp_F, quad

_ROUNDING_SLACK = 1e-9
_RHO_FLOOR = 1e-60


class NumericalError(ArithmeticError):
    """A computed probability fell outside [0, 1] by more than rounding."""


class Scenario(str, Enum):
    D2 = "2D"
    D3 = "3D"
    U2 = "2U"
    U3 = "3U"

    @property
    def architecture(self):
        return "two-node" if self.value[0] == "2" else "three-node"

    @property
    def link(self):
        return "downlink" if self.value[1] == "D" else "uplink"

    @property
    def has_loopback(self):
        return self is not Scenario.D3

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown scenario {value!r}; expected one of 2D, 3D, 2U, 3U") from None


@dataclass(frozen=True)
class OutageEstimate:
    value: float
    method: str
    std_error: Optional[float] = None
    n_realizations: Optional[int] = None
    error_bound: Optional[float] = None

    @classmethod
    def checked(cls, raw, method, **kwargs):
        """Clamp ``raw`` to [0, 1], refusing anything beyond rounding slack."""
        if not (-_ROUNDING_SLACK <= raw <= 1.0 + _ROUNDING_SLACK):
            raise NumericalError(f"{method} outage {raw!r} is not a probability")
        return cls(min(1.0, max(0.0, raw)), method, **kwargs)

    @property
    def success(self):
        return 1.0 - self.value


def _spec(spec):
    return spec if spec is not None else QuadratureSpec()


def _as_array(x):
    return np.asarray(x, dtype=float)


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Loopback interference
# ---------------------------------------------------------------------------


def laplace_li_2node(s, cfg, antennas, node="user"):
    """Laplace transform of the residual loopback at a two-node terminal.

    ``node="user"`` is the FD user of the downlink; ``node="bs"`` the FD BS
    of the uplink (no passive suppression: both sectors coincide).
    """
    s = _as_array(s)
    if node == "user":
        k = cfg.p_u * antennas.g_u ** 2
    elif node == "bs":
        k = cfg.bs_loopback_power * antennas.g_b ** 2
    else:
        raise ConfigError(f"node must be 'user' or 'bs', got {node!r}")
    return _scalar_or_array(1.0 / (1.0 + s * k * cfg.sigma_l2))


def _angle_average(a, theta_max, clamp=True, spec=None):
    """(1/2pi) * integral over [-pi, pi) of 1 / (1 + a * f(theta)) for each a."""
    a = np.atleast_1d(_as_array(a))
    spec = _spec(spec)
    points = [2.0 * theta_max] if clamp and 2.0 * theta_max < math.pi else None
    out = np.empty_like(a)
    for i, ai in enumerate(a):
        if ai == 0.0:
            out[i] = 1.0
            continue
        res = quad(lambda t: 1.0 / (1.0 + ai * passive_suppression(t, theta_max, clamp)),
                   0.0, math.pi, spec=spec, points=points)
        out[i] = res.value / math.pi
    return out


def laplace_li_3u(s, cfg, antennas, spec=None):
    """Laplace transform of the loopback at a three-node BS.

    The angle between its transmit and receive sectors is uniform over the
    sector grid; only the aligned case (angle 0) sees the full G_b^2 gain,
    every other case sees G_b*H_b scaled by the passive-suppression factor.
    ``m_b = inf`` gives the continuous angle average.
    """
    s = _as_array(s)
    k = s * cfg.bs_loopback_power * cfg.sigma_l2
    if math.isinf(antennas.m_b):
        out = _angle_average(np.ravel(k) * antennas.g_b * antennas.h_b, antennas.theta_max,
                             antennas.clamp_suppression, spec).reshape(np.shape(k))
        return _scalar_or_array(out)
    theta = antennas.sector_offsets()
    coef = np.where(theta == 0.0, antennas.g_b ** 2,
                    antennas.g_b * antennas.h_b * antennas.suppression(theta))
    out = np.mean(1.0 / (1.0 + np.multiply.outer(k, coef)), axis=-1)
    return _scalar_or_array(out)


# ---------------------------------------------------------------------------
# Co-channel interference
# ---------------------------------------------------------------------------


def _active(table):
    return [(d, g) for _, d, g in table if d > 0.0]


def laplace_interference_bs_down(r, cfg, antennas, tau=None):
    """Laplace transform of BS interference at a downlink receiver whose
    serving BS is at distance ``r`` (every other BS is farther away)."""
    tau = cfg.tau if tau is None else tau
    r = _as_array(r)
    table = antennas.table("u", "b", cfg.lam)
    g1 = table.gains[0]
    a = cfg.alpha1
    expo = 0.0
    for dens, gain in _active(table):
        ratio = gain / g1
        expo = expo + 2.0 * math.pi * dens / (a - 2.0) * ratio * hyp_F(a, ratio * tau) * tau
    return _scalar_or_array(np.exp(-expo * r ** 2))


def _sq_yF(rho, c, alpha):
    """rho^2 * y * F(alpha, y) with y = c / rho^alpha, finite as rho -> 0."""
    y = c / rho ** alpha
    return rho ** 2 * y * hyp_F(alpha, y)


def guarded_field_exponent(rho, s, power, table, alpha):
    """-log E[exp(-s I)] for a thinned PPP field outside radius ``rho``.

    Equals sum_k 2*pi*lam_k * integral_rho^inf (1 - 1/(1 + s P G_k y^-alpha)) y dy.
    """
    rho = np.maximum(_as_array(rho), _RHO_FLOOR)
    total = np.zeros_like(rho)
    if s == 0.0:
        return total
    for dens, gain in _active(table):
        total += 2.0 * math.pi * dens / (alpha - 2.0) * _sq_yF(rho, s * power * gain, alpha)
    return total


def _nearest_guard_laplace(s, power, table, alpha, lam, spec):
    """Average the guarded-field transform over a nearest-neighbour distance."""
    if s == 0.0:
        return 1.0, 0.0

    def integrand(rho):
        return 2.0 * math.pi * lam * rho * np.exp(
            -math.pi * lam * rho ** 2 - guarded_field_exponent(rho, s, power, table, alpha))

    res = quad(integrand, 0.0, spec=spec, scale=1.0 / math.sqrt(math.pi * lam))
    return res.value, res.error


def _per_s(fn, s):
    s = _as_array(s)
    out = np.array([fn(si) for si in np.ravel(s)]).reshape(s.shape)
    return _scalar_or_array(out)


def laplace_interference_user_2d(s, cfg, antennas, spec=None):
    """Laplace transform of uplink-user interference at a two-node receiver.

    The closest other-cell uplink user sits at a nearest-neighbour distance
    rho and acts as the boundary of the interfering field.
    """
    spec = _spec(spec)
    table = antennas.table("u", "u", cfg.lam)
    return _per_s(lambda si: _nearest_guard_laplace(si, cfg.p_u, table, cfg.alpha2, cfg.lam, spec)[0], s)


def laplace_interference_bs_up(s, cfg, antennas, spec=None):
    """Laplace transform of BS interference at an uplink BS (nearest other BS
    at a nearest-neighbour distance, BS-BS path loss ``alpha2``)."""
    spec = _spec(spec)
    table = antennas.table("b", "b", cfg.lam)
    return _per_s(lambda si: _nearest_guard_laplace(si, cfg.p_b, table, cfg.alpha2, cfg.lam, spec)[0], s)


def laplace_interference_user_3d(s, cfg, antennas):
    """Laplace transform of user interference at a three-node receiver; the
    intra-cell uplink user means the field starts at distance 0."""
    s = _as_array(s)
    a = cfg.alpha2
    table = antennas.table("u", "u", cfg.lam)
    expo = 0.0
    for dens, gain in _active(table):
        expo = expo + 2.0 * math.pi ** 2 * dens / a * csc2pi_over(a) * (s * cfg.p_u * gain) ** (2.0 / a)
    return _scalar_or_array(np.exp(-expo))


def _user_3u_exponent(s, cfg, table, spec, homogeneous):
    a = cfg.alpha1
    lam = cfg.lam
    total = 0.0
    err = 0.0
    if s == 0.0:
        return 0.0, 0.0
    for dens, gain in _active(table):
        c = s * cfg.p_u * gain
        head = 2.0 * math.pi / a * csc2pi_over(a) * c ** (2.0 / a)
        if homogeneous:
            corr, cerr = 0.0, 0.0
        else:
            res = quad(lambda z: c * np.exp(-math.pi * lam * z) / (c + z ** (a / 2.0)),
                       0.0, spec=spec, scale=1.0 / (math.pi * lam))
            corr, cerr = res.value, res.error
        total += math.pi * dens * (head - corr)
        err += math.pi * dens * cerr
    return total, err


def laplace_interference_user_3u(s, cfg, antennas, spec=None, homogeneous=False):
    """Laplace transform of other-cell user interference at an uplink BS.

    Users of other cells form an inhomogeneous field of intensity
    lam_k * (1 - exp(-pi*lam*x^2)).  ``homogeneous=True`` drops the
    correction, giving a field of constant intensity (more interference).
    """
    spec = _spec(spec)
    table = antennas.table("b", "u", cfg.lam)
    return _per_s(lambda si: math.exp(-_user_3u_exponent(si, cfg, table, spec, homogeneous)[0]), s)


# ---------------------------------------------------------------------------
# Outage: general theorems
# ---------------------------------------------------------------------------


_ZERO = OutageEstimate(0.0, "closed-form", error_bound=0.0)


def _outer(integrand, cfg, spec, method="quadrature"):
    res = quad(integrand, 0.0, spec=spec, scale=1.0 / math.sqrt(math.pi * cfg.lam))
    return OutageEstimate.checked(1.0 - res.value, method, error_bound=res.error)


def outage(scenario, cfg, antennas, spec=None, homogeneous_uplink=False):
    """Outage probability of the typical receiver/BS for ``scenario``.

    Parameters
    ----------
    scenario : Scenario or {"2D", "3D", "2U", "3U"}
    cfg : NetworkConfig
    antennas : AntennaSystem
    spec : QuadratureSpec, optional
        Outer tolerance; nested integrals get a ten times tighter budget.
    homogeneous_uplink : bool
        Treat other-cell uplink users as a homogeneous field (drops the
        exclusion correction); an upper bound on the uplink outage.
    """
    scenario = Scenario.parse(scenario)
    if cfg.tau == 0.0:
        return _ZERO
    spec = _spec(spec)
    inner = spec.tightened()
    lam = cfg.lam
    tau = cfg.tau
    a1 = cfg.alpha1
    gain = antennas.g_b * antennas.g_u
    power = cfg.p_b if scenario.link == "downlink" else cfg.p_u
    tab_uu = antennas.table("u", "u", lam)
    tab_bb = antennas.table("b", "b", lam)
    tab_bu = antennas.table("b", "u", lam)

    def integrand(r):
        s = tau * r ** a1 / (power * gain)
        base = 2.0 * math.pi * lam * r * np.exp(-lam * math.pi * r ** 2 - s * cfg.sigma_n2)
        if scenario.link == "downlink":
            base = base * laplace_interference_bs_down(r, cfg, antennas, tau)
            if scenario is Scenario.D2:
                base = base * laplace_li_2node(s, cfg, antennas, "user")
            else:
                base = base * laplace_interference_user_3d(s, cfg, antennas)
        elif scenario is Scenario.U2:
            base = base * laplace_li_2node(s, cfg, antennas, "bs")
        else:
            base = base * laplace_li_3u(s, cfg, antennas, inner)
        out = np.zeros_like(base)
        live = base > 0.0
        for i in np.flatnonzero(live):
            si = float(s[i])
            if scenario is Scenario.D2:
                f = _nearest_guard_laplace(si, cfg.p_u, tab_uu, cfg.alpha2, lam, inner)[0]
            elif scenario is Scenario.D3:
                f = 1.0
            else:
                f = _nearest_guard_laplace(si, cfg.p_b, tab_bb, cfg.alpha2, lam, inner)[0]
                f *= math.exp(-_user_3u_exponent(si, cfg, tab_bu, inner, homogeneous_uplink)[0])
            out[i] = base[i] * f
        return out

    return _outer(integrand, cfg, spec)


# ---------------------------------------------------------------------------
# Special cases: equal sectors, side lobes, powers; no noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpecialCaseParams:
    """Common sector count ``m`` and side-lobe ratio ``gamma`` at BSs and
    users.  ``m = inf`` is the pencil-beam limit in which only side lobes
    interfere."""

    m: float
    gamma: float

    def __post_init__(self):
        if not self.m >= 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")

    @classmethod
    def asymptotic(cls, gamma):
        return cls(math.inf, gamma)

    @classmethod
    def from_config(cls, cfg, antennas):
        """Validate the equal-parameter assumptions and build the params."""
        problems = []
        if antennas.m_b != antennas.m_u:
            problems.append("M_b != M_u")
        if antennas.gamma_b != antennas.gamma_u:
            problems.append("gamma_b != gamma_u")
        if cfg.p_b != cfg.p_u:
            problems.append("P_b != P_u")
        if cfg.sigma_n2 != 0.0:
            problems.append("sigma_n2 != 0")
        if problems:
            raise ConfigError("special-case assumptions violated: " + ", ".join(problems))
        return cls(antennas.m_b, antennas.gamma_b)

    @property
    def weights(self):
        """Case weights (fraction of the density in each orientation case)."""
        m = self.m
        if math.isinf(m):
            return np.array([0.0, 0.0, 0.0, 1.0])
        return np.array([1.0, m - 1.0, m - 1.0, (m - 1.0) ** 2]) / m ** 2

    @property
    def gains(self):
        """Case power gains relative to the main-lobe link gain."""
        g = self.gamma
        return np.array([1.0, g, g, g * g])

    def terms(self):
        return [(w, g) for w, g in zip(self.weights, self.gains) if w > 0.0]


def check_special(cfg):
    if cfg.p_b != cfg.p_u or cfg.sigma_n2 != 0.0:
        raise ConfigError("special-case formulas need P_b == P_u and sigma_n2 == 0")


def _gF(alpha, x):
    """x * F(alpha, x), zero at x = 0."""
    x = _as_array(x)
    return x * hyp_F(alpha, x)


def g_factor_2d(r, cfg, special, tau=None, user_scale=1.0):
    """Interference scaling of a two-node receiver under the guard-distance
    approximation (serving distance protects against both fields).
    ``user_scale`` thins the uplink-user field (composite networks)."""
    tau = cfg.tau if tau is None else tau
    a1, a2 = cfg.alpha1, cfg.alpha2
    k = _as_array(r) ** (a1 - a2)
    total = 1.0
    for w, g in special.terms():
        total = total + 2.0 * w * (_gF(a1, g * tau) / (a1 - 2.0)
                                   + user_scale * _gF(a2, k * g * tau) / (a2 - 2.0))
    return total


def g_factor_up(r, cfg, special, tau=None, user_scale=1.0):
    """Interference scaling at an uplink BS: BS field guarded at r, user
    field homogeneous.  ``user_scale`` thins the user field (composite)."""
    tau = cfg.tau if tau is None else tau
    a1, a2 = cfg.alpha1, cfg.alpha2
    k = _as_array(r) ** (a1 - a2)
    total = 1.0
    for w, g in special.terms():
        user = math.pi * tau ** (2.0 / a1) / a1 * csc2pi_over(a1) * g ** (2.0 / a1)
        total = total + 2.0 * w * (user_scale * user + _gF(a2, k * g * tau) / (a2 - 2.0))
    return total


def g_factor_3d(r, cfg, special, tau=None, user_scale=1.0):
    """Interference scaling at a three-node (HD) receiver."""
    tau = cfg.tau if tau is None else tau
    a1, a2 = cfg.alpha1, cfg.alpha2
    k = _as_array(r) ** (2.0 * a1 / a2 - 2.0)
    total = 1.0
    for w, g in special.terms():
        total = total + 2.0 * w * (_gF(a1, g * tau) / (a1 - 2.0)
                                   + user_scale * math.pi * k / a2 * csc2pi_over(a2) * (g * tau) ** (2.0 / a2))
    return total


def li_special(scenario, r, cfg, special, theta_max=2.0 * math.pi / 3.0, clamp=True, spec=None):
    """Loopback factor in the special case, as a function of r."""
    scenario = Scenario.parse(scenario)
    x = cfg.sigma_l2 * cfg.tau * _as_array(r) ** cfg.alpha1
    if scenario is Scenario.D3:
        return np.ones_like(x)
    if scenario in (Scenario.D2, Scenario.U2):
        return 1.0 / (1.0 + x)
    m = special.m
    if math.isinf(m):
        return _angle_average(np.ravel(x) * special.gamma, theta_max, clamp, spec).reshape(x.shape)
    theta = sector_offsets(m)
    f = passive_suppression(theta, theta_max, clamp)
    coef = np.where(theta == 0.0, 1.0, special.gamma * f)
    return np.mean(1.0 / (1.0 + np.multiply.outer(x, coef)), axis=-1)


def _fd_integral(g_fn, li_fn, cfg, spec):
    lam = cfg.lam

    def integrand(r):
        return 2.0 * math.pi * lam * r * np.exp(-g_fn(r) * lam * math.pi * r ** 2) * li_fn(r)

    return _outer(integrand, cfg, spec)


def _g_for(scenario, cfg, special):
    if scenario is Scenario.D2:
        return lambda r: g_factor_2d(r, cfg, special)
    if scenario is Scenario.D3:
        return lambda r: g_factor_3d(r, cfg, special)
    return lambda r: g_factor_up(r, cfg, special)


def outage_approx_fd(scenario, cfg, special, theta_max=2.0 * math.pi / 3.0, clamp=True, spec=None):
    """Outage of an FD-mode node (2D, 2U or 3U) under the guard-distance and
    homogeneous-uplink-field approximations."""
    scenario = Scenario.parse(scenario)
    if scenario is Scenario.D3:
        raise ConfigError("outage_approx_fd covers 2D, 2U and 3U; use outage_3d_special for 3D")
    check_special(cfg)
    if cfg.tau == 0.0:
        return _ZERO
    spec = _spec(spec)
    g_fn = _g_for(scenario, cfg, special)
    if cfg.sigma_l2 == 0.0 and cfg.alpha1 == cfg.alpha2:
        g = float(g_fn(1.0))
        return OutageEstimate.checked(1.0 - 1.0 / g, "closed-form", error_bound=0.0)
    return _fd_integral(g_fn, lambda r: li_special(scenario, r, cfg, special, theta_max, clamp,
                                                   spec.tightened()), cfg, spec)


def outage_3d_special(cfg, special, spec=None, check_tol=1e-6, force_quadrature=False):
    """Three-node downlink outage in the special case.

    With alpha1 == alpha2 the interference scaling does not depend on r and
    the outage is 1 - 1/G in closed form; the quadrature path is evaluated
    too and must agree to ``check_tol`` relative.  ``force_quadrature``
    returns the quadrature value instead.
    """
    check_special(cfg)
    if cfg.tau == 0.0:
        return _ZERO
    spec = _spec(spec)
    g_fn = _g_for(Scenario.D3, cfg, special)
    numeric = _fd_integral(g_fn, lambda r: 1.0, cfg, spec)
    if cfg.alpha1 != cfg.alpha2 or force_quadrature:
        return numeric
    closed = 1.0 - 1.0 / float(g_fn(1.0))
    if abs(closed - numeric.value) > check_tol * max(abs(closed), 1e-300):
        raise NumericalError(f"closed form {closed!r} disagrees with quadrature {numeric.value!r}")
    return OutageEstimate.checked(closed, "closed-form", error_bound=numeric.error_bound)


def outage_asymptotic(scenario, cfg, gamma, theta_max=2.0 * math.pi / 3.0, clamp=True, spec=None):
    """Outage in the pencil-beam limit M -> inf (only side lobes interfere).

    ``gamma`` may be a float or a :class:`SpecialCaseParams` (its ``m`` is
    ignored).
    """
    scenario = Scenario.parse(scenario)
    check_special(cfg)
    gamma = gamma.gamma if isinstance(gamma, SpecialCaseParams) else gamma
    special = SpecialCaseParams.asymptotic(gamma)
    if cfg.tau == 0.0:
        return _ZERO
    spec = _spec(spec)
    g_fn = _g_for(scenario, cfg, special)
    if scenario is Scenario.D3:
        return outage_3d_special(cfg, special, spec)
    if cfg.sigma_l2 == 0.0 and cfg.alpha1 == cfg.alpha2:
        return OutageEstimate.checked(1.0 - 1.0 / float(g_fn(1.0)), "closed-form", error_bound=0.0)
    return _fd_integral(g_fn, lambda r: li_special(scenario, r, cfg, special, theta_max, clamp,
                                                   spec.tightened()), cfg, spec)


def y_factor(scenario, cfg, special):
    """Closed-form interference scaling for alpha1 = alpha2 = 4."""
    scenario = Scenario.parse(scenario)
    tau = cfg.tau
    total = 1.0
    for w, g in special.terms():
        if scenario is Scenario.D2:
            total += 2.0 * tau * w * g * hyp_F(4.0, g * tau)
        elif scenario is Scenario.D3:
            total += w * (hyp_F(4.0, g * tau) * g * tau + 0.5 * math.pi * math.sqrt(g * tau))
        else:
            total += w * (0.5 * math.pi * math.sqrt(tau * g) + tau * g * hyp_F(4.0, g * tau))
    return total


def outage_alpha4_closed(scenario, cfg, special, theta_max=2.0 * math.pi / 3.0, clamp=True, spec=None):
    """FD-node outage for alpha1 = alpha2 = 4.

    Perfect cancellation gives 1 - 1/Y exactly.  Otherwise the serving
    distance is integrated in v = r^2, where the loopback factor becomes a
    rational function of v and the density enters only through
    exp(-Y*lam*pi*v).
    """
    scenario = Scenario.parse(scenario)
    if scenario is Scenario.D3:
        raise ConfigError("outage_alpha4_closed covers 2D, 2U and 3U")
    if cfg.alpha1 != 4.0 or cfg.alpha2 != 4.0:
        raise ConfigError("outage_alpha4_closed needs alpha1 == alpha2 == 4")
    check_special(cfg)
    if cfg.tau == 0.0:
        return _ZERO
    spec = _spec(spec)
    y = y_factor(scenario, cfg, special)
    if cfg.sigma_l2 == 0.0:
        return OutageEstimate.checked(1.0 - 1.0 / y, "closed-form", error_bound=0.0)
    lam = cfg.lam
    inner = spec.tightened()

    def integrand(v):
        return math.pi * lam * np.exp(-y * lam * math.pi * v) * li_special(
            scenario, np.sqrt(v), cfg, special, theta_max, clamp, inner)

    res = quad(integrand, 0.0, spec=spec, scale=1.0 / (y * math.pi * lam))
    return OutageEstimate.checked(1.0 - res.value, "quadrature", error_bound=res.error)
