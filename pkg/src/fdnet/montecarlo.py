"""Monte Carlo simulation of Poisson full-duplex cellular networks.

The typical receiver sits at the origin.  Downlink: a user served by its
nearest BS.  Uplink: a BS whose served user is at a Rayleigh-distributed
distance with a uniform bearing.  Interferers are drawn inside a disk window
and the mean interference from beyond the window is added back.

Two geometries are supported:

``exact``
    Matches the general outage integrals.  The co-channel field that
    contains the closest interferer of unknown distance (uplink users seen
    by a two-node user, BSs seen by a BS) has its nearest point removed;
    other-cell uplink users seen by a BS are thinned with probability
    ``1 - exp(-pi*lam*d^2)``.
``guard``
    Matches the special-case approximations: those same fields are emptied
    inside the serving distance ``r`` and the uplink user field is
    homogeneous.

Every realisation draws from its own stream derived from (seed, index), and
chunks are concatenated in index order, so results do not depend on how
many workers ran them.
"""

import csv
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import repeat
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .analytic import OutageEstimate, Scenario
from .model import AntennaSystem, ConfigError, NetworkConfig, db_to_linear, sector_offsets

MIN_EXPECTED_POINTS = 300.0


@dataclass(frozen=True)
class SeedPolicy:
    """Per-realisation random streams derived from a master seed."""

    master: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master) < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.master}")

    def generator(self, index):
        seq = np.random.SeedSequence(int(self.master), spawn_key=(int(index),))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class SimulationOptions:
    """Knobs of the network sampler.

    Parameters
    ----------
    window_radius : float, optional
        Radius of the simulation disk.  By default chosen so that the
        window holds ``expected_points`` BSs on average.
    far_field : bool
        Add the mean interference from outside the window.
    orientation : {"geometric", "thinning"}
        Decide each interferer's gain from its sampled position and
        orientation, or draw its orientation case directly.
    geometry : {"exact", "guard"}
        See the module docstring.
    association : bool
        Draw a dense user process (``user_density_factor * lam``) and pick
        one uplink user per Voronoi cell instead of an independent PPP.
    user_activity : float
        Fraction of uplink users transmitting (thins the user field).
    workers, chunk_size : int
        Process-pool size and realisations per work item.
    """

    window_radius: Optional[float] = None
    expected_points: float = 1000.0
    far_field: bool = True
    orientation: str = "geometric"
    geometry: str = "exact"
    association: bool = False
    user_density_factor: float = 20.0
    user_activity: float = 1.0
    workers: int = 1
    chunk_size: int = 500

    def __post_init__(self):
        if self.orientation not in ("geometric", "thinning"):
            raise ConfigError(f"orientation must be 'geometric' or 'thinning', got {self.orientation!r}")
        if self.geometry not in ("exact", "guard"):
            raise ConfigError(f"geometry must be 'exact' or 'guard', got {self.geometry!r}")
        if not 0.0 <= self.user_activity <= 1.0:
            raise ConfigError("user_activity must lie in [0, 1]")
        if self.workers < 1 or self.chunk_size < 1:
            raise ConfigError("workers and chunk_size must be >= 1")
        if self.user_density_factor < 1:
            raise ConfigError("user_density_factor must be >= 1")

    def window(self, lam):
        w = self.window_radius
        if w is None:
            w = math.sqrt(self.expected_points / (math.pi * lam))
        if not w > 0:
            raise ConfigError(f"window radius must be > 0, got {w}")
        if lam * math.pi * w * w < MIN_EXPECTED_POINTS:
            raise ConfigError(f"window radius {w} holds fewer than {MIN_EXPECTED_POINTS:.0f} expected points")
        return w

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass
class PointField:
    """Interfering transmitters: position, main-lobe direction, fading.

    ``gain`` holds a per-point orientation-case gain when orientation
    cases were sampled directly instead of tested geometrically.
    """

    x: np.ndarray
    y: np.ndarray
    orient: np.ndarray
    fade: np.ndarray
    gain: Optional[np.ndarray] = None

    @classmethod
    def empty(cls):
        z = np.zeros(0)
        return cls(z, z.copy(), z.copy(), z.copy())

    def __len__(self):
        return self.x.shape[0]


@dataclass
class NetworkRealization:
    """One draw of the network around the typical receiver."""

    scenario: Scenario
    window_radius: float
    r: float
    serving_bearing: float
    signal_fade: float
    bs: PointField
    users: PointField
    li_fade: float = 0.0
    li_theta: float = 0.0
    user_activity: float = 1.0
    far_field: bool = False
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _ppp(rng, lam, w):
    n = rng.poisson(lam * math.pi * w * w)
    rad = w * np.sqrt(rng.random(n))
    ang = rng.uniform(0.0, 2.0 * math.pi, n)
    return rad * np.cos(ang), rad * np.sin(ang)


def _decorate(rng, x, y, table, orientation):
    n = x.shape[0]
    orient = rng.uniform(0.0, 2.0 * math.pi, n)
    fade = rng.exponential(1.0, n)
    gain = None
    if orientation == "thinning":
        p = np.asarray(table.densities) / table.total_density
        gain = np.asarray(table.gains)[rng.choice(4, size=n, p=p)]
    return PointField(x, y, orient, fade, gain)


def _drop_nearest(x, y):
    if x.shape[0] == 0:
        return x, y
    k = np.argmin(x * x + y * y)
    keep = np.ones(x.shape[0], dtype=bool)
    keep[k] = False
    return x[keep], y[keep]


def _outside(x, y, r):
    keep = x * x + y * y >= r * r
    return x[keep], y[keep]


def _draw_theta(rng, scenario, antennas):
    if scenario is not Scenario.U3:
        return 0.0
    if math.isinf(antennas.m_b):
        return rng.uniform(-math.pi, math.pi)
    grid = sector_offsets(antennas.m_b)
    return float(grid[rng.integers(grid.shape[0])])


def sample_realization(cfg, antennas, scenario, window_radius, rng, options=None):
    """Draw the typical receiver's surroundings for ``scenario``.

    ``rng`` is a :class:`numpy.random.Generator` (one stream per
    realisation; see :class:`SeedPolicy`).
    """
    scenario = Scenario.parse(scenario)
    options = options or SimulationOptions()
    if not window_radius > 0:
        raise ConfigError(f"window radius must be > 0, got {window_radius}")
    if options.association:
        return _sample_association(cfg, antennas, scenario, window_radius, rng, options)
    lam = cfg.lam
    w = window_radius
    act = options.user_activity
    guard = options.geometry == "guard"

    if scenario.link == "downlink":
        bx, by = _ppp(rng, lam, w)
        if bx.shape[0] == 0:
            r, bearing = math.inf, 0.0
        else:
            d2 = bx * bx + by * by
            k = int(np.argmin(d2))
            r = math.sqrt(d2[k])
            bearing = math.atan2(by[k], bx[k])
            bx, by = _drop_nearest(bx, by)
        bs = _decorate(rng, bx, by, antennas.table("u", "b", lam), options.orientation)
        ux, uy = _ppp(rng, lam * act, w)
        if scenario is Scenario.D2:
            ux, uy = _outside(ux, uy, r) if guard else _drop_nearest(ux, uy)
        users = _decorate(rng, ux, uy, antennas.table("u", "u", lam), options.orientation)
    else:
        r = math.sqrt(rng.exponential(1.0) / (math.pi * lam))
        bearing = rng.uniform(0.0, 2.0 * math.pi)
        bx, by = _ppp(rng, lam, w)
        bx, by = _outside(bx, by, r) if guard else _drop_nearest(bx, by)
        bs = _decorate(rng, bx, by, antennas.table("b", "b", lam), options.orientation)
        ux, uy = _ppp(rng, lam * act, w)
        if not guard:
            keep = rng.random(ux.shape[0]) < -np.expm1(-math.pi * lam * (ux * ux + uy * uy))
            ux, uy = ux[keep], uy[keep]
        users = _decorate(rng, ux, uy, antennas.table("b", "u", lam), options.orientation)

    signal_fade = rng.exponential(1.0)
    li_fade = rng.exponential(1.0)
    theta = _draw_theta(rng, scenario, antennas)
    return NetworkRealization(scenario, w, r, bearing, signal_fade, bs, users, li_fade, theta,
                              user_activity=act, far_field=options.far_field)


def _pick_one_per_group(groups, n_groups, keys):
    """Index of the largest-key member of each group, -1 for empty groups."""
    chosen = np.full(n_groups, -1, dtype=np.int64)
    if groups.shape[0] == 0:
        return chosen
    order = np.lexsort((keys, groups))
    g = groups[order]
    last = np.r_[g[1:] != g[:-1], True]
    chosen[g[last]] = order[last]
    return chosen


def _sample_association(cfg, antennas, scenario, w, rng, options):
    """Dense users, one uplink user per cell, geometric orientations."""
    lam = cfg.lam
    bx, by = _ppp(rng, lam, w)
    ux, uy = _ppp(rng, lam * options.user_density_factor, w)
    downlink = scenario.link == "downlink"
    if downlink:
        ux, uy = np.r_[ux, 0.0], np.r_[uy, 0.0]
    else:
        bx, by = np.r_[bx, 0.0], np.r_[by, 0.0]
    n_b, n_u = bx.shape[0], ux.shape[0]
    if n_b == 0:
        return NetworkRealization(scenario, w, math.inf, 0.0, 0.0, PointField.empty(), PointField.empty())
    _, cell = cKDTree(np.c_[bx, by]).query(np.c_[ux, uy])
    cell = np.asarray(cell, dtype=np.int64)
    typical_user = n_u - 1 if downlink else -1
    typical_bs = int(cell[typical_user]) if downlink else n_b - 1
    two_node = scenario.architecture == "two-node"

    up_keys = rng.random(n_u)
    if downlink and two_node:
        up_keys[typical_user] = 2.0
    elif downlink:
        up_keys[typical_user] = -1.0
    uplink = _pick_one_per_group(cell, n_b, up_keys)
    if two_node:
        down = uplink.copy()
    else:
        down_keys = rng.random(n_u)
        down_keys[uplink[uplink >= 0]] = -1.0
        if downlink:
            down_keys[typical_user] = 2.0
        down = _pick_one_per_group(cell, n_b, down_keys)
    if downlink and uplink[typical_bs] == typical_user and not two_node:
        uplink[typical_bs] = -1

    bs_orient = rng.uniform(0.0, 2.0 * math.pi, n_b)
    has_down = down >= 0
    bs_orient[has_down] = np.arctan2(uy[down[has_down]] - by[has_down], ux[down[has_down]] - bx[has_down])
    active = uplink[uplink >= 0]
    owner = np.flatnonzero(uplink >= 0)
    u_orient = np.arctan2(by[owner] - uy[active], bx[owner] - ux[active])

    if downlink:
        r = math.hypot(bx[typical_bs], by[typical_bs])
        bearing = math.atan2(by[typical_bs], bx[typical_bs])
        keep_b = np.arange(n_b) != typical_bs
        keep_u = active != typical_user
    else:
        served = uplink[typical_bs]
        if served < 0:
            return NetworkRealization(scenario, w, math.inf, 0.0, 0.0, PointField.empty(), PointField.empty())
        r = math.hypot(ux[served], uy[served])
        bearing = math.atan2(uy[served], ux[served])
        keep_b = np.arange(n_b) != typical_bs
        keep_u = owner != typical_bs
    bs = PointField(bx[keep_b], by[keep_b], bs_orient[keep_b], rng.exponential(1.0, int(keep_b.sum())))
    users = PointField(ux[active][keep_u], uy[active][keep_u], u_orient[keep_u],
                       rng.exponential(1.0, int(keep_u.sum())))
    signal_fade = rng.exponential(1.0)
    li_fade = rng.exponential(1.0)
    theta = _draw_theta(rng, scenario, antennas)
    return NetworkRealization(scenario, w, r, bearing, signal_fade, bs, users, li_fade, theta,
                              far_field=options.far_field, extra={"association": True})


# ---------------------------------------------------------------------------
# SINR
# ---------------------------------------------------------------------------


def _field_power(fld, boresight, rx, tx, antennas, alpha, power):
    if len(fld) == 0:
        return 0.0
    if fld.gain is not None:
        return kernels.interference(fld.x, fld.y, fld.orient, fld.fade * fld.gain, boresight,
                                    1.0, 1.0, 1.0, 1.0, 1.0, 1.0, alpha, power)
    g_rx, h_rx = (antennas.g_b, antennas.h_b) if rx == "b" else (antennas.g_u, antennas.h_u)
    g_tx, h_tx = (antennas.g_b, antennas.h_b) if tx == "b" else (antennas.g_u, antennas.h_u)
    return kernels.interference(fld.x, fld.y, fld.orient, fld.fade, boresight,
                                antennas.sectors(rx), antennas.sectors(tx), g_rx, h_rx, g_tx, h_tx,
                                alpha, power)


def far_field_mean(cfg, antennas, rx, tx, window_radius, alpha, power, activity=1.0):
    """Mean interference from a thinned PPP outside the window."""
    table = antennas.table(rx, tx, cfg.lam)
    return (power * table.mean_gain() * activity * cfg.lam * 2.0 * math.pi
            * window_radius ** (2.0 - alpha) / (alpha - 2.0))


def loopback_gain(scenario, cfg, antennas, theta=0.0):
    """Mean residual loopback power at the typical receiver (0 for 3D)."""
    scenario = Scenario.parse(scenario)
    if scenario is Scenario.D3:
        return 0.0
    if scenario is Scenario.D2:
        return cfg.p_u * antennas.g_u ** 2 * cfg.sigma_l2
    base = cfg.bs_loopback_power * cfg.sigma_l2
    if scenario is Scenario.U2 or (theta == 0.0 and not math.isinf(antennas.m_b)):
        return base * antennas.g_b ** 2
    return base * antennas.g_b * antennas.h_b * antennas.suppression(theta)


def sinr_sample(realization, cfg, antennas):
    """SINR at the typical receiver; ``inf`` when nothing degrades it."""
    real = realization
    sc = real.scenario
    if not math.isfinite(real.r):
        return 0.0
    a1, a2 = cfg.alpha1, cfg.alpha2
    if sc.link == "downlink":
        power = cfg.p_b
        rx, fields = "u", ((real.bs, "b", a1, cfg.p_b, 1.0), (real.users, "u", a2, cfg.p_u, real.user_activity))
    else:
        power = cfg.p_u
        rx, fields = "b", ((real.bs, "b", a2, cfg.p_b, 1.0), (real.users, "u", a1, cfg.p_u, real.user_activity))
    signal = power * antennas.g_b * antennas.g_u * real.signal_fade * real.r ** (-a1)
    total = cfg.sigma_n2 + loopback_gain(sc, cfg, antennas, real.li_theta) * real.li_fade
    for fld, tx, alpha, p_tx, act in fields:
        total += _field_power(fld, real.serving_bearing, rx, tx, antennas, alpha, p_tx)
        if real.far_field:
            total += far_field_mean(cfg, antennas, rx, tx, real.window_radius, alpha, p_tx, act)
    if total == 0.0:
        return math.inf
    return signal / total


def interferer_cases(fld, boresight, m_rx, m_tx):
    """Orientation case (1-4) of each interferer, using the geometric tests
    of the interference kernel."""
    two_pi = 2.0 * math.pi
    bearing = np.arctan2(fld.y, fld.x)
    if m_rx <= 1:
        in_main = np.ones(len(fld), dtype=bool)
    else:
        in_main = np.abs(np.mod(bearing - boresight + math.pi, two_pi) - math.pi) < math.pi / m_rx
    if m_tx <= 1:
        toward = np.ones(len(fld), dtype=bool)
    else:
        toward = np.abs(np.mod(fld.orient - bearing, two_pi) - math.pi) < math.pi / m_tx
    return np.where(in_main, np.where(toward, 1, 2), np.where(toward, 3, 4))


def outage_indicator(sinr, tau):
    """1 when the link cannot carry rate log2(1 + tau)."""
    return np.asarray(sinr) < tau


def outage_from_samples(samples, rate):
    """Outage estimate and its standard error from SINR samples."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    tau = 2.0 ** rate - 1.0
    p = float(np.count_nonzero(outage_indicator(samples, tau))) / n
    return OutageEstimate(p, "monte-carlo", std_error=math.sqrt(p * (1.0 - p) / n), n_realizations=n)


# ---------------------------------------------------------------------------
# Parallel driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkJob:
    scenario: Scenario
    cfg: NetworkConfig
    antennas: AntennaSystem
    options: SimulationOptions

    def draw(self, rng):
        w = self.options.window(self.cfg.lam)
        real = sample_realization(self.cfg, self.antennas, self.scenario, w, rng, self.options)
        return sinr_sample(real, self.cfg, self.antennas)


def _chunk(job, seed, start, stop):
    policy = SeedPolicy(seed)
    return np.array([job.draw(policy.generator(i)) for i in range(start, stop)], dtype=float)


def run_job(job, n_realizations, seed=0, workers=1, chunk_size=500):
    """SINR samples of ``job`` for realisation indices 0..n-1, in order."""
    if n_realizations < 1:
        raise ConfigError("n_realizations must be >= 1")
    SeedPolicy(seed)
    starts = list(range(0, n_realizations, chunk_size))
    stops = [min(s + chunk_size, n_realizations) for s in starts]
    if workers <= 1 or len(starts) == 1:
        parts = [_chunk(job, seed, a, b) for a, b in zip(starts, stops)]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            parts = list(pool.map(_chunk, repeat(job), repeat(seed), starts, stops))
    return np.concatenate(parts)


def sinr_samples(scenario, cfg, antennas, n_realizations, seed=0, options=None):
    options = options or SimulationOptions()
    options.window(cfg.lam)
    job = NetworkJob(Scenario.parse(scenario), cfg, antennas, options)
    return run_job(job, n_realizations, seed, options.workers, options.chunk_size)


def _check_count(n):
    if n < 100:
        raise ConfigError(f"n_realizations must be >= 100, got {n}")


def estimate_outage_mc(scenario, cfg, antennas, n_realizations=10_000, seed=0, options=None):
    """Fraction of realisations whose SINR falls below 2^R - 1."""
    _check_count(n_realizations)
    samples = sinr_samples(scenario, cfg, antennas, n_realizations, seed, options)
    return outage_from_samples(samples, cfg.rate)


def outage_curve_mc(scenario, cfg, antennas, rates, n_realizations=10_000, seed=0, options=None):
    """Outage estimates for several target rates from one set of samples."""
    _check_count(n_realizations)
    samples = sinr_samples(scenario, cfg, antennas, n_realizations, seed, options)
    return [outage_from_samples(samples, rate) for rate in rates]


# ---------------------------------------------------------------------------
# Composite networks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompositeJob:
    """Typical cell is two-node with probability ``p_2n``; other cells'
    uplink users transmit with probability ``p_u*p_2n + p_3n``."""

    direction: str
    cfg: NetworkConfig
    antennas: AntennaSystem
    p_2n: float
    p_u: float
    options: SimulationOptions

    def draw(self, rng):
        two_node = rng.random() < self.p_2n
        if self.direction == "downlink":
            scenario = Scenario.D2 if two_node else Scenario.D3
        else:
            scenario = Scenario.U2 if two_node else Scenario.U3
        w = self.options.window(self.cfg.lam)
        real = sample_realization(self.cfg, self.antennas, scenario, w, rng, self.options)
        return sinr_sample(real, self.cfg, self.antennas)


def estimate_composite_mc(direction, cfg, gamma, p_2n, p_u, n_realizations=10_000, seed=0,
                          options=None, m=math.inf):
    """Outage of the typical receiver in a composite network.

    Defaults to pencil-beam antennas and the guard geometry, the regime of
    the composite closed forms; finite ``m`` is accepted.
    """
    if direction not in ("downlink", "uplink"):
        raise ConfigError(f"direction must be 'downlink' or 'uplink', got {direction!r}")
    if not (0.0 <= p_2n <= 1.0 and 0.0 <= p_u <= 1.0):
        raise ConfigError("p_2n and p_u must lie in [0, 1]")
    _check_count(n_realizations)
    q = p_u * p_2n + (1.0 - p_2n)
    options = (options or SimulationOptions(geometry="guard")).with_(user_activity=q)
    options.window(cfg.lam)
    job = CompositeJob(direction, cfg, AntennaSystem.symmetric(m, gamma), p_2n, p_u, options)
    samples = run_job(job, n_realizations, seed, options.workers, options.chunk_size)
    return outage_from_samples(samples, cfg.rate)


# ---------------------------------------------------------------------------
# 3GPP pico-cell model
# ---------------------------------------------------------------------------


def los_probability(d_km):
    """Probability that a link of length ``d_km`` kilometres is line of sight."""
    d = np.asarray(d_km, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        p = 0.5 - np.minimum(0.5, 5.0 * np.exp(-0.156 / d)) + np.minimum(0.5, 5.0 * np.exp(-d / 0.03))
    p = np.clip(p, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class ThreeGppParams:
    """Outdoor pico-cell channel.

    Path gains are ``10**(intercept/10) * d**-exponent`` with ``d`` in km;
    BS-BS line-of-sight links switch from exponent 2 to 4 at
    ``breakpoint_km``.  Powers are in mW, noise = thermal floor +
    bandwidth + noise figure.
    """

    lam: float = 0.1
    p_b_dbm: float = 24.0
    p_u_dbm: float = 23.0
    noise_figure_db: float = 5.0
    thermal_dbm_per_hz: float = -174.0
    bandwidth_hz: float = 10e6
    sigma_l2_db: float = -30.0
    bb_los: tuple = (-98.4, 2.0)
    bb_los_far: tuple = (-101.9, 4.0)
    bb_nlos: tuple = (-169.4, 4.0)
    bu_los: tuple = (-103.8, 2.09)
    bu_nlos: tuple = (-145.4, 3.75)
    breakpoint_km: float = 2.0 / 3.0
    shadow_bb_db: float = 6.0
    shadow_los_db: float = 3.0
    shadow_nlos_db: float = 4.0
    force_los: bool = False
    p_b: float = field(init=False)
    p_u: float = field(init=False)
    noise: float = field(init=False)
    sigma_l2: float = field(init=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("lam must be > 0")
        if min(self.shadow_bb_db, self.shadow_los_db, self.shadow_nlos_db) < 0:
            raise ConfigError("shadowing deviations must be >= 0")
        noise_dbm = self.thermal_dbm_per_hz + 10.0 * math.log10(self.bandwidth_hz) + self.noise_figure_db
        object.__setattr__(self, "p_b", db_to_linear(self.p_b_dbm))
        object.__setattr__(self, "p_u", db_to_linear(self.p_u_dbm))
        object.__setattr__(self, "noise", db_to_linear(noise_dbm))
        object.__setattr__(self, "sigma_l2", db_to_linear(self.sigma_l2_db))

    def network_config(self, rate):
        # alpha values only shape the window; 3GPP links carry their own gains
        return NetworkConfig(lam=self.lam, p_b=self.p_b, p_u=self.p_u, sigma_n2=self.noise,
                             sigma_l2=self.sigma_l2, rate=rate)

    def path_gain(self, link, d, los):
        """Deterministic path gain of ``link`` in {"bb", "bu"}."""
        d = np.asarray(d, dtype=float)
        if link == "bb":
            near = _law(self.bb_los, d)
            far = _law(self.bb_los_far, d)
            return np.where(los, np.where(d < self.breakpoint_km, near, far), _law(self.bb_nlos, d))
        return np.where(los, _law(self.bu_los, d), _law(self.bu_nlos, d))

    def shadow_db(self, link, los):
        if link == "bb":
            return np.full(np.shape(los), self.shadow_bb_db)
        return np.where(los, self.shadow_los_db, self.shadow_nlos_db)


def _law(law, d):
    intercept_db, exponent = law
    return 10.0 ** (intercept_db / 10.0) * d ** (-exponent)


def _link_gains(rng, params, link, d):
    los = np.ones(d.shape, dtype=bool) if params.force_los else rng.random(d.shape) < los_probability(d)
    gain = params.path_gain(link, d, los)
    shadow = rng.standard_normal(d.shape) * params.shadow_db(link, los)
    return gain * 10.0 ** (shadow / 10.0)


@dataclass(frozen=True)
class ThreeGppJob:
    scenario: Scenario
    params: ThreeGppParams
    antennas: AntennaSystem
    rate: float
    options: SimulationOptions

    def draw(self, rng):
        p = self.params
        cfg = p.network_config(self.rate)
        w = self.options.window(p.lam)
        real = sample_realization(cfg, self.antennas, self.scenario, w, rng, self.options)
        if not math.isfinite(real.r):
            return 0.0
        sc = self.scenario
        ant = self.antennas
        if sc.link == "downlink":
            rx, links = "u", ((real.bs, "b", "bu", p.p_b), (real.users, "u", "bu", p.p_u))
            power = p.p_b
        else:
            rx, links = "b", ((real.bs, "b", "bb", p.p_b), (real.users, "u", "bu", p.p_u))
            power = p.p_u
        serving = float(_link_gains(rng, p, "bu", np.array([real.r]))[0])
        signal = power * ant.g_b * ant.g_u * real.signal_fade * serving
        total = p.noise + loopback_gain(sc, cfg, ant, real.li_theta) * real.li_fade
        for fld, tx, link, p_tx in links:
            d = np.hypot(fld.x, fld.y)
            gains = _link_gains(rng, p, link, d)
            moved = PointField(fld.x, fld.y, fld.orient, fld.fade * gains, fld.gain)
            total += _field_power(moved, real.serving_bearing, rx, tx, ant, 0.0, p_tx)
        return signal / total


def estimate_outage_3gpp(scenario, params, antennas, rate, n_realizations=10_000, seed=0, options=None):
    """Outage under the 3GPP pico-cell channel (LOS draws, dual-slope path
    loss, lognormal shadowing, noise) on top of Rayleigh fading."""
    _check_count(n_realizations)
    options = (options or SimulationOptions()).with_(far_field=False)
    options.window(params.lam)
    job = ThreeGppJob(Scenario.parse(scenario), params, antennas, rate, options)
    samples = run_job(job, n_realizations, seed, options.workers, options.chunk_size)
    return outage_from_samples(samples, rate)


def sinr_samples_3gpp(scenario, params, antennas, n_realizations, seed=0, options=None):
    options = (options or SimulationOptions()).with_(far_field=False)
    options.window(params.lam)
    job = ThreeGppJob(Scenario.parse(scenario), params, antennas, 1.0, options)
    return run_job(job, n_realizations, seed, options.workers, options.chunk_size)


# ---------------------------------------------------------------------------
# Debug dumps
# ---------------------------------------------------------------------------


def write_realization_csv(realization, path):
    """Write the points of a realisation as ``kind,x,y,orient,fade`` rows."""
    real = realization
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["kind", "x", "y", "orient", "fade"])
        if math.isfinite(real.r):
            out.writerow(["serving", repr(real.r * math.cos(real.serving_bearing)),
                          repr(real.r * math.sin(real.serving_bearing)), repr(real.serving_bearing),
                          repr(real.signal_fade)])
        for kind, fld in (("bs", real.bs), ("user", real.users)):
            for row in zip(fld.x, fld.y, fld.orient, fld.fade):
                out.writerow([kind, *map(repr, map(float, row))])
