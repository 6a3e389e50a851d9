"""Physical-layer model: network parameters, sectorised antennas and the
passive loopback-suppression profile."""

import math
from dataclasses import dataclass, field, replace

import numpy as np


class ConfigError(ValueError):
    """Invalid physical or experiment configuration."""


def db_to_linear(value_db):
    """dB to linear power ratio; ``-inf`` maps to exactly 0."""
    if value_db == -math.inf:
        return 0.0
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value):
    if value == 0:
        return -math.inf
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class NetworkConfig:
    """Physical parameters of the network.

    Parameters
    ----------
    lam : float
        BS density (points per unit area).  Users on a given channel form
        a process of the same density.
    alpha1 : float
        Path-loss exponent of BS-user links.
    alpha2 : float
        Path-loss exponent of user-user and BS-BS links.
    p_b, p_u : float
        BS and user transmit power (linear).
    sigma_n2 : float
        Noise variance (linear).
    sigma_l2 : float
        Residual loopback-interference variance after active cancellation.
    rate : float
        Target rate in bits per channel use; 0 means every link succeeds.
    bs_li_power : {"p_b", "p_u"}
        Which transmit power drives the loopback at a BS.  The BS's own
        power is the physical choice; ``"p_u"`` reproduces the other
        reading of the uplink loopback expression.
    """

    lam: float = 1e-2
    alpha1: float = 4.0
    alpha2: float = 4.0
    p_b: float = 1.0
    p_u: float = 1.0
    sigma_n2: float = 0.0
    sigma_l2: float = 0.0
    rate: float = 1.0
    bs_li_power: str = "p_b"

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"lam must be > 0, got {self.lam}")
        for name in ("alpha1", "alpha2"):
            if not getattr(self, name) > 2:
                raise ConfigError(f"{name} must be > 2, got {getattr(self, name)}")
        if not (self.p_b > 0 and self.p_u > 0):
            raise ConfigError("transmit powers must be > 0")
        if self.sigma_n2 < 0 or self.sigma_l2 < 0:
            raise ConfigError("variances must be >= 0")
        if not self.rate >= 0:
            raise ConfigError(f"rate must be >= 0, got {self.rate}")
        if self.bs_li_power not in ("p_b", "p_u"):
            raise ConfigError("bs_li_power must be 'p_b' or 'p_u'")

    @property
    def tau(self):
        """SINR threshold 2^R - 1."""
        return 2.0 ** self.rate - 1.0

    @property
    def bs_loopback_power(self):
        return self.p_b if self.bs_li_power == "p_b" else self.p_u

    def with_(self, **changes):
        return replace(self, **changes)

    @classmethod
    def from_db(cls, sigma_l2_db=-math.inf, sigma_n2_db=-math.inf, **kwargs):
        return cls(sigma_l2=db_to_linear(sigma_l2_db), sigma_n2=db_to_linear(sigma_n2_db), **kwargs)


def antenna_gains(m, gamma):
    """Main- and side-lobe gain of an ``m``-sector antenna.

    ``m`` may be ``math.inf`` for the pencil-beam limit, where the main
    gain tends to 1/gamma and the side gain to 1.
    """
    if not (m >= 1):
        raise ConfigError(f"sector count must be >= 1, got {m}")
    if not (0.0 <= gamma <= 1.0):
        raise ConfigError(f"side-lobe ratio must lie in [0, 1], got {gamma}")
    if math.isinf(m):
        if gamma == 0:
            raise ConfigError("the M -> inf limit needs a positive side-lobe ratio")
        return 1.0 / gamma, 1.0
    if m != int(m):
        raise ConfigError(f"sector count must be an integer, got {m}")
    main = m / (1.0 + gamma * (m - 1))
    return main, gamma * main


@dataclass(frozen=True)
class ThinningTable:
    """Densities and power gains of the four orientation cases for an
    ordered (receiver, transmitter) pair.

    Case 1: transmitter points at the receiver, which sees it in its main
    sector.  Case 2: points away, inside the main sector.  Case 3: points
    at the receiver, outside the main sector.  Case 4: neither.
    """

    densities: tuple
    gains: tuple

    def __iter__(self):
        for k, (d, g) in enumerate(zip(self.densities, self.gains), start=1):
            yield k, d, g

    @property
    def total_density(self):
        return math.fsum(self.densities)

    def mean_gain(self):
        """Density-weighted average power gain of an interferer."""
        return math.fsum(d * g for d, g in zip(self.densities, self.gains)) / self.total_density


def _link_side_gain(m, gamma):
    main, side = antenna_gains(m, gamma)
    # an omni antenna has no side lobe: every link sees gain 1
    return (main, main) if m == 1 else (main, side)


def thinning_table(m_i, gamma_i, m_j, gamma_j, lam):
    """Table of case densities/gains for receiver ``i`` and transmitter ``j``."""
    if not lam > 0:
        raise ConfigError(f"lam must be > 0, got {lam}")
    g_i, h_i = _link_side_gain(m_i, gamma_i)
    g_j, h_j = _link_side_gain(m_j, gamma_j)
    gains = (g_i * g_j, g_i * h_j, g_j * h_i, h_i * h_j)
    if math.isinf(m_i) or math.isinf(m_j):
        p_i = 0.0 if math.isinf(m_i) else 1.0 / m_i
        p_j = 0.0 if math.isinf(m_j) else 1.0 / m_j
        densities = (
            lam * p_i * p_j,
            lam * p_i * (1.0 - p_j),
            lam * (1.0 - p_i) * p_j,
            lam * (1.0 - p_i) * (1.0 - p_j),
        )
    else:
        mm = m_i * m_j
        densities = (
            lam / mm,
            lam * (m_j - 1) / mm,
            lam * (m_i - 1) / mm,
            lam * (m_i - 1) * (m_j - 1) / mm,
        )
    return ThinningTable(densities=densities, gains=gains)


@dataclass(frozen=True)
class AntennaSystem:
    """Sectorised antennas at BSs (``b``) and users (``u``)."""

    m_b: float = 1
    m_u: float = 1
    gamma_b: float = 0.2
    gamma_u: float = 0.2
    theta_max: float = 2.0 * math.pi / 3.0
    clamp_suppression: bool = True
    _gains: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0.0 < self.theta_max <= math.pi):
            raise ConfigError(f"theta_max must lie in (0, pi], got {self.theta_max}")
        gb = antenna_gains(self.m_b, self.gamma_b)
        gu = antenna_gains(self.m_u, self.gamma_u)
        object.__setattr__(self, "_gains", gb + gu)

    @classmethod
    def symmetric(cls, m, gamma=0.2, **kwargs):
        return cls(m_b=m, m_u=m, gamma_b=gamma, gamma_u=gamma, **kwargs)

    @property
    def g_b(self):
        return self._gains[0]

    @property
    def h_b(self):
        return self._gains[1]

    @property
    def g_u(self):
        return self._gains[2]

    @property
    def h_u(self):
        return self._gains[3]

    def sectors(self, node):
        return self.m_b if node == "b" else self.m_u

    def gamma(self, node):
        return self.gamma_b if node == "b" else self.gamma_u

    def table(self, rx, tx, lam):
        """Thinning table for receiver type ``rx`` and transmitter type ``tx``."""
        return thinning_table(self.sectors(rx), self.gamma(rx), self.sectors(tx), self.gamma(tx), lam)

    def suppression(self, theta):
        return passive_suppression(theta, self.theta_max, clamp=self.clamp_suppression)

    def sector_offsets(self):
        return sector_offsets(self.m_b)


def passive_suppression(theta, theta_max, clamp=True):
    """Fraction of loopback power left after passive suppression when the
    transmit and receive sectors of a BS are ``theta`` radians apart.

    1 means no suppression; the deepest point sits at ``|theta| =
    theta_max``.  With ``clamp=False`` the raw exponential is returned,
    which exceeds 1 once ``|theta| > 2*theta_max``.
    """
    if not (0.0 < theta_max <= math.pi):
        raise ConfigError(f"theta_max must lie in (0, pi], got {theta_max}")
    theta = np.asarray(theta, dtype=float)
    raw = np.exp(math.cos(theta_max) - np.cos(np.abs(theta) - theta_max))
    out = np.minimum(1.0, raw) if clamp else raw
    return float(out) if out.ndim == 0 else out


def sector_offsets(m):
    """Angles between sector boresights: multiples of 2*pi/m in [-pi, pi)."""
    m = int(m)
    k = np.arange(m)
    theta = 2.0 * math.pi * k / m
    return np.where(theta >= math.pi, theta - 2.0 * math.pi, theta)
