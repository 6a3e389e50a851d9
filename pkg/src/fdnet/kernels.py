"""Hot numeric kernels with interchangeable numba / numpy implementations.

Two kernels dominate run time:

* ``hyp_f``: F(x, y) = 2F1(1, 1 - 2/x; 2 - 2/x; -y), evaluated millions of
  times inside nested quadrature.
* ``interference``: the aggregate received power at a receiver sitting at
  the origin from a field of sectorised transmitters, evaluated once per
  field per Monte Carlo realisation.

The ``*_jit`` functions are scalar loops compiled with numba; the
``*_numpy`` functions are vectorised equivalents.  ``hyp_f`` and
``interference`` dispatch to one of them according to ``_accel.USE_NUMBA``.
"""

import math

import numpy as np

from . import _accel

_EPS = 1e-17
_MAX_TERMS = 400
_DIRECT_MAX = 0.5
_PFAFF_MAX = 2.0


# ---------------------------------------------------------------------------
# F(x, y)
# ---------------------------------------------------------------------------
#
# With b = 1 - 2/x the Gauss series collapses to sum_n b/(b+n) (-y)^n.
#   y < 0.5        direct series
#   0.5 <= y < 2   Pfaff: F = 2F1(1, 1; b+1; y/(1+y)) / (1+y)
#   y >= 2         inversion: F = b*pi*csc(2pi/x)*y^-b - b*sum_k (-y)^-k / (y (k+1-b))


def _hyp_f_scalar(x, y):
    b = 1.0 - 2.0 / x
    if y == 0.0:
        return 1.0
    if y < _DIRECT_MAX:
        total = 1.0
        power = 1.0
        for n in range(1, _MAX_TERMS):
            power *= -y
            term = b / (b + n) * power
            total += term
            if abs(term) < _EPS * abs(total):
                break
        return total
    if y < _PFAFF_MAX:
        w = y / (1.0 + y)
        total = 1.0
        term = 1.0
        for n in range(_MAX_TERMS):
            term *= (n + 1.0) / (b + 1.0 + n) * w
            total += term
            if term < _EPS * total:
                break
        return total / (1.0 + y)
    lead = b * math.pi / math.sin(2.0 * math.pi / x) * y ** (-b)
    tail = 0.0
    power = 1.0 / y
    for k in range(_MAX_TERMS):
        term = power / (k + 1.0 - b)
        tail += term
        if abs(term) < _EPS * abs(tail):
            break
        power *= -1.0 / y
    return lead - b * tail


_hyp_f_scalar_jit = _accel.njit(_hyp_f_scalar)


@_accel.njit
def hyp_f_jit(x, y):
    out = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        out[i] = _hyp_f_scalar_jit(x, y[i])
    return out


def hyp_f_numpy(x, y):
    y = np.asarray(y, dtype=float)
    b = 1.0 - 2.0 / x
    out = np.ones_like(y)

    direct = (y > 0.0) & (y < _DIRECT_MAX)
    if direct.any():
        z = -y[direct]
        total = np.ones_like(z)
        power = np.ones_like(z)
        for n in range(1, _MAX_TERMS):
            power = power * z
            term = b / (b + n) * power
            total += term
            if np.all(np.abs(term) < _EPS * np.abs(total)):
                break
        out[direct] = total

    pfaff = (y >= _DIRECT_MAX) & (y < _PFAFF_MAX)
    if pfaff.any():
        yy = y[pfaff]
        w = yy / (1.0 + yy)
        total = np.ones_like(w)
        term = np.ones_like(w)
        for n in range(_MAX_TERMS):
            term = term * ((n + 1.0) / (b + 1.0 + n)) * w
            total += term
            if np.all(term < _EPS * total):
                break
        out[pfaff] = total / (1.0 + yy)

    large = y >= _PFAFF_MAX
    if large.any():
        yy = y[large]
        lead = b * math.pi / math.sin(2.0 * math.pi / x) * yy ** (-b)
        tail = np.zeros_like(yy)
        power = 1.0 / yy
        for k in range(_MAX_TERMS):
            term = power / (k + 1.0 - b)
            tail += term
            if np.all(np.abs(term) < _EPS * np.abs(tail)):
                break
            power = power * (-1.0 / yy)
        out[large] = lead - b * tail
    return out


def hyp_f(x, y):
    """Vectorised F(x, y) for a scalar exponent ``x`` and array ``y``."""
    y = np.asarray(y, dtype=float)
    flat = np.ascontiguousarray(y.reshape(-1))
    if _accel.USE_NUMBA:
        res = hyp_f_jit(float(x), flat)
    else:
        res = hyp_f_numpy(float(x), flat)
    return res.reshape(y.shape)


# ---------------------------------------------------------------------------
# Aggregate interference at the origin
# ---------------------------------------------------------------------------


@_accel.njit
def interference_jit(px, py, orient, fade, boresight, m_rx, m_tx,
                     g_rx, h_rx, g_tx, h_tx, alpha, power):
    half_rx = math.pi / m_rx
    half_tx = math.pi / m_tx
    two_pi = 2.0 * math.pi
    total = 0.0
    for j in range(px.shape[0]):
        x = px[j]
        y = py[j]
        d2 = x * x + y * y
        bearing = math.atan2(y, x)
        if m_rx <= 1.0:
            grx = g_rx
        else:
            delta = (bearing - boresight + math.pi) % two_pi - math.pi
            grx = g_rx if abs(delta) < half_rx else h_rx
        if m_tx <= 1.0:
            gtx = g_tx
        else:
            # direction from the transmitter back to the origin is bearing + pi
            delta = (orient[j] - bearing) % two_pi - math.pi
            gtx = g_tx if abs(delta) < half_tx else h_tx
        total += power * grx * gtx * fade[j] * d2 ** (-0.5 * alpha)
    return total


def interference_numpy(px, py, orient, fade, boresight, m_rx, m_tx,
                       g_rx, h_rx, g_tx, h_tx, alpha, power):
    if px.shape[0] == 0:
        return 0.0
    two_pi = 2.0 * math.pi
    d2 = px * px + py * py
    bearing = np.arctan2(py, px)
    if m_rx <= 1.0:
        grx = np.full(px.shape, g_rx)
    else:
        delta = np.mod(bearing - boresight + math.pi, two_pi) - math.pi
        grx = np.where(np.abs(delta) < math.pi / m_rx, g_rx, h_rx)
    if m_tx <= 1.0:
        gtx = np.full(px.shape, g_tx)
    else:
        delta = np.mod(orient - bearing, two_pi) - math.pi
        gtx = np.where(np.abs(delta) < math.pi / m_tx, g_tx, h_tx)
    return float(np.sum(power * grx * gtx * fade * d2 ** (-0.5 * alpha)))


def interference(px, py, orient, fade, boresight, m_rx, m_tx,
                 g_rx, h_rx, g_tx, h_tx, alpha, power):
    """Received power at the origin from transmitters at ``(px, py)``.

    ``orient`` is each transmitter's main-lobe direction, ``fade`` its
    per-link power gain (fading, shadowing, anything multiplicative) and
    ``boresight`` the receiver's main-lobe direction.  Sector counts may be
    ``inf`` (pencil beams: every interferer falls in the side lobes).
    Passing ``alpha=0`` turns the path loss off so that ``fade`` can carry a
    precomputed link gain.
    """
    args = (float(boresight), float(m_rx), float(m_tx), float(g_rx), float(h_rx),
            float(g_tx), float(h_tx), float(alpha), float(power))
    if _accel.USE_NUMBA:
        return interference_jit(px, py, orient, fade, *args)
    return interference_numpy(px, py, orient, fade, *args)
