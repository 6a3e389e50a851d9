"""Special functions and adaptive quadrature used by the analytic engine."""

import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels


class DomainError(ValueError):
    pass


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""

    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


def hyp_F(x, y):
    """F(x, y) = 2F1(1, 1 - 2/x; 2 - 2/x; -y) for x > 2, y >= 0.

    Accepts a scalar or array ``y``; returns the same shape.  F(x, 0) = 1
    and F decreases monotonically towards 0 as y grows.
    """
    if not x > 2:
        raise DomainError(f"F(x, y) needs x > 2, got x={x}")
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("F(x, y) needs y >= 0")
    out = kernels.hyp_f(x, arr)
    return float(out) if out.ndim == 0 else out


def csc2pi_over(alpha):
    """1 / sin(2*pi/alpha) for alpha > 2."""
    if not alpha > 2:
        raise DomainError(f"csc(2pi/alpha) needs alpha > 2, got {alpha}")
    return 1.0 / math.sin(2.0 * math.pi / alpha)


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod (7/15) quadrature
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

# 15 abscissae on [-1, 1] and matching weights; Gauss nodes are every other one
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GW = np.zeros(15)
_GW[1::2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[:-1][::-1]])

_EPMACH = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance contract for :func:`quad`.

    The semi-infinite map sends t in [0, 1) to ``a + scale * t / (1 - t)``;
    ``scale`` should be the length over which the integrand lives.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    transform: str = "rational"

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.transform != "rational":
            raise DomainError(f"unknown semi-infinite transform {self.transform!r}")

    def tightened(self, factor=10.0):
        """Tolerance budget for an integral nested inside this one."""
        return QuadratureSpec(self.rel_tol / factor, self.abs_tol / factor,
                              self.max_subdivisions, self.transform)


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float
    error: float
    n_eval: int


def _panel_rule(values, half):
    """Kronrod value and QUADPACK-style error for panels stacked row-wise."""
    resk = values @ _KW
    resg = values @ _GW
    mean = 0.5 * resk
    resabs = np.abs(values) @ _KW
    resasc = np.abs(values - mean[:, None]) @ _KW
    err = np.abs((resk - resg) * half)
    resasc = resasc * half
    resabs = resabs * half
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.maximum(err, 50.0 * _EPMACH * resabs)
    return resk * half, err


def quad(f, a, b=math.inf, spec=None, scale=1.0, points=None):
    """Adaptive 7/15-point Gauss-Kronrod integral of ``f`` over [a, b].

    ``f`` must accept a 1-D array of abscissae and return an array of the
    same shape.  ``b`` may be ``inf``.  ``points`` lists interior
    breakpoints (finite intervals only).  Raises :class:`QuadratureError`
    when the tolerance cannot be met in ``spec.max_subdivisions`` bisections.
    """
    spec = spec or DEFAULT_SPEC
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    if math.isinf(b):
        if not scale > 0:
            raise DomainError("scale must be > 0")

        def g(t):
            x = a + scale * t / (1.0 - t)
            return f(x) * (scale / (1.0 - t) ** 2)

        lo, hi = 0.0, 1.0
        edges = np.linspace(lo, hi, 5)
    else:
        g = f
        lo, hi = float(a), float(b)
        inner = sorted(p for p in (points or ()) if lo < p < hi)
        edges = np.array([lo, *inner, hi])
    min_width = 1e-13 * (hi - lo)

    n_eval = 0

    def evaluate(lefts, rights):
        nonlocal n_eval
        centre = 0.5 * (lefts + rights)
        half = 0.5 * (rights - lefts)
        x = centre[:, None] + half[:, None] * _NODES[None, :]
        vals = np.asarray(g(x.reshape(-1)), dtype=float).reshape(x.shape)
        n_eval += vals.size
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("integrand returned a non-finite value", math.nan, math.inf)
        return _panel_rule(vals, half)

    lefts, rights = edges[:-1], edges[1:]
    vals, errs = evaluate(lefts, rights)
    # heap of (-error, tiebreak, left, right, value, error)
    heap = [(-e, i, l, r, v, e) for i, (l, r, v, e) in enumerate(zip(lefts, rights, vals, errs))]
    heapq.heapify(heap)
    counter = len(heap)
    frozen_val, frozen_err = [], []

    def totals():
        value = math.fsum([item[4] for item in heap] + frozen_val)
        error = math.fsum([item[5] for item in heap] + frozen_err)
        return value, error

    value, error = totals()
    subdivisions = 0
    while error > max(spec.rel_tol * abs(value), spec.abs_tol):
        if not heap:
            break
        if subdivisions >= spec.max_subdivisions:
            raise QuadratureError("quadrature did not converge", value, error)
        _, _, l, r, _, _ = heapq.heappop(heap)
        mid = 0.5 * (l + r)
        v2, e2 = evaluate(np.array([l, mid]), np.array([mid, r]))
        for (pl, pr), pv, pe in zip(((l, mid), (mid, r)), v2, e2):
            if pr - pl < min_width:
                frozen_val.append(pv)
                frozen_err.append(pe)
            else:
                heapq.heappush(heap, (-pe, counter, pl, pr, pv, pe))
                counter += 1
        subdivisions += 1
        value, error = totals()
    if error > max(spec.rel_tol * abs(value), spec.abs_tol):
        raise QuadratureError("quadrature hit the resolution floor", value, error)
    return QuadResult(value, error, n_eval)


def integrate(f, a, b=math.inf, spec=None, scale=1.0, points=None):
    """Value of :func:`quad`, discarding the error estimate."""
    return quad(f, a, b, spec=spec, scale=scale, points=points).value
