"""Parameter sweeps, figure presets and the CSV result contract.

Every job expands into a grid of points evaluated in a fixed order and
written as one CSV row per point with the columns in :data:`COLUMNS`.
Cells that do not apply are left empty.  ``wall_time`` is the only
column that changes between identical runs.
"""

import csv
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from . import analytic, composite, montecarlo
from .analytic import NumericalError, Scenario, SpecialCaseParams
from .config import load_settings
from .model import ConfigError, db_to_linear, linear_to_db
from .specfun import DomainError, QuadratureError

COLUMNS = ("kind", "scenario", "engine", "m", "rate", "sigma_l2_db", "lambda", "p_2n", "p_u",
           "value", "std_error", "error_bound", "n_realizations", "seed", "wall_time")
_INT_COLUMNS = ("n_realizations", "seed")
_TEXT_COLUMNS = ("kind", "scenario", "engine")
_NUMERIC_FAILURES = (NumericalError, QuadratureError, DomainError, ArithmeticError)


class GridPointError(RuntimeError):
    """Numerical failure at a named grid point."""


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully resolved job (see :func:`spec_from_settings`)."""

    kind: str
    scenarios: tuple
    engine: str
    model: str
    cfg: object
    antennas: object
    quad: object
    mc: object
    threegpp: object
    n_realizations: int
    seed: int
    rates: tuple
    m_values: tuple
    sigma_l2_db_values: tuple
    lam_values: tuple
    p_2n_values: tuple
    p_u_values: tuple
    gamma: float
    direction: str
    uplink_alphas: tuple
    output: str

    @property
    def workers(self):
        return self.mc.workers


def spec_from_settings(settings):
    e = settings["experiment"]
    cfg = settings.network_config()
    ant = settings.antennas()
    c = settings["composite"]
    scenarios = tuple(Scenario.parse(s) for s in e["scenarios"])
    return ExperimentSpec(
        kind=e["kind"], scenarios=scenarios, engine=e["engine"], model=e["model"], cfg=cfg,
        antennas=ant, quad=settings.quadrature_spec(), mc=settings.simulation_options(),
        threegpp=settings.threegpp_params(), n_realizations=settings["montecarlo"]["n_realizations"],
        seed=settings["montecarlo"]["seed"],
        rates=e["rates"] or (cfg.rate,),
        m_values=e["m_values"] or (ant.m_b,),
        sigma_l2_db_values=e["sigma_l2_db_values"] or (linear_to_db(cfg.sigma_l2),),
        lam_values=e["lam_values"] or (cfg.lam,),
        p_2n_values=e["p_2n_values"] or (0.0,),
        p_u_values=e["p_u_values"] or (1.0,),
        gamma=c["gamma"], direction=c["direction"],
        uplink_alphas=(c["uplink_alpha1"], c["uplink_alpha2"]), output=e["output"])


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

_SURFACE = "linspace(0, 1, 11)"

PRESETS = {
    "dl-composite": ("Downlink success surface over (p_2n, p_u), pencil beams", {
        "experiment.kind": "composite-surface", "composite.direction": "downlink",
        "experiment.sigma_l2_db_values": "-30, 0", "experiment.p_2n_values": _SURFACE,
        "experiment.p_u_values": _SURFACE, "montecarlo.geometry": "guard"}),
    "ul-composite": ("Uplink success surface over (p_2n, p_u), exponents (4, 3)", {
        "experiment.kind": "composite-surface", "composite.direction": "uplink",
        "network.alpha2": "3", "experiment.sigma_l2_db_values": "-30, 0",
        "experiment.p_2n_values": _SURFACE, "experiment.p_u_values": _SURFACE,
        "montecarlo.geometry": "guard"}),
    "throughput": ("Network throughput over (p_2n, p_u) at two densities", {
        "experiment.kind": "throughput-surface", "network.sigma_l2_db": "-30",
        "experiment.lam_values": "0.01, 0.1", "experiment.p_2n_values": _SURFACE,
        "experiment.p_u_values": _SURFACE, "montecarlo.geometry": "guard"}),
    "optimize": ("Throughput-optimal and success-optimal two-node fraction", {
        "experiment.kind": "optimize", "network.sigma_l2_db": "-30",
        "experiment.lam_values": "0.01, 0.1", "experiment.p_u_values": "1"}),
    "dl-rate": ("Downlink outage vs rate, perfect cancellation", {
        "experiment.scenarios": "2D, 3D", "experiment.m_values": "1, 4, 8",
        "experiment.rates": "linspace(0.1, 8, 80)", "network.sigma_l2_db": "-inf",
        "experiment.engine": "both"}),
    "dl-rate-li": ("Downlink outage vs rate, residual loopback -30 dB", {
        "experiment.scenarios": "2D, 3D", "experiment.m_values": "1, 4, 8",
        "experiment.rates": "linspace(0.1, 8, 80)", "network.sigma_l2_db": "-30",
        "experiment.engine": "both"}),
    "ul-rate": ("Uplink outage vs rate, perfect cancellation", {
        "experiment.scenarios": "2U, 3U", "experiment.m_values": "1, 4, 8", "network.alpha2": "3",
        "experiment.rates": "linspace(0.1, 8, 80)", "network.sigma_l2_db": "-inf",
        "experiment.engine": "both"}),
    "ul-rate-li10": ("Uplink outage vs rate, residual loopback -10 dB", {
        "experiment.scenarios": "2U, 3U", "experiment.m_values": "1, 4, 8", "network.alpha2": "3",
        "experiment.rates": "linspace(0.1, 8, 80)", "network.sigma_l2_db": "-10",
        "experiment.engine": "both"}),
    "ul-rate-li30": ("Uplink outage vs rate, residual loopback -30 dB", {
        "experiment.scenarios": "2U, 3U", "experiment.m_values": "1, 4, 8", "network.alpha2": "3",
        "experiment.rates": "linspace(0.1, 8, 80)", "network.sigma_l2_db": "-30",
        "experiment.engine": "both"}),
    "li-sweep": ("FD-node outage vs residual loopback with and without passive suppression", {
        "experiment.kind": "li-sweep", "experiment.scenarios": "2U, 3U", "network.alpha2": "3",
        "experiment.m_values": "1, 4, 8, inf", "experiment.model": "auto",
        "experiment.sigma_l2_db_values": "linspace(-50, 10, 31)", "network.rate": "0.1"}),
    "density-sweep": ("FD-node outage vs density at residual loopback -10 dB", {
        "experiment.kind": "density-sweep", "experiment.scenarios": "2U, 3U", "network.alpha2": "3",
        "experiment.m_values": "4, 8", "experiment.sigma_l2_db_values": "-10, -inf",
        "experiment.lam_values": "logspace(-3, 0.5, 15)", "network.rate": "0.1"}),
    "3gpp": ("Outage vs rate under the 3GPP pico-cell channel (simulation only)", {
        "experiment.kind": "3gpp-sweep", "experiment.scenarios": "2D, 3D, 2U, 3U",
        "experiment.m_values": "4, 8", "experiment.rates": "0.5, 1, 2, 3, 4",
        "experiment.engine": "mc"}),
}

ALIASES = {"fig3": "dl-composite", "fig4": "ul-composite", "fig5a": "dl-rate", "fig5b": "dl-rate-li",
           "fig6a": "ul-rate", "fig6b": "ul-rate-li10", "fig6c": "ul-rate-li30", "fig7": "li-sweep",
           "fig8": "density-sweep", "fig10": "3gpp"}


def preset_overrides(name):
    key = ALIASES.get(name, name)
    if key not in PRESETS:
        known = ", ".join(sorted(PRESETS) + sorted(ALIASES))
        raise ConfigError(f"unknown preset {name!r}; known presets: {known}")
    return dict(PRESETS[key][1])


def preset_settings(name, path=None, env=None, overrides=None):
    return load_settings(path, env=env, overrides=overrides, base=preset_overrides(name))


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


def _row(**fields):
    row = dict.fromkeys(COLUMNS)
    row.update(fields)
    return row


def _with_m(antennas, m):
    return replace(antennas, m_b=m, m_u=m)


def _point_label(**kw):
    return ", ".join(f"{k}={v}" for k, v in kw.items())


def _analytic_value(spec, scenario, cfg, antennas, m):
    model = spec.model
    if model == "auto":
        model = "asymptotic" if math.isinf(m) else "theorem"
    if model == "theorem":
        return analytic.outage(scenario, cfg, antennas, spec.quad)
    if model == "asymptotic":
        return analytic.outage_asymptotic(scenario, cfg, antennas.gamma_b, antennas.theta_max,
                                          antennas.clamp_suppression, spec.quad)
    special = SpecialCaseParams.from_config(cfg, antennas)
    if scenario is Scenario.D3:
        return analytic.outage_3d_special(cfg, special, spec.quad)
    return analytic.outage_approx_fd(scenario, cfg, special, antennas.theta_max,
                                     antennas.clamp_suppression, spec.quad)


def _analytic_task(args):
    spec, scenario, cfg, antennas, m, label = args
    start = time.perf_counter()
    try:
        est = _analytic_value(spec, scenario, cfg, antennas, m)
    except _NUMERIC_FAILURES as exc:
        raise GridPointError(f"numerical failure at {label}: {exc}") from exc
    return est, time.perf_counter() - start


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(fn, tasks))


def _outage_rows(spec):
    groups = []
    for scenario in spec.scenarios:
        for m in spec.m_values:
            for sig in spec.sigma_l2_db_values:
                for lam in spec.lam_values:
                    cfg = spec.cfg.with_(lam=lam, sigma_l2=db_to_linear(sig))
                    groups.append((scenario, m, sig, lam, cfg, _with_m(spec.antennas, m)))
    analytic_results = {}
    if spec.engine in ("analytic", "both"):
        tasks = []
        for gi, (scenario, m, sig, lam, cfg, ant) in enumerate(groups):
            for rate in spec.rates:
                label = _point_label(scenario=scenario.value, m=m, rate=rate, sigma_l2_db=sig, lam=lam)
                tasks.append((spec, scenario, cfg.with_(rate=rate), ant, m, label))
        results = _map(_analytic_task, tasks, spec.workers)
        keys = [(gi, ri) for gi in range(len(groups)) for ri in range(len(spec.rates))]
        analytic_results = dict(zip(keys, results))
    rows = []
    for gi, (scenario, m, sig, lam, cfg, ant) in enumerate(groups):
        mc_results = None
        if spec.engine in ("mc", "both"):
            start = time.perf_counter()
            mc_results = montecarlo.outage_curve_mc(scenario, cfg, ant, spec.rates, spec.n_realizations,
                                                    spec.seed, spec.mc)
            mc_time = (time.perf_counter() - start) / len(spec.rates)
        for ri, rate in enumerate(spec.rates):
            common = dict(kind=spec.kind, scenario=scenario.value, m=m, rate=rate, sigma_l2_db=sig, **{"lambda": lam})
            if (gi, ri) in analytic_results:
                est, wall = analytic_results[(gi, ri)]
                rows.append(_row(engine="analytic", value=est.value, error_bound=est.error_bound,
                                 wall_time=wall, **common))
            if mc_results is not None:
                est = mc_results[ri]
                rows.append(_row(engine="mc", value=est.value, std_error=est.std_error,
                                 n_realizations=est.n_realizations, seed=spec.seed, wall_time=mc_time, **common))
    return rows


def _direction_cfg(spec, cfg):
    if spec.direction == "uplink":
        return composite.uplink_config(cfg, *spec.uplink_alphas)
    return cfg


def _composite_rows(spec):
    rows = []
    fn = composite.composite_outage_downlink if spec.direction == "downlink" else composite.composite_outage_uplink
    for sig in spec.sigma_l2_db_values:
        for lam in spec.lam_values:
            cfg = _direction_cfg(spec, spec.cfg.with_(lam=lam, sigma_l2=db_to_linear(sig)))
            for p2 in spec.p_2n_values:
                for pu in spec.p_u_values:
                    common = dict(kind=spec.kind, scenario=f"composite-{spec.direction}", m=math.inf,
                                  rate=cfg.rate, sigma_l2_db=sig, p_2n=p2, p_u=pu, **{"lambda": lam})
                    label = _point_label(p_2n=p2, p_u=pu, sigma_l2_db=sig, lam=lam)
                    if spec.engine in ("analytic", "both"):
                        start = time.perf_counter()
                        try:
                            val = fn(cfg, spec.gamma, composite.CompositeMix(p2, pu), spec.quad).total
                        except _NUMERIC_FAILURES as exc:
                            raise GridPointError(f"numerical failure at {label}: {exc}") from exc
                        rows.append(_row(engine="analytic", value=val, wall_time=time.perf_counter() - start,
                                         **common))
                    if spec.engine in ("mc", "both"):
                        start = time.perf_counter()
                        est = montecarlo.estimate_composite_mc(spec.direction, cfg, spec.gamma, p2, pu,
                                                               spec.n_realizations, spec.seed, spec.mc)
                        rows.append(_row(engine="mc", value=est.value, std_error=est.std_error,
                                         n_realizations=est.n_realizations, seed=spec.seed,
                                         wall_time=time.perf_counter() - start, **common))
    return rows


def _throughput_rows(spec):
    rows = []
    for lam in spec.lam_values:
        for sig in spec.sigma_l2_db_values:
            cfg = spec.cfg.with_(lam=lam, sigma_l2=db_to_linear(sig))
            up = composite.uplink_config(cfg, *spec.uplink_alphas)
            bits = math.log2(1.0 + cfg.tau)
            for p2 in spec.p_2n_values:
                for pu in spec.p_u_values:
                    mix = composite.CompositeMix(p2, pu)
                    common = dict(kind=spec.kind, scenario="composite", m=math.inf, rate=cfg.rate,
                                  sigma_l2_db=sig, p_2n=p2, p_u=pu, **{"lambda": lam})
                    if spec.engine in ("analytic", "both"):
                        start = time.perf_counter()
                        try:
                            val = composite.throughput(cfg, spec.gamma, mix, up, spec.quad).throughput
                        except _NUMERIC_FAILURES as exc:
                            label = _point_label(p_2n=p2, p_u=pu, sigma_l2_db=sig, lam=lam)
                            raise GridPointError(f"numerical failure at {label}: {exc}") from exc
                        rows.append(_row(engine="analytic", value=val, wall_time=time.perf_counter() - start,
                                         **common))
                    if spec.engine in ("mc", "both"):
                        start = time.perf_counter()
                        d = montecarlo.estimate_composite_mc("downlink", cfg, spec.gamma, p2, pu,
                                                             spec.n_realizations, spec.seed, spec.mc)
                        u = montecarlo.estimate_composite_mc("uplink", up, spec.gamma, p2, pu,
                                                             spec.n_realizations, spec.seed, spec.mc)
                        q = mix.activity
                        val = lam * bits * ((1.0 - d.value) + q * (1.0 - u.value))
                        se = lam * bits * math.hypot(d.std_error, q * u.std_error)
                        rows.append(_row(engine="mc", value=val, std_error=se, n_realizations=d.n_realizations,
                                         seed=spec.seed, wall_time=time.perf_counter() - start, **common))
    return rows


def _optimize_rows(spec):
    rows = []
    for lam in spec.lam_values:
        for sig in spec.sigma_l2_db_values:
            cfg = spec.cfg.with_(lam=lam, sigma_l2=db_to_linear(sig))
            up = composite.uplink_config(cfg, *spec.uplink_alphas)
            for pu in spec.p_u_values:
                common = dict(engine="analytic", m=math.inf, rate=cfg.rate, sigma_l2_db=sig, p_u=pu,
                              **{"lambda": lam})
                start = time.perf_counter()
                link_cfg = up if spec.direction == "uplink" else cfg
                p_star, value = composite.optimize_p2n_success(spec.direction, link_cfg, spec.gamma, pu,
                                                               spec.quad)
                rows.append(_row(kind="optimize-success", scenario=f"composite-{spec.direction}", p_2n=p_star,
                                 value=value, wall_time=time.perf_counter() - start, **common))
                if pu == 1.0:
                    start = time.perf_counter()
                    dec = composite.optimize_p2n_throughput(cfg, spec.gamma, up, spec.quad)
                    rows.append(_row(kind="optimize-throughput", scenario="composite", p_2n=dec.p_2n,
                                     value=dec.throughput, wall_time=time.perf_counter() - start, **common))
    return rows


def _threegpp_rows(spec):
    rows = []
    params = spec.threegpp
    sig = params.sigma_l2_db
    for scenario in spec.scenarios:
        for m in spec.m_values:
            ant = _with_m(spec.antennas, m)
            start = time.perf_counter()
            samples = montecarlo.sinr_samples_3gpp(scenario, params, ant, spec.n_realizations, spec.seed, spec.mc)
            wall = (time.perf_counter() - start) / len(spec.rates)
            for rate in spec.rates:
                est = montecarlo.outage_from_samples(samples, rate)
                rows.append(_row(kind=spec.kind, scenario=scenario.value, engine="mc", m=m, rate=rate,
                                 sigma_l2_db=sig, value=est.value, std_error=est.std_error,
                                 n_realizations=est.n_realizations, seed=spec.seed, wall_time=wall,
                                 **{"lambda": params.lam}))
    return rows


def run_experiment(spec):
    """Evaluate every grid point of ``spec``; returns rows in grid order."""
    if spec.kind in ("outage-sweep", "li-sweep", "density-sweep"):
        return _outage_rows(spec)
    if spec.kind == "composite-surface":
        return _composite_rows(spec)
    if spec.kind == "throughput-surface":
        return _throughput_rows(spec)
    if spec.kind == "optimize":
        return _optimize_rows(spec)
    if spec.kind == "3gpp-sweep":
        if spec.engine != "mc":
            raise ConfigError("3gpp-sweep is simulation only; use engine = mc")
        return _threegpp_rows(spec)
    raise ConfigError(f"unknown experiment kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _format(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(rows, path_or_file):
    """Write rows with the fixed column order."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        out = csv.writer(fh)
        out.writerow(COLUMNS)
        for row in rows:
            out.writerow([_format(row.get(col)) for col in COLUMNS])
    finally:
        if own:
            fh.close()


def _parse_cell(column, text):
    if text == "":
        return None
    if column in _TEXT_COLUMNS:
        return text
    if column in _INT_COLUMNS:
        return int(text)
    return float(text)


def read_results(path_or_file):
    """Read a results CSV back into typed row dicts."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, newline="") if own else path_or_file
    try:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != COLUMNS:
            raise ConfigError(f"unexpected results header {header}")
        return [{col: _parse_cell(col, cell) for col, cell in zip(COLUMNS, line)} for line in reader]
    finally:
        if own:
            fh.close()


def strip_timing(rows):
    """Rows without the wall-time column, for determinism comparisons."""
    return [{k: v for k, v in row.items() if k != "wall_time"} for row in rows]
