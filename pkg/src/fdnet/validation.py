"""Acceptance suite: ten numbered checks tying the analytic engine, the
simulator and the composite optimizer to known values and claims.

Used by ``fdnet validate`` and by the test suite.  Every check returns a
:class:`CriterionResult`; simulation-backed checks cache their SINR
samples per worker count so the determinism check can compare them bit
for bit.
"""

import hashlib
import math
import time
from dataclasses import dataclass

import numpy as np

from . import analytic, composite, montecarlo
from .analytic import Scenario, SpecialCaseParams
from .model import AntennaSystem, NetworkConfig
from .specfun import QuadratureSpec

GRID_RATES = (0.1, 1.0, 4.0)
GRID_SIGMAS_DB = (-math.inf, -30.0)
GRID_M = (1, 4, 8)
UPLINK_ALPHAS = (4.0, 3.0)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.name}: {self.detail} ({self.elapsed:.1f} s)"


def _digest(samples):
    return hashlib.sha256(np.ascontiguousarray(samples).tobytes()).hexdigest()


class Validator:
    """Runs the acceptance criteria.

    Parameters
    ----------
    seed : int
        Master seed for every simulation.
    workers : int
        Worker processes for simulations.
    n_realizations : int
        Realisations per simulated point (10^4 for the full suite).
    """

    def __init__(self, seed=0, workers=1, n_realizations=10_000):
        self.seed = seed
        self.workers = workers
        self.n = n_realizations
        self._samples = {}
        self._mc_jobs = {}
        self._done = set()

    # -- simulation bookkeeping ------------------------------------------------

    def _run_samples(self, label, workers):
        key = (label, workers)
        if key not in self._samples:
            self._samples[key] = self._mc_jobs[label](workers)
        return self._samples[key]

    def _register(self, label, fn):
        self._mc_jobs.setdefault(label, fn)
        return self._run_samples(label, self.workers)

    def _network_samples(self, scenario, cfg, antennas, label):
        def fn(workers):
            opts = montecarlo.SimulationOptions(workers=workers)
            return montecarlo.sinr_samples(scenario, cfg, antennas, self.n, self.seed, opts)
        return self._register(label, fn)

    def _threegpp_samples(self, scenario, params, antennas, label):
        def fn(workers):
            opts = montecarlo.SimulationOptions(workers=workers)
            return montecarlo.sinr_samples_3gpp(scenario, params, antennas, self.n, self.seed, opts)
        return self._register(label, fn)

    def fingerprints(self, workers):
        """Digest of every simulation the suite has run, at ``workers``."""
        return {label: _digest(self._run_samples(label, workers)) for label in sorted(self._mc_jobs)}

    # -- criteria ------------------------------------------------------------------

    def criterion_1(self):
        """Closed-form anchor 1 - 1/(1 + 3*pi/4) reached four ways."""
        cfg = NetworkConfig(lam=0.01, rate=1.0)
        ant = AntennaSystem.symmetric(1)
        special = SpecialCaseParams(1, 0.2)
        exact = 1.0 - 1.0 / (1.0 + 0.75 * math.pi)
        closed = 1.0 - 1.0 / analytic.y_factor("3D", cfg, special)
        prop = analytic.outage_3d_special(cfg, special, force_quadrature=True).value
        thm = analytic.outage("3D", cfg, ant).value
        values = (exact, closed, prop, thm)
        worst = max(abs(a - b) / exact for a in values for b in values)
        samples = self._network_samples(Scenario.D3, cfg, ant, "anchor-3D")
        mc = montecarlo.outage_from_samples(samples, cfg.rate)
        z = abs(mc.value - exact) / mc.std_error
        ok = worst <= 1e-6 and z <= 3.0
        return ok, (f"closed={closed:.8f} proposition={prop:.8f} theorem={thm:.8f} "
                    f"max rel diff={worst:.1e}; mc={mc.value:.4f} ({z:.2f} SE)"), 60.0

    def criterion_2(self):
        """Analytic vs simulation on the 72-point grid."""
        worst = (0.0, "")
        failures = []
        for scenario in (Scenario.D2, Scenario.D3, Scenario.U2, Scenario.U3):
            uplink = scenario.link == "uplink"
            alphas = UPLINK_ALPHAS if uplink else (4.0, 4.0)
            floor = 0.03 if uplink else 0.02
            for sig in GRID_SIGMAS_DB:
                for m in GRID_M:
                    cfg = NetworkConfig.from_db(sig, lam=0.01, alpha1=alphas[0], alpha2=alphas[1])
                    ant = AntennaSystem.symmetric(m)
                    samples = self._network_samples(scenario, cfg, ant, f"grid-{scenario.value}-{sig}-{m}")
                    for rate in GRID_RATES:
                        ana = analytic.outage(scenario, cfg.with_(rate=rate), ant).value
                        mc = montecarlo.outage_from_samples(samples, rate)
                        diff = abs(ana - mc.value)
                        tol = max(floor, 3.0 * mc.std_error)
                        point = f"{scenario.value} M={m} R={rate} sigma={sig} dB"
                        if diff / tol > worst[0]:
                            worst = (diff / tol, f"{point}: |{ana:.4f}-{mc.value:.4f}|={diff:.4f} tol {tol:.4f}")
                        if diff > tol:
                            failures.append(point)
        detail = f"{len(failures)} of 72 points outside tolerance; worst {worst[1]}"
        return not failures, detail, 1800.0

    def criterion_3(self):
        """Perfect-cancellation outage does not depend on density."""
        spread = 0.0
        names = []
        tight = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=400)
        special = SpecialCaseParams(4, 0.2)
        ant = AntennaSystem.symmetric(4)
        routes = {
            "2D closed": lambda c: analytic.outage_alpha4_closed("2D", c, special).value,
            "2U closed": lambda c: analytic.outage_alpha4_closed("2U", c, special).value,
            "3U closed": lambda c: analytic.outage_alpha4_closed("3U", c, special).value,
            "3D closed": lambda c: analytic.outage_3d_special(c, special).value,
            "3D theorem": lambda c: analytic.outage("3D", c, ant, tight).value,
        }
        for name, fn in routes.items():
            vals = [fn(NetworkConfig(lam=lam, rate=1.0)) for lam in (1e-3, 1e-2, 1e-1)]
            s = max(vals) - min(vals)
            names.append(f"{name}={vals[0]:.6f}")
            spread = max(spread, s)
        return spread <= 1e-9, f"max spread {spread:.1e} over lambda in {{1e-3, 1e-2, 1e-1}}; " + ", ".join(names), None

    def criterion_4(self):
        """Dense networks approach perfect cancellation sooner with three nodes."""
        parts = []
        ok = True
        for m in (4, 8):
            ant = AntennaSystem.symmetric(m)
            cfg = NetworkConfig.from_db(-10.0, lam=0.5, rate=0.1, alpha1=UPLINK_ALPHAS[0], alpha2=UPLINK_ALPHAS[1])
            perfect = cfg.with_(sigma_l2=0.0)
            gap3 = analytic.outage("3U", cfg, ant).value - analytic.outage("3U", perfect, ant).value
            gap2 = analytic.outage("2U", cfg, ant).value - analytic.outage("2U", perfect, ant).value
            ok = ok and abs(gap3) <= 0.02 and gap2 >= 0.02
            parts.append(f"M={m}: 3U gap {gap3:.4f} (need <= 0.02), 2U gap {gap2:.4f} (need >= 0.02)")
        return ok, "; ".join(parts), None

    def criterion_5(self):
        """Three-node beats two-node with residual loopback; equal without."""
        rates = tuple(np.linspace(0.5, 4.0, 8))
        worst_dl = worst_ul = -math.inf
        equal = 0.0
        for m in (4, 8):
            ant = AntennaSystem.symmetric(m)
            dl = NetworkConfig.from_db(-30.0, lam=0.01)
            ul = dl.with_(alpha1=UPLINK_ALPHAS[0], alpha2=UPLINK_ALPHAS[1])
            for rate in rates:
                worst_dl = max(worst_dl, analytic.outage("3D", dl.with_(rate=rate), ant).value
                               - analytic.outage("2D", dl.with_(rate=rate), ant).value)
                worst_ul = max(worst_ul, analytic.outage("3U", ul.with_(rate=rate), ant).value
                               - analytic.outage("2U", ul.with_(rate=rate), ant).value)
                p = ul.with_(rate=rate, sigma_l2=0.0)
                equal = max(equal, abs(analytic.outage("3U", p, ant).value - analytic.outage("2U", p, ant).value))
        ok = worst_dl < 0 and worst_ul < 0 and equal <= 1e-6
        return ok, (f"max(3D-2D)={worst_dl:.4f}, max(3U-2U)={worst_ul:.4f} (both must be < 0); "
                    f"max |2U-3U| at perfect cancellation {equal:.1e}"), None

    def criterion_6(self):
        """Relative outage reduction from passive suppression, pencil beams."""
        cfg = NetworkConfig.from_db(-20.0, lam=0.01, rate=0.1, alpha1=UPLINK_ALPHAS[0], alpha2=UPLINK_ALPHAS[1])
        with_ps = analytic.outage_asymptotic("3U", cfg, 0.2).value
        without = analytic.outage_asymptotic("2U", cfg, 0.2).value
        reduction = 1.0 - with_ps / without
        ok = abs(reduction - 0.40) <= 0.10
        return ok, (f"outage {without:.4f} -> {with_ps:.4f}, reduction {100 * reduction:.1f}% "
                    f"(target 40 +/- 10 points)"), None

    def criterion_7(self):
        """Throughput-optimal two-node fraction at the two densities."""
        parts = []
        ok = True
        for lam, expected in ((0.1, 1), (0.01, 0)):
            cfg = NetworkConfig.from_db(-30.0, lam=lam, rate=1.0)
            dec = composite.optimize_p2n_throughput(cfg, 0.2)
            grid, values = composite.throughput_grid(cfg, 0.2)
            argmax = float(grid[int(np.argmax(values))])
            ok = ok and dec.p_2n == expected and argmax == float(expected)
            parts.append(f"lambda={lam}: decision {dec.p_2n} (expected {expected}), grid argmax {argmax:g}")
        return ok, "; ".join(parts), None

    def criterion_8(self):
        """Throughput is affine in the two-node fraction when p_u = 1."""
        xs = np.linspace(0.0, 1.0, 5)
        worst = 0.0
        for lam in (0.01, 0.1):
            cfg = NetworkConfig.from_db(-30.0, lam=lam, rate=1.0)
            ys = np.array([composite.throughput(cfg, 0.2, composite.CompositeMix(x, 1.0)).throughput for x in xs])
            fit = np.polyval(np.polyfit(xs, ys, 1), xs)
            worst = max(worst, float(np.max(np.abs(fit - ys)) / np.max(np.abs(ys))))
        return worst < 1e-8, f"max relative residual of 5-point line fit {worst:.1e}", None

    def criterion_9(self, worker_counts=(4, 16)):
        """Simulation results identical for every worker count."""
        for k in (1, 2, 10):
            if k not in self._done:
                getattr(self, f"criterion_{k}")()
                self._done.add(k)
        base = self.fingerprints(self.workers)
        mismatched = []
        for w in worker_counts:
            other = self.fingerprints(w)
            mismatched += [f"{label}@{w}" for label in base if other[label] != base[label]]
        detail = (f"{len(base)} simulation runs compared at workers {self.workers} vs "
                  f"{', '.join(map(str, worker_counts))}; {len(mismatched)} mismatches")
        return not mismatched and bool(base), detail, None

    def criterion_10(self):
        """3GPP channel: three-node no worse than two-node."""
        params = montecarlo.ThreeGppParams()
        worst = -math.inf
        where = ""
        for m in (4, 8):
            ant = AntennaSystem.symmetric(m)
            samples = {sc: self._threegpp_samples(sc, params, ant, f"3gpp-{sc.value}-{m}")
                       for sc in (Scenario.D2, Scenario.D3, Scenario.U2, Scenario.U3)}
            for rate in (1.0, 2.0, 4.0):
                est = {sc: montecarlo.outage_from_samples(s, rate) for sc, s in samples.items()}
                for three, two in ((Scenario.D3, Scenario.D2), (Scenario.U3, Scenario.U2)):
                    se = math.hypot(est[three].std_error, est[two].std_error)
                    excess = est[three].value - est[two].value - 3.0 * se
                    if excess > worst:
                        worst = excess
                        where = (f"M={m} R={rate}: {three.value}={est[three].value:.4f} "
                                 f"{two.value}={est[two].value:.4f}")
        return worst <= 0.0, f"largest (three-node - two-node - 3 SE) = {worst:.4f} at {where}", 600.0

    def run(self, numbers=None, on_result=None):
        numbers = numbers or range(1, 11)
        results = []
        for k in numbers:
            fn = getattr(self, f"criterion_{k}")
            start = time.perf_counter()
            ok, detail, budget = fn()
            elapsed = time.perf_counter() - start
            self._done.add(k)
            if budget is not None and elapsed > budget:
                ok = False
                detail += f"; exceeded {budget:.0f} s budget"
            result = CriterionResult(k, (fn.__doc__ or "").strip().splitlines()[0].rstrip("."), bool(ok), detail, elapsed)
            results.append(result)
            if on_result is not None:
                on_result(result)
        return results
