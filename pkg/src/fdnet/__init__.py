"""Outage and throughput of full-duplex cellular networks with sectorised
antennas, computed from stochastic-geometry formulas and by Monte Carlo
simulation of Poisson networks."""

from .analytic import (
    NumericalError, OutageEstimate, Scenario, SpecialCaseParams, outage, outage_3d_special,
    outage_alpha4_closed, outage_approx_fd, outage_asymptotic,
)
from .composite import (
    CompositeMix, ThroughputResult, composite_outage_downlink, composite_outage_uplink,
    optimize_p2n_success, optimize_p2n_throughput, throughput,
)
from .model import AntennaSystem, ConfigError, NetworkConfig, passive_suppression, thinning_table
from .montecarlo import (
    SeedPolicy, SimulationOptions, ThreeGppParams, estimate_composite_mc, estimate_outage_3gpp,
    estimate_outage_mc,
)
from .specfun import QuadratureSpec, hyp_F

__version__ = "0.1.0"

__all__ = [
    "AntennaSystem", "CompositeMix", "ConfigError", "NetworkConfig", "NumericalError", "OutageEstimate",
    "QuadratureSpec", "Scenario", "SeedPolicy", "SimulationOptions", "SpecialCaseParams", "ThreeGppParams",
    "ThroughputResult", "composite_outage_downlink", "composite_outage_uplink", "estimate_composite_mc",
    "estimate_outage_3gpp", "estimate_outage_mc", "hyp_F", "optimize_p2n_success", "optimize_p2n_throughput",
    "outage", "outage_3d_special", "outage_alpha4_closed", "outage_approx_fd", "outage_asymptotic",
    "passive_suppression", "thinning_table", "throughput",
]
