"""INI configuration files.

Flat ``key = value`` pairs grouped in sections (``network``, ``antennas``,
``quadrature``, ``montecarlo``, ``composite``, ``3gpp``, ``experiment``).
Keys holding decibel values end in ``_db``.  Any key can be overridden by
an environment variable ``FDNET_<SECTION>_<KEY>`` (upper case), which beats
the file; explicit overrides passed by the caller beat both.

List values are comma separated, or ``linspace(a, b, n)`` /
``logspace(a, b, n)`` (base-10 exponents).
"""

import configparser
import math
import os
import re
from dataclasses import dataclass

import numpy as np

from .model import AntennaSystem, ConfigError, NetworkConfig
from .montecarlo import SimulationOptions, ThreeGppParams
from .specfun import QuadratureSpec

ENV_PREFIX = "FDNET_"


def _float(text):
    value = text.strip().lower()
    if value in ("inf", "+inf"):
        return math.inf
    if value == "-inf":
        return -math.inf
    return float(value)


def _opt_float(text):
    return None if text.strip().lower() in ("", "auto", "none") else _float(text)


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _sectors(text):
    value = _float(text)
    return value if math.isinf(value) else int(value)


_RANGE = re.compile(r"^\s*(linspace|logspace)\(\s*([^,]+),\s*([^,]+),\s*([^)]+)\)\s*$")


def _float_list(text):
    if text.strip() == "":
        return ()
    m = _RANGE.match(text)
    if m:
        fn = np.linspace if m.group(1) == "linspace" else np.logspace
        return tuple(float(v) for v in fn(_float(m.group(2)), _float(m.group(3)), int(m.group(4))))
    return tuple(_float(v) for v in text.split(","))


def _sector_list(text):
    return tuple(_sectors(v) for v in text.split(",")) if text.strip() else ()


def _str_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _choice(*options):
    def parse(text):
        value = text.strip()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {value!r}")
        return value
    return parse


_PARSERS = {"float": _float, "int": int, "bool": _bool, "str": str.strip, "sectors": _sectors,
            "opt_float": _opt_float, "floats": _float_list, "sectors_list": _sector_list,
            "strs": _str_list}

KINDS = ("outage-sweep", "li-sweep", "density-sweep", "composite-surface", "throughput-surface",
         "optimize", "3gpp-sweep")

# section -> key -> (parser, default)
SCHEMA = {
    "network": {
        "lam": ("float", "0.01"),
        "alpha1": ("float", "4"),
        "alpha2": ("float", "4"),
        "p_b": ("float", "1"),
        "p_u": ("float", "1"),
        "sigma_n2_db": ("float", "-inf"),
        "sigma_l2_db": ("float", "-inf"),
        "rate": ("float", "1"),
        "bs_li_power": (_choice("p_b", "p_u"), "p_b"),
    },
    "antennas": {
        "m_b": ("sectors", "1"),
        "m_u": ("sectors", "1"),
        "gamma_b": ("float", "0.2"),
        "gamma_u": ("float", "0.2"),
        "theta_max": ("float", repr(2.0 * math.pi / 3.0)),
        "clamp_suppression": ("bool", "true"),
    },
    "quadrature": {
        "rel_tol": ("float", "1e-9"),
        "abs_tol": ("float", "1e-12"),
        "max_subdivisions": ("int", "200"),
    },
    "montecarlo": {
        "n_realizations": ("int", "10000"),
        "seed": ("int", "0"),
        "workers": ("int", "1"),
        "window_radius": ("opt_float", "auto"),
        "expected_points": ("float", "1000"),
        "far_field": ("bool", "true"),
        "orientation": (_choice("geometric", "thinning"), "geometric"),
        "geometry": (_choice("exact", "guard"), "exact"),
        "association": ("bool", "false"),
        "user_density_factor": ("float", "20"),
        "chunk_size": ("int", "500"),
    },
    "composite": {
        "gamma": ("float", "0.2"),
        "direction": (_choice("downlink", "uplink"), "downlink"),
        "uplink_alpha1": ("float", "4"),
        "uplink_alpha2": ("float", "3"),
    },
    "3gpp": {
        "lam": ("float", "0.1"),
        "p_b_dbm": ("float", "24"),
        "p_u_dbm": ("float", "23"),
        "noise_figure_db": ("float", "5"),
        "bandwidth_hz": ("float", "10e6"),
        "sigma_l2_db": ("float", "-30"),
        "force_los": ("bool", "false"),
    },
    "experiment": {
        "kind": (_choice(*KINDS), "outage-sweep"),
        "scenarios": ("strs", "2D"),
        "engine": (_choice("analytic", "mc", "both"), "analytic"),
        "model": (_choice("theorem", "special", "asymptotic", "auto"), "theorem"),
        "rates": ("floats", ""),
        "m_values": ("sectors_list", ""),
        "sigma_l2_db_values": ("floats", ""),
        "lam_values": ("floats", ""),
        "p_2n_values": ("floats", ""),
        "p_u_values": ("floats", ""),
        "output": ("str", "results.csv"),
    },
}


def _parser(kind):
    return _PARSERS[kind] if isinstance(kind, str) else kind


@dataclass(frozen=True)
class Settings:
    """Typed configuration values, ``values[section][key]``."""

    values: dict

    def __getitem__(self, section):
        return self.values[section]

    def network_config(self):
        n = self.values["network"]
        return NetworkConfig.from_db(
            sigma_l2_db=n["sigma_l2_db"], sigma_n2_db=n["sigma_n2_db"], lam=n["lam"],
            alpha1=n["alpha1"], alpha2=n["alpha2"], p_b=n["p_b"], p_u=n["p_u"], rate=n["rate"],
            bs_li_power=n["bs_li_power"])

    def antennas(self):
        return AntennaSystem(**self.values["antennas"])

    def quadrature_spec(self):
        return QuadratureSpec(**self.values["quadrature"])

    def simulation_options(self):
        m = self.values["montecarlo"]
        return SimulationOptions(
            window_radius=m["window_radius"], expected_points=m["expected_points"],
            far_field=m["far_field"], orientation=m["orientation"], geometry=m["geometry"],
            association=m["association"], user_density_factor=m["user_density_factor"],
            workers=m["workers"], chunk_size=m["chunk_size"])

    def threegpp_params(self):
        return ThreeGppParams(**self.values["3gpp"])


def _raw_defaults():
    return {sec: {key: default for key, (_, default) in keys.items()} for sec, keys in SCHEMA.items()}


def _apply(raw, section, key, value, origin):
    if section not in SCHEMA:
        raise ConfigError(f"{origin}: unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"{origin}: unknown key {key!r} in [{section}]")
    raw[section][key] = value


def load_settings(path=None, env=None, overrides=None, base=None):
    """Merge defaults, ``base`` (raw strings), a config file, environment
    variables and ``overrides`` (``{"section.key": value}``), in that
    order, and parse every value."""
    raw = _raw_defaults()
    for dotted, value in (base or {}).items():
        section, key = dotted.split(".", 1)
        _apply(raw, section, key, str(value), "preset")
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        for section in parser.sections():
            for key, value in parser.items(section):
                _apply(raw, section, key, value, str(path))
    env = os.environ if env is None else env
    for section, keys in SCHEMA.items():
        for key in keys:
            name = f"{ENV_PREFIX}{section.upper()}_{key.upper()}"
            if name in env:
                raw[section][key] = env[name]
    for dotted, value in (overrides or {}).items():
        section, key = dotted.split(".", 1)
        _apply(raw, section, key, str(value), "override")
    typed = {}
    for section, keys in SCHEMA.items():
        typed[section] = {}
        for key, (kind, _) in keys.items():
            try:
                typed[section][key] = _parser(kind)(raw[section][key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{section}] {key} = {raw[section][key]!r}: {exc}") from exc
    return Settings(typed)
