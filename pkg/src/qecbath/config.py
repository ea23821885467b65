"""Run configuration: a flat, human-editable JSON document.

Every field has a default; unknown keys are hard errors, as are
out-of-range values (errors name the offending field). The resolved
configuration is echoed verbatim into every output's metadata so a run
can be reproduced from its artifacts.

Units: omega is the reference qubit frequency; time is measured in
1/omega, temperature and kappa in units of omega; fidelity is
dimensionless.
"""

import json
from dataclasses import dataclass, fields

import numpy as np

from .protocols import ProtocolSpec

__all__ = ["RunConfig", "ConfigError", "parse_config", "DEFAULTS"]


class ConfigError(ValueError):
    """Malformed, unknown, or out-of-range configuration input."""


DEFAULTS = {
    # physical scenario
    "omega": 1.0,
    "temperature": 0.2,
    "kappa": 0.01,
    "code": "five_qubit",              # five_qubit | steane | toric_822 | null
    "initial_state": "zero",           # zero | one | plus | werner
    "werner_p": 0.5,
    "cycles": [1],                     # int or list of ints
    "topology": "collective",          # collective | local
    "block_bath": "per_block",         # per_block | global
    # bath discretization
    "n_modes": 1,
    "window_min": None,                # null -> omega (single resonant mode)
    "window_max": None,
    "resonance_convention": "resonant",  # resonant | antiresonant
    # integration
    "backend": "time_local",           # time_local | memory_kernel | lindblad
    "dt": 1e-3,
    "t_max": 100.0,
    "n_times": 26,
    "t_grid": None,                    # explicit list overrides t_max/n_times
    # recovery details
    "toric_recovery": "mixing",        # mixing | first
    "seed": 0,                         # stochastic toric sampling only
    # execution / output
    "workers": 1,
    "output": "results",
    # critical-time search
    "kt_window": 5.0,
    "scan_points": 50,
    # sweep grids (null -> singleton taken from the scalar field above)
    "kappa_values": None,
    "temperature_values": None,
    "p_values": None,
    "cycles_values": None,
    "code_values": None,
    "topology_values": None,
}

_CHOICES = {
    "code": ("five_qubit", "steane", "toric_822", None),
    "initial_state": ("zero", "one", "plus", "werner"),
    "topology": ("collective", "local"),
    "block_bath": ("per_block", "global"),
    "resonance_convention": ("resonant", "antiresonant"),
    "backend": ("time_local", "memory_kernel", "lindblad"),
    "toric_recovery": ("mixing", "first"),
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration (one attribute per DEFAULTS key)."""

    omega: float
    temperature: float
    kappa: float
    code: str
    initial_state: str
    werner_p: float
    cycles: tuple
    topology: str
    block_bath: str
    n_modes: int
    window_min: float
    window_max: float
    resonance_convention: str
    backend: str
    dt: float
    t_max: float
    n_times: int
    t_grid: tuple
    toric_recovery: str
    seed: int
    workers: int
    output: str
    kt_window: float
    scan_points: int
    kappa_values: tuple
    temperature_values: tuple
    p_values: tuple
    cycles_values: tuple
    code_values: tuple
    topology_values: tuple

    def as_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def resolved_t_grid(self):
        if self.t_grid is not None:
            return tuple(self.t_grid)
        return tuple(float(t) for t in np.linspace(0.0, self.t_max, self.n_times))

    def to_protocol_spec(self):
        window = None
        if self.window_min is not None or self.window_max is not None:
            lo = self.window_min if self.window_min is not None else self.omega
            hi = self.window_max if self.window_max is not None else self.omega
            window = (lo, hi)
        return ProtocolSpec(
            initial_state=self.initial_state,
            werner_p=self.werner_p,
            code=self.code,
            n_cycles=self.cycles,
            t_grid=self.resolved_t_grid(),
            temperature=self.temperature,
            kappa=self.kappa,
            omega=self.omega,
            topology=self.topology,
            block_bath=self.block_bath,
            n_modes=self.n_modes,
            window=window,
            resonance_convention=self.resonance_convention,
            backend=self.backend,
            dt=self.dt,
            toric_recovery=self.toric_recovery,
        )


def _fail(field_name, message):
    raise ConfigError(f"config field '{field_name}': {message}")


def _check_number(name, value, lo=None, hi=None, strict_lo=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(name, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        _fail(name, f"expected an integer, got {value!r}")
    if lo is not None and (value <= lo if strict_lo else value < lo):
        _fail(name, f"value {value} below allowed minimum {lo}")
    if hi is not None and value > hi:
        _fail(name, f"value {value} above allowed maximum {hi}")
    return int(value) if integer else float(value)


def _validate(raw):
    cfg = dict(DEFAULTS)
    for key, value in raw.items():
        if key not in DEFAULTS:
            _fail(key, "unknown key")
        cfg[key] = value

    for name, choices in _CHOICES.items():
        if cfg[name] not in choices:
            shown = " | ".join(str(c) for c in choices)
            _fail(name, f"must be one of: {shown}")

    cfg["omega"] = _check_number("omega", cfg["omega"], lo=0, strict_lo=True)
    cfg["temperature"] = _check_number("temperature", cfg["temperature"], lo=0, strict_lo=True)
    cfg["kappa"] = _check_number("kappa", cfg["kappa"], lo=0)
    cfg["werner_p"] = _check_number("werner_p", cfg["werner_p"], lo=0.0, hi=1.0)
    cfg["dt"] = _check_number("dt", cfg["dt"], lo=0, strict_lo=True)
    cfg["t_max"] = _check_number("t_max", cfg["t_max"], lo=0)
    cfg["n_times"] = _check_number("n_times", cfg["n_times"], lo=2, integer=True)
    cfg["n_modes"] = _check_number("n_modes", cfg["n_modes"], lo=1, integer=True)
    cfg["seed"] = _check_number("seed", cfg["seed"], lo=0, integer=True)
    cfg["workers"] = _check_number("workers", cfg["workers"], lo=1, integer=True)
    cfg["kt_window"] = _check_number("kt_window", cfg["kt_window"], lo=0, strict_lo=True)
    cfg["scan_points"] = _check_number("scan_points", cfg["scan_points"], lo=2, integer=True)

    cyc = cfg["cycles"] if isinstance(cfg["cycles"], list) else [cfg["cycles"]]
    cfg["cycles"] = tuple(_check_number("cycles", c, lo=1, integer=True) for c in cyc)

    for name in ("window_min", "window_max"):
        if cfg[name] is not None:
            cfg[name] = _check_number(name, cfg[name], lo=0)
    if (cfg["window_min"] is not None and cfg["window_max"] is not None
            and cfg["window_min"] > cfg["window_max"]):
        _fail("window_min", "must not exceed window_max")

    if cfg["t_grid"] is not None:
        if not isinstance(cfg["t_grid"], list) or len(cfg["t_grid"]) < 1:
            _fail("t_grid", "expected a nonempty list of times")
        grid = tuple(_check_number("t_grid", t, lo=0) for t in cfg["t_grid"])
        if list(grid) != sorted(grid):
            _fail("t_grid", "times must be ascending")
        cfg["t_grid"] = grid

    if not isinstance(cfg["output"], str) or not cfg["output"]:
        _fail("output", "expected a nonempty string")

    grids = {
        "kappa_values": lambda v: _check_number("kappa_values", v, lo=0),
        "temperature_values": lambda v: _check_number("temperature_values", v,
                                                      lo=0, strict_lo=True),
        "p_values": lambda v: _check_number("p_values", v, lo=0.0, hi=1.0),
        "cycles_values": lambda v: _check_number("cycles_values", v, lo=1, integer=True),
        "code_values": lambda v: v if v in _CHOICES["code"]
                       else _fail("code_values", f"bad code {v!r}"),
        "topology_values": lambda v: v if v in _CHOICES["topology"]
                           else _fail("topology_values", f"bad topology {v!r}"),
    }
    for name, checker in grids.items():
        if cfg[name] is not None:
            if not isinstance(cfg[name], list) or not cfg[name]:
                _fail(name, "expected a nonempty list")
            cfg[name] = tuple(checker(v) for v in cfg[name])

    if cfg["initial_state"] == "werner" and cfg["code"] == "steane":
        _fail("initial_state", "werner input needs a two-logical-qubit-capable "
                               "code (five_qubit or toric_822)")
    return RunConfig(**cfg)


def _parse_set_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare strings like five_qubit


def parse_config(path=None, overrides=None):
    """Load, override, validate, and fully resolve a configuration.

    Parameters
    ----------
    path : str, optional
        JSON file; omitted means all defaults.
    overrides : sequence of "key=value" strings, optional
        Applied after the file; values are parsed as JSON with a
        fallback to plain strings.
    """
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config document must be a JSON object")
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, _, value = item.partition("=")
        raw[key.strip()] = _parse_set_value(value.strip())
    return _validate(raw)
