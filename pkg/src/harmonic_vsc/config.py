"""YAML run configuration with defaults, validation and location-aware errors.

A minimal file only names the preset::

    system:
      preset: co2

Everything else falls back to the defaults below. Numbers written like
``1e-3`` (which YAML 1.1 reads as strings) are accepted for float fields.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .co2 import CO2Preset
from .dynamics import ThermostatParams
from .model import ApproximationLevel, EnsembleConfig


class ConfigError(ValueError):
    """Invalid configuration; ``location`` is ``file:line`` when known."""

    def __init__(self, message: str, field_path: str = "", location: Optional[str] = None):
        self.field_path = field_path
        self.location = location
        where = f"{location}: " if location else ""
        name = f"{field_path}: " if field_path else ""
        super().__init__(f"{where}{name}{message}")


@dataclass
class CO2Section:
    m_o: float = 29166.0
    m_c: float = 21874.0
    z_o: float = 2.0
    z_c: float = 1.0
    z_e: float = 5.0
    k_e: float = 1.0
    sqrt_ka: float = 0.0116


@dataclass
class CustomSection:
    nuclear_masses: list = field(default_factory=lambda: [1836.0])
    nuclear_charges: list = field(default_factory=lambda: [1.0])
    electron_charge: float = 1.0
    k_e: float = 1.0
    k_n: float = 0.0
    nuclear_potential: str = "chain"


@dataclass
class SystemSection:
    preset: str = "co2"
    n_molecules: int = 20
    coupling: float = 0.01
    omega_beta: Optional[float] = None
    level: str = "sc"
    co2: CO2Section = field(default_factory=CO2Section)
    custom: CustomSection = field(default_factory=CustomSection)


@dataclass
class ThermostatSection:
    temperature: float = 1e-3
    friction: float = 0.5e-5
    photon_friction: Optional[float] = None
    dt: float = 20.0


@dataclass
class RunSection:
    n_steps: int = 200000
    sample_stride: int = 5
    n_seeds: int = 4
    seed: int = 0
    output_dir: str = "out"
    blowup_bound: float = 1e6


@dataclass
class SpectrumSection:
    window: str = "hann"
    max_lag: Optional[int] = None
    zero_pad: int = 4
    rel_threshold: float = 0.05


@dataclass
class ScanSection:
    lambda_min: float = 0.0
    lambda_max: float = 0.1
    lambda_steps: int = 21
    n_values: list = field(default_factory=lambda: [1, 5, 10, 20, 40])


@dataclass
class RunConfig:
    system: SystemSection = field(default_factory=SystemSection)
    thermostat: ThermostatSection = field(default_factory=ThermostatSection)
    run: RunSection = field(default_factory=RunSection)
    spectrum: SpectrumSection = field(default_factory=SpectrumSection)
    scan: ScanSection = field(default_factory=ScanSection)

    def co2_preset(self) -> CO2Preset:
        c = self.system.co2
        return CO2Preset(m_o=c.m_o, m_c=c.m_c, z_o=c.z_o, z_c=c.z_c, z_e=c.z_e, k_e=c.k_e,
                         sqrt_ka=c.sqrt_ka)

    def ensemble(self) -> EnsembleConfig:
        s = self.system
        if s.preset == "co2":
            return self.co2_preset().ensemble(s.n_molecules, s.coupling, s.omega_beta, s.level)
        c = s.custom
        if s.omega_beta is None:
            raise ConfigError("required for the custom preset", "system.omega_beta")
        return EnsembleConfig(n_molecules=s.n_molecules, nuclear_masses=tuple(c.nuclear_masses),
                              nuclear_charges=tuple(c.nuclear_charges), electron_charge=c.electron_charge,
                              k_e=c.k_e, lam=s.coupling, omega_beta=s.omega_beta, k_n=c.k_n,
                              nuclear_potential=c.nuclear_potential, level=s.level)

    def thermostat_params(self, seed: Optional[int] = None) -> ThermostatParams:
        t = self.thermostat
        return ThermostatParams(temperature=t.temperature, friction=t.friction, dt=t.dt,
                                rng_seed=self.run.seed if seed is None else seed,
                                photon_friction=t.photon_friction)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["system"] = {("lambda" if k == "coupling" else k): v for k, v in out["system"].items()}
        return out

    def config_hash(self) -> str:
        """Digest of everything that affects results; the output directory is excluded."""
        data = self.to_dict()
        del data["run"]["output_dir"]
        text = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def header(self) -> dict:
        return {"tool": f"harmonic_vsc {__version__}", "config_hash": self.config_hash()}


# YAML key -> dataclass field where they differ
_RENAMED = {("system", "lambda"): "coupling"}


def _line_index(text: str, source: str) -> dict:
    """Map key paths to ``source:line`` using the composed node tree."""
    index = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                sub = path + (key.value,)
                index[sub] = f"{source}:{key.start_mark.line + 1}"
                walk(value, sub)

    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return index
    if root is not None:
        walk(root, ())
    return index


def _yaml_key(path: tuple, name: str) -> str:
    for key, field_name in _RENAMED.items():
        if key[:-1] == path and field_name == name:
            return key[-1]
    return name


def _coerce(value, ftype, path: str, where):
    optional = typing.get_origin(ftype) is typing.Union and type(None) in typing.get_args(ftype)
    base = [t for t in typing.get_args(ftype) if t is not type(None)][0] if optional else ftype
    if value is None:
        if optional:
            return None
        raise ConfigError(f"must not be null (expected {base.__name__})", path, where)
    if base is float:
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        elif isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        raise ConfigError(f"expected a number, got {value!r}", path, where)
    if base is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"expected an integer, got {value!r}", path, where)
        return int(value)
    if base is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path, where)
        return value
    if base is list:
        if not isinstance(value, list):
            raise ConfigError(f"expected a list, got {value!r}", path, where)
        return list(value)
    raise ConfigError(f"unsupported field type {ftype}", path, where)


def _build(cls, data, path: tuple, lines: dict):
    where = lines.get(path)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"expected a mapping, got {type(data).__name__}", ".".join(path), where)
    hints = typing.get_type_hints(cls)
    by_key = {_yaml_key(path, f.name): f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        sub = path + (key,)
        dotted = ".".join(str(k) for k in sub)
        if key not in by_key:
            raise ConfigError(f"unknown key {key!r} (allowed: {', '.join(sorted(by_key))})", dotted,
                              lines.get(sub))
        name = by_key[key]
        ftype = hints[name]
        if dataclasses.is_dataclass(ftype):
            kwargs[name] = _build(ftype, value, sub, lines)
        else:
            kwargs[name] = _coerce(value, ftype, dotted, lines.get(sub))
    return cls(**kwargs)


def _validate(cfg: RunConfig, lines: dict) -> None:
    def fail(msg, *path):
        raise ConfigError(msg, ".".join(path), lines.get(path))

    s = cfg.system
    if s.preset not in ("co2", "custom"):
        fail("must be 'co2' or 'custom'", "system", "preset")
    try:
        ApproximationLevel.parse(s.level)
    except ValueError as exc:
        fail(str(exc), "system", "level")
    if s.n_molecules < 1:
        fail("must be >= 1", "system", "n_molecules")
    if s.coupling < 0:
        fail("must be >= 0", "system", "lambda")
    if s.omega_beta is not None and not s.omega_beta > 0:
        fail("must be positive", "system", "omega_beta")
    for name in ("m_o", "m_c", "k_e", "sqrt_ka"):
        if not getattr(s.co2, name) > 0:
            fail("must be positive", "system", "co2", name)
    c = s.custom
    if not c.k_e > 0:
        fail("must be positive", "system", "custom", "k_e")
    if len(c.nuclear_masses) != len(c.nuclear_charges) or not c.nuclear_masses:
        fail("nuclear_masses and nuclear_charges need the same non-zero length", "system", "custom")
    t = cfg.thermostat
    if not t.dt > 0:
        fail("must be positive", "thermostat", "dt")
    if t.temperature < 0:
        fail("must be >= 0", "thermostat", "temperature")
    if t.friction < 0:
        fail("must be >= 0", "thermostat", "friction")
    if t.photon_friction is not None and t.photon_friction < 0:
        fail("must be >= 0", "thermostat", "photon_friction")
    r = cfg.run
    if r.n_steps < 1:
        fail("must be >= 1", "run", "n_steps")
    if r.sample_stride < 1:
        fail("must be >= 1", "run", "sample_stride")
    if r.n_seeds < 1:
        fail("must be >= 1", "run", "n_seeds")
    if not 0 <= r.seed < 2**64:
        fail("must be a non-negative 64-bit integer", "run", "seed")
    if not r.blowup_bound > 0:
        fail("must be positive", "run", "blowup_bound")
    sp = cfg.spectrum
    if not 0 < sp.rel_threshold < 1:
        fail("must lie in (0, 1)", "spectrum", "rel_threshold")
    if sp.zero_pad < 1:
        fail("must be >= 1", "spectrum", "zero_pad")
    if sp.max_lag is not None and sp.max_lag < 1:
        fail("must be >= 1", "spectrum", "max_lag")
    sc = cfg.scan
    if sc.lambda_steps < 1:
        fail("must be >= 1", "scan", "lambda_steps")
    if sc.lambda_min < 0 or sc.lambda_max < sc.lambda_min:
        fail("need 0 <= lambda_min <= lambda_max", "scan")
    if not all(isinstance(n, int) and n >= 1 for n in sc.n_values):
        fail("must be positive integers", "scan", "n_values")
    try:
        cfg.ensemble()
    except ConfigError:
        raise
    except ValueError as exc:
        fail(str(exc), "system")


def config_from_dict(data, source: str = "<dict>", lines: Optional[dict] = None) -> RunConfig:
    lines = lines or {}
    cfg = _build(RunConfig, data, (), lines)
    _validate(cfg, lines)
    return cfg


def loads_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", "", where) from None
    return config_from_dict(data, source, _line_index(text, source))


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", "", str(path)) from None
    return loads_config(text, str(path))


def dumps_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=False)


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_config(cfg))


def lambda_grid(cfg: RunConfig) -> np.ndarray:
    s = cfg.scan
    return np.linspace(s.lambda_min, s.lambda_max, s.lambda_steps)
