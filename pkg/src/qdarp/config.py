"""JSON configuration: schema, validation, defaults and canonical serialization.

Schema (every key is optional; absent keys take their defaults)::

    {
      "emitter": {"energy_mev", "dipole_scale"},
      "pulse":   {"fwhm_ps", "area_pi", "chirp_ps2", "detuning_mev"},
      "mask":    {"hole_fwhm_mev", "hole_depth"},
      "phonon":  {"enabled", "coupling_ps2", "cutoff_psinv", "temperature_k"},
      "grid":    {"n_samples", "window_factor"},
      "solver":  {"dt_ps"},
      "sweep":   {"axes": {name: [values] | {"start","stop","count"} | "a:b:n"},
                  "phonon_toggle", "budget"}
    }
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import core
from .core import EmitterConfig, PhononSpec, PulseSpec, SimGrid, SolverParams

AXIS_NAMES = ("area", "chirp", "hole", "temperature")
DEFAULT_BUDGET = 100_000


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


def _number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _pos(x):
    return _number(x) and x > 0


def _nonneg(x):
    return _number(x) and x >= 0


def _unit(x):
    return _number(x) and 0 <= x <= 1


def _pow2(x):
    return isinstance(x, int) and not isinstance(x, bool) and x >= 2 and x & (x - 1) == 0


# section -> key -> (default, check, constraint)
SCHEMA: dict[str, dict[str, tuple[Any, Any, str]]] = {
    "emitter": {
        "energy_mev": (core.DEFAULT_TRANSITION_MEV, _pos, "transition_energy > 0"),
        "dipole_scale": (1.0, _pos, "dipole_scale > 0"),
    },
    "pulse": {
        "fwhm_ps": (core.DEFAULT_FWHM_PS, _pos, "fwhm_tl > 0"),
        "area_pi": (1.0, _nonneg, "area >= 0"),
        "chirp_ps2": (0.0, _number, "chirp_spectral finite"),
        "detuning_mev": (0.0, _number, "center_detuning finite"),
    },
    "mask": {
        "hole_fwhm_mev": (0.0, _nonneg, "hole_fwhm >= 0"),
        "hole_depth": (1.0, _unit, "0 <= hole_depth <= 1"),
    },
    "phonon": {
        "enabled": (False, lambda x: isinstance(x, bool), "enabled is a boolean"),
        "coupling_ps2": (core.DEFAULT_COUPLING_PS2, _nonneg, "coupling >= 0"),
        "cutoff_psinv": (core.DEFAULT_CUTOFF_PSINV, _pos, "cutoff > 0"),
        "temperature_k": (core.DEFAULT_TEMPERATURE_K, _nonneg, "temperature >= 0"),
    },
    "grid": {
        "n_samples": (core.DEFAULT_N_SAMPLES, _pow2, "n_samples is a power of two"),
        "window_factor": (core.DEFAULT_WINDOW_FACTOR, _pos, "window_factor > 0"),
    },
    "solver": {
        "dt_ps": (None, lambda x: x is None or _pos(x), "dt > 0"),
    },
}


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[tuple[str, tuple[float, ...]], ...] = ()
    phonon_toggle: bool = False
    budget: int = DEFAULT_BUDGET

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for _, v in self.axes)

    @property
    def n_points(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) * (2 if self.phonon_toggle else 1)


@dataclass(frozen=True)
class Config:
    pulse: PulseSpec = field(default_factory=PulseSpec)
    emitter: EmitterConfig = field(default_factory=EmitterConfig)
    phonon: PhononSpec = field(default_factory=PhononSpec)
    phonon_enabled: bool = False
    n_samples: int = core.DEFAULT_N_SAMPLES
    window_factor: float = core.DEFAULT_WINDOW_FACTOR
    solver: SolverParams = field(default_factory=SolverParams)
    sweep: Optional[SweepSpec] = None

    def emitter_for(self, phonons: Optional[bool] = None,
                    temperature: Optional[float] = None) -> EmitterConfig:
        """Emitter with the phonon bath attached or removed."""
        on = self.phonon_enabled if phonons is None else phonons
        if not on:
            return replace(self.emitter, phonon=None)
        bath = self.phonon
        if temperature is not None:
            bath = replace(bath, temperature=temperature)
        return replace(self.emitter, phonon=bath)

    def grid_for(self, pulse: Optional[PulseSpec] = None) -> SimGrid:
        return SimGrid.for_pulse(pulse or self.pulse, self.n_samples, self.window_factor)

    def with_sweep(self, sweep: Optional[SweepSpec]) -> "Config":
        return replace(self, sweep=sweep)


def parse_axis_values(name: str, spec) -> tuple[float, ...]:
    """Axis values from a list, a ``{start, stop, count}`` object or ``"a:b:n"``.

    Area values are in units of pi and may carry a ``pi`` suffix (``"6pi"``).
    """
    where = f"sweep.axes.{name}"
    if name not in AXIS_NAMES:
        raise ConfigError(f"{where}: unknown axis (expected one of {', '.join(AXIS_NAMES)})")
    if isinstance(spec, str):
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ConfigError(f"{where}: range must be start:stop:count")
            start, stop = _scalar(name, parts[0]), _scalar(name, parts[1])
            try:
                count = int(parts[2])
            except ValueError:
                raise ConfigError(f"{where}: count must be an integer") from None
            spec = {"start": start, "stop": stop, "count": count}
        else:
            spec = [_scalar(name, s) for s in spec.split(",") if s.strip()]
    if isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "count"}
        if extra:
            raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
        try:
            start, stop, count = spec["start"], spec["stop"], spec["count"]
        except KeyError as exc:
            raise ConfigError(f"{where}: missing {exc.args[0]}") from None
        if not (isinstance(count, int) and not isinstance(count, bool) and count >= 1):
            raise ConfigError(f"{where}: count must be an integer >= 1")
        if not (_number(start) and _number(stop)):
            raise ConfigError(f"{where}: start and stop must be numbers")
        values = np.linspace(start, stop, count) if count > 1 else np.array([start], float)
        values = tuple(float(v) for v in values)
    elif isinstance(spec, (list, tuple)):
        if not spec:
            raise ConfigError(f"{where}: axis count must be >= 1")
        values = []
        for v in spec:
            v = _scalar(name, v) if isinstance(v, str) else v
            if not _number(v):
                raise ConfigError(f"{where}: values must be finite numbers")
            values.append(float(v))
        values = tuple(values)
    else:
        raise ConfigError(f"{where}: expected a list, a range object or a string")
    checks = {"area": (_nonneg, "area >= 0"), "hole": (_nonneg, "hole_fwhm >= 0"),
              "temperature": (_nonneg, "temperature >= 0"), "chirp": (_number, "finite")}
    check, text = checks[name]
    for v in values:
        if not check(v):
            raise ConfigError(f"{where}: value {v!r} violates {text}")
    return values


_PI = re.compile(r"^\s*([-+0-9.eE]*)\s*pi\s*$")


def _scalar(name: str, text) -> float:
    if not isinstance(text, str):
        return text
    m = _PI.match(text)
    try:
        if m:
            if name != "area":
                raise ConfigError(f"sweep.axes.{name}: 'pi' suffix only applies to area")
            coeff = m.group(1)
            return float(coeff) if coeff not in ("", "+") else 1.0
        return float(text)
    except ValueError:
        raise ConfigError(f"sweep.axes.{name}: cannot parse {text!r}") from None


def _section(data: dict, name: str) -> dict:
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    schema = SCHEMA[name]
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    out = {}
    for key, (default, check, constraint) in schema.items():
        value = raw.get(key, default)
        if isinstance(value, int) and not isinstance(value, bool) and isinstance(default, float):
            value = float(value)
        if not check(value):
            raise ConfigError(f"{name}.{key} = {value!r}: violates {constraint}")
        out[key] = value
    return out


def _sweep(raw) -> SweepSpec:
    if not isinstance(raw, dict):
        raise ConfigError("sweep: expected an object")
    unknown = set(raw) - {"axes", "phonon_toggle", "budget"}
    if unknown:
        raise ConfigError(f"sweep: unknown keys {sorted(unknown)}")
    axes_raw = raw.get("axes", {})
    if not isinstance(axes_raw, dict):
        raise ConfigError("sweep.axes: expected an object")
    if len(axes_raw) > 3:
        raise ConfigError("sweep.axes: at most 3 axes")
    axes = tuple((name, parse_axis_values(name, spec)) for name, spec in axes_raw.items())
    toggle = raw.get("phonon_toggle", False)
    if not isinstance(toggle, bool):
        raise ConfigError("sweep.phonon_toggle: expected a boolean")
    budget = raw.get("budget", DEFAULT_BUDGET)
    if not (isinstance(budget, int) and not isinstance(budget, bool) and budget >= 1):
        raise ConfigError("sweep.budget: violates budget >= 1")
    spec = SweepSpec(axes, toggle, budget)
    if spec.n_points > budget:
        raise ConfigError(f"sweep: {spec.n_points} points exceed the budget of {budget}")
    return spec


def from_dict(data: dict) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be an object")
    unknown = set(data) - set(SCHEMA) - {"sweep"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    em = _section(data, "emitter")
    pu = _section(data, "pulse")
    ma = _section(data, "mask")
    ph = _section(data, "phonon")
    gr = _section(data, "grid")
    so = _section(data, "solver")
    try:
        pulse = PulseSpec(
            fwhm_tl=pu["fwhm_ps"], area=pu["area_pi"], chirp_spectral=pu["chirp_ps2"],
            center_detuning=pu["detuning_mev"], hole_fwhm=ma["hole_fwhm_mev"],
            hole_depth=ma["hole_depth"])
        phonon = PhononSpec(ph["coupling_ps2"], ph["cutoff_psinv"], ph["temperature_k"])
        emitter = EmitterConfig(em["energy_mev"], em["dipole_scale"],
                                phonon if ph["enabled"] else None)
        solver = SolverParams(dt=so["dt_ps"])
    except core.DomainError as exc:
        raise ConfigError(str(exc)) from None
    sweep = _sweep(data["sweep"]) if "sweep" in data else None
    return Config(pulse, emitter, phonon, ph["enabled"], gr["n_samples"],
                  gr["window_factor"], solver, sweep)


def to_dict(config: Config) -> dict:
    p, e, ph = config.pulse, config.emitter, config.phonon
    out = {
        "emitter": {"energy_mev": e.transition_energy, "dipole_scale": e.dipole_scale},
        "pulse": {"fwhm_ps": p.fwhm_tl, "area_pi": p.area, "chirp_ps2": p.chirp_spectral,
                  "detuning_mev": p.center_detuning},
        "mask": {"hole_fwhm_mev": p.hole_fwhm, "hole_depth": p.hole_depth},
        "phonon": {"enabled": config.phonon_enabled, "coupling_ps2": ph.coupling,
                   "cutoff_psinv": ph.cutoff, "temperature_k": ph.temperature},
        "grid": {"n_samples": config.n_samples, "window_factor": config.window_factor},
        "solver": {"dt_ps": config.solver.dt},
    }
    if config.sweep is not None:
        out["sweep"] = {
            "axes": {name: list(values) for name, values in config.sweep.axes},
            "phonon_toggle": config.sweep.phonon_toggle,
            "budget": config.sweep.budget,
        }
    return out


def dumps(config: Config) -> str:
    return json.dumps(to_dict(config), indent=2) + "\n"


def loads(text: str, source: str = "<string>") -> Config:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return from_dict(data)


def load_config(path) -> Config:
    """Read and validate a configuration file; OSError propagates unchanged."""
    path = Path(path)
    return loads(path.read_text(), str(path))
