"""Parameter sweeps over area, chirp, hole width and temperature.

Every grid point is an independent propagation; results are written into an
index-addressed tensor, so the outcome does not depend on worker count or
completion order.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import Config, ConfigError, SweepSpec, dumps
from .dynamics import final_occupation
from .shaper import synthesize

log = logging.getLogger(__name__)

CSV_COLUMNS = ("theta_pi", "chirp_ps2", "hole_mev", "temp_k", "phonons", "occupation")
_AXIS_COLUMN = {"area": "theta_pi", "chirp": "chirp_ps2", "hole": "hole_mev",
                "temperature": "temp_k"}


class BudgetExceeded(ConfigError):
    pass


@dataclass(eq=False)
class SweepResult:
    axes: dict[str, np.ndarray]
    occupation: dict[str, np.ndarray]  # "off"/"on" -> tensor over the axes
    base: dict[str, float]  # values of the non-swept knobs
    errors: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())

    def same_as(self, other: "SweepResult") -> bool:
        if list(self.axes) != list(other.axes) or list(self.occupation) != list(other.occupation):
            return False
        return (all(np.array_equal(self.axes[k], other.axes[k]) for k in self.axes)
                and all(np.array_equal(self.occupation[k], other.occupation[k], equal_nan=True)
                        for k in self.occupation)
                and self.base == other.base and self.errors == other.errors
                and self.metadata == other.metadata)


def config_hash(config: Config) -> str:
    return hashlib.sha256(dumps(config).encode()).hexdigest()


def _toggles(config: Config) -> tuple[str, ...]:
    if config.sweep is not None and config.sweep.phonon_toggle:
        return ("off", "on")
    return ("on",) if config.phonon_enabled else ("off",)


def _point_values(config: Config, sweep: SweepSpec, index: tuple[int, ...]) -> dict[str, float]:
    p = config.pulse
    values = {"area": p.area, "chirp": p.chirp_spectral, "hole": p.hole_fwhm,
              "temperature": config.phonon.temperature}
    for (name, axis), i in zip(sweep.axes, index):
        values[name] = axis[i]
    return values


def run_point(config: Config, values: dict[str, float], phonons: bool) -> float:
    """Final occupation at one grid point; the unit of work for the pool."""
    pulse = config.pulse.with_(area=values["area"], chirp_spectral=values["chirp"],
                               hole_fwhm=values["hole"])
    emitter = config.emitter_for(phonons, temperature=values["temperature"])
    field_ = synthesize(pulse, emitter, config.grid_for(pulse))
    return final_occupation(field_, emitter, config.solver)


def _work(config: Config, values: dict[str, float], toggles: tuple[str, ...]):
    out = []
    for toggle in toggles:
        try:
            out.append((toggle, run_point(config, values, toggle == "on"), None))
        except Exception as exc:  # recorded per point, the sweep carries on
            out.append((toggle, math.nan, f"{type(exc).__name__}: {exc}"))
    return out


def default_jobs() -> int:
    env = os.environ.get("QDARP_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer QDARP_JOBS=%r", env)
    return 1


def run_sweep(config: Config, jobs: Optional[int] = None,
              timestamp: Optional[str] = None) -> SweepResult:
    """Evaluate the final occupation on every point of ``config.sweep``.

    A config without a sweep section is the degenerate 1x1 sweep.  Points run
    on ``jobs`` worker processes (``QDARP_JOBS`` or 1 by default).
    """
    sweep = config.sweep or SweepSpec()
    if sweep.n_points > sweep.budget:
        raise BudgetExceeded(f"{sweep.n_points} points exceed the budget of {sweep.budget}")
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    toggles = _toggles(config)
    shape = sweep.shape
    tensors = {t: np.full(shape, np.nan) for t in toggles}
    errors: list[dict] = []
    indices = list(np.ndindex(*shape))

    def record(index, results):
        for toggle, occ, err in results:
            tensors[toggle][index] = occ
            if err is not None:
                errors.append({"index": list(index), "phonons": toggle, "error": err})

    if jobs == 1 or len(indices) == 1:
        for index in indices:
            record(index, _work(config, _point_values(config, sweep, index), toggles))
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(indices))) as pool:
            futures = {pool.submit(_work, config, _point_values(config, sweep, index), toggles):
                       index for index in indices}
            for fut in as_completed(futures):
                record(futures[fut], fut.result())
    errors.sort(key=lambda e: (e["index"], e["phonons"]))

    base = _point_values(config, SweepSpec(), ())
    metadata = {"config_hash": config_hash(config), "code_version": __version__,
                "timestamp": timestamp}
    return SweepResult(
        axes={name: np.asarray(values, dtype=float) for name, values in sweep.axes},
        occupation=tensors, base=base, errors=errors, metadata=metadata)


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.12g}"


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    names = list(result.axes)
    for index in np.ndindex(*result.shape):
        values = dict(result.base)
        for name, i in zip(names, index):
            values[name] = float(result.axes[name][i])
        for toggle, tensor in result.occupation.items():
            writer.writerow([_fmt(values["area"]), _fmt(values["chirp"]), _fmt(values["hole"]),
                             _fmt(values["temperature"]), int(toggle == "on"),
                             _fmt(float(tensor[index]))])
    return buf.getvalue()


def _nested(a: np.ndarray):
    if a.ndim == 0:
        v = float(a)
        return None if math.isnan(v) else v
    return [_nested(x) for x in a]


def to_json(result: SweepResult) -> str:
    doc = {
        "axes": {k: v.tolist() for k, v in result.axes.items()},
        "base": result.base,
        "occupation": {k: _nested(v) for k, v in result.occupation.items()},
        "errors": result.errors,
        "metadata": result.metadata,
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> SweepResult:
    doc = json.loads(text)
    axes = {k: np.asarray(v, dtype=float) for k, v in doc["axes"].items()}
    shape = tuple(len(v) for v in axes.values())
    occupation = {}
    for k, v in doc["occupation"].items():
        arr = np.array(v, dtype=object).reshape(shape) if shape else np.array(v, dtype=object)
        occupation[k] = np.where(arr == None, np.nan, arr).astype(float)  # noqa: E711
    return SweepResult(axes, occupation, doc["base"], doc["errors"], doc["metadata"])


def emit_results(result: SweepResult, fmt: str, path) -> None:
    """Write ``result`` as long-form CSV or JSON; output is byte-stable."""
    if fmt == "csv":
        text = to_csv(result)
    elif fmt == "json":
        text = to_json(result)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text(text)


def load_results(path) -> SweepResult:
    return from_json(Path(path).read_text())
