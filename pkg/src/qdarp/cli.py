"""``qdarp`` command line: shape | evolve | dressed | bloch | sweep.

Exit codes: 0 success, 2 configuration error, 3 numerical refusal, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import adiabaticity_ratio, bloch_export, dressed_energies, max_ratio
from .config import Config, ConfigError, SweepSpec, load_config, parse_axis_values
from .core import HBAR, DomainError, NumericalRefusal
from .dynamics import propagate
from .shaper import autocorrelation, instantaneous_profile, synthesize
from .sweep import default_jobs, emit_results, run_sweep, to_csv, to_json

log = logging.getLogger("qdarp")

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _table(columns: Sequence[str], data: Sequence[np.ndarray], fmt: str) -> str:
    if fmt == "json":
        doc = {c: [None if not np.isfinite(x) else float(x) for x in col]
               for c, col in zip(columns, data)}
        return json.dumps(doc) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in zip(*data):
        writer.writerow([f"{float(x):.12g}" for x in row])
    return buf.getvalue()


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _suffixed(out, suffix: str, fmt: str):
    if out is None:
        return None
    p = Path(out)
    return p.with_name(f"{p.stem}_{suffix}.{fmt}")


def _field(cfg: Config):
    emitter = cfg.emitter_for()
    return synthesize(cfg.pulse, emitter, cfg.grid_for()), emitter


def cmd_shape(cfg: Config, args) -> None:
    field_, _ = _field(cfg)
    prof = instantaneous_profile(field_)
    env = field_.time_envelope
    time_cols = ("t_ps", "re_rabi", "im_rabi", "abs_rabi", "delta_inst_psinv")
    time_data = (field_.times, env.real, env.imag, np.abs(env), prof.delta_inst)
    spec = field_.spectrum
    energy = field_.transition_energy + HBAR * field_.frequencies
    spec_cols = ("omega_mev", "re_spec", "im_spec", "abs_spec")
    spec_data = (energy, spec.real, spec.imag, np.abs(spec))
    delay, g = autocorrelation(field_)
    if args.out is None:
        _write(_table(time_cols, time_data, args.format), None)
        return
    _write(_table(time_cols, time_data, args.format), _suffixed(args.out, "time", args.format))
    _write(_table(spec_cols, spec_data, args.format), _suffixed(args.out, "spectrum", args.format))
    _write(_table(("delay_ps", "g"), (delay, g), args.format),
           _suffixed(args.out, "autocorr", args.format))


def cmd_evolve(cfg: Config, args) -> None:
    field_, emitter = _field(cfg)
    traj = propagate(field_, emitter, cfg.solver)
    s = slice(None, None, args.stride)
    sx, sy, sz = traj.bloch[s].T
    cols = ("t_ps", "occ", "sx", "sy", "sz", "e_plus_mev", "e_minus_mev", "adiab_ratio")
    data = (traj.times[s], traj.occupation[s], sx, sy, sz, traj.dressed_energies[s, 0],
            traj.dressed_energies[s, 1], traj.adiabaticity_ratio[s])
    _write(_table(cols, data, args.format), args.out)
    log.info("final occupation %.6f", traj.final_occupation)


def cmd_dressed(cfg: Config, args) -> None:
    field_, _ = _field(cfg)
    prof = instantaneous_profile(field_)
    curve = dressed_energies(prof)
    ratio = adiabaticity_ratio(prof)
    s = slice(None, None, args.stride)
    cols = ("t_ps", "abs_rabi", "delta_inst_psinv", "e_plus_mev", "e_minus_mev", "adiab_ratio")
    data = (prof.times[s], prof.omega_abs[s], prof.delta_inst[s], curve.e_plus[s],
            curve.e_minus[s], ratio[s])
    _write(_table(cols, data, args.format), args.out)
    peak, at = max_ratio(ratio, prof.times)
    log.info("min gap %.6g meV at %.6g ps; max adiabaticity ratio %.6g at %.6g ps",
             curve.min_gap, curve.gap_time, peak, at)


def cmd_bloch(cfg: Config, args) -> None:
    field_, emitter = _field(cfg)
    points = bloch_export(propagate(field_, emitter, cfg.solver))[::args.stride]
    _write(_table(("t_ps", "sx", "sy", "sz"), tuple(points.T), args.format), args.out)


def cmd_sweep(cfg: Config, args) -> None:
    sweep = cfg.sweep or SweepSpec()
    if args.axis:
        axes = []
        for item in args.axis:
            name, sep, spec = item.partition("=")
            if not sep:
                raise ConfigError(f"--axis {item!r}: expected name=values")
            axes.append((name.strip(), parse_axis_values(name.strip(), spec)))
        names = [n for n, _ in axes]
        if len(set(names)) != len(names) or len(axes) > 3:
            raise ConfigError("--axis: at most 3 distinct axes")
        sweep = SweepSpec(tuple(axes), sweep.phonon_toggle, sweep.budget)
    if args.phonon_toggle:
        sweep = SweepSpec(sweep.axes, True, sweep.budget)
    if sweep.n_points > sweep.budget:
        raise ConfigError(f"sweep: {sweep.n_points} points exceed the budget of {sweep.budget}")
    result = run_sweep(cfg.with_sweep(sweep), jobs=args.jobs)
    for err in result.errors:
        log.warning("point %s (phonons %s) failed: %s", err["index"], err["phonons"], err["error"])
    if args.out is None:
        sys.stdout.write(to_csv(result) if args.format == "csv" else to_json(result))
    else:
        emit_results(result, args.format, args.out)


COMMANDS = {"shape": cmd_shape, "evolve": cmd_evolve, "dressed": cmd_dressed,
            "bloch": cmd_bloch, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdarp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qdarp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", help="output path (stdout if omitted); shape uses it as a prefix")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("evolve", "dressed", "bloch"):
            p.add_argument("--stride", type=int, default=1, help="keep every n-th sample")
        if name == "sweep":
            p.add_argument("--axis", action="append", default=[],
                           help="name=start:stop:count or name=v1,v2,...; "
                                "names: area (units of pi), chirp, hole, temperature")
            p.add_argument("--phonon-toggle", action="store_true",
                           help="run every point with and without phonons")
            p.add_argument("--jobs", type=int, default=None,
                           help="worker processes (default: $QDARP_JOBS or 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "stride", 1) < 1:
        print("error: --stride must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "jobs", None) is None and args.command == "sweep":
        args.jobs = default_jobs()
    try:
        cfg = load_config(args.config)
        COMMANDS[args.command](cfg, args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalRefusal as exc:
        print(f"numerical refusal: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
