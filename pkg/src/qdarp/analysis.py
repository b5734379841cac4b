"""Dressed-state and adiabaticity diagnostics, thresholds and Bloch export."""
from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .core import HBAR, DomainError


class DressedCurve(NamedTuple):
    times: np.ndarray
    e_plus: np.ndarray  # meV
    e_minus: np.ndarray
    min_gap: float  # meV
    gap_time: float  # ps


def _unpack(profile):
    times, omega_abs, delta = profile[0], profile[1], profile[2]
    times = np.asarray(times, dtype=float)
    omega_abs = np.abs(np.asarray(omega_abs, dtype=float))
    delta = np.asarray(delta, dtype=float)
    if not times.shape == omega_abs.shape == delta.shape:
        raise DomainError("profile arrays must have the same length")
    return times, omega_abs, delta


def dressed_energies(profile) -> DressedCurve:
    """Energies ``E_pm = +-hbar/2 sqrt(|Omega|^2 + Delta^2)`` and the anticrossing.

    ``profile`` is an :class:`~qdarp.shaper.InstantaneousProfile` or any
    ``(times, omega_abs, delta_inst)`` triple.  Samples with NaN detuning are
    carried through as NaN and ignored when locating the minimum gap.
    """
    times, omega_abs, delta = _unpack(profile)
    half = 0.5 * HBAR * np.hypot(omega_abs, delta)
    e_plus, e_minus = half, -half
    gap = e_plus - e_minus
    if np.all(np.isnan(gap)):
        return DressedCurve(times, e_plus, e_minus, float("nan"), float("nan"))
    i = int(np.nanargmin(gap))
    return DressedCurve(times, e_plus, e_minus, float(gap[i]), float(times[i]))


def adiabaticity_ratio(profile) -> np.ndarray:
    """``|Delta dOmega/dt - Omega dDelta/dt| / (Omega^2 + Delta^2)^(3/2)``.

    Derivatives are centred differences on the sample times (one-sided at the
    ends).  Undefined points, including ``Omega = Delta = 0``, are NaN.
    """
    times, omega, delta = _unpack(profile)
    if times.size < 2:
        return np.full(times.shape, np.nan)
    d_omega = np.gradient(omega, times)
    d_delta = np.gradient(delta, times)
    denom = (omega**2 + delta**2) ** 1.5
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(delta * d_omega - omega * d_delta) / denom
    ratio[~(denom > 0)] = np.nan
    return ratio


def max_ratio(ratio: np.ndarray, times: np.ndarray) -> tuple[float, float]:
    """Largest defined adiabaticity ratio and the time it occurs."""
    if np.all(np.isnan(ratio)):
        return float("nan"), float("nan")
    i = int(np.nanargmax(ratio))
    return float(ratio[i]), float(times[i])


def arp_threshold(curve, level: float = 0.95) -> Optional[float]:
    """Smallest sampled area from which the occupation stays at or above ``level``.

    ``curve`` is an :class:`~qdarp.dynamics.AreaCurve` or an
    ``(areas, occupation)`` pair; the result is in the curve's area units, or
    None if the last sample is already below ``level``.
    """
    if not 0 < level < 1:
        raise DomainError("level must lie strictly between 0 and 1")
    areas = np.asarray(curve[0], dtype=float)
    occ = np.asarray(curve[1], dtype=float)
    if areas.shape != occ.shape or areas.size == 0:
        raise DomainError("curve needs matching, non-empty area and occupation arrays")
    if np.any(np.diff(areas) <= 0):
        raise DomainError("curve areas must be strictly increasing")
    ok = occ >= level
    if not ok[-1]:
        return None
    below = np.nonzero(~ok)[0]
    start = below[-1] + 1 if below.size else 0
    return float(areas[start])


def bloch_export(trajectory) -> np.ndarray:
    """``(N, 4)`` array of ``t, sx, sy, sz`` samples along a trajectory."""
    bloch = np.asarray(trajectory.bloch, dtype=float)
    return np.column_stack([trajectory.times, bloch])
