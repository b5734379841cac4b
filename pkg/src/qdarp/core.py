"""Constants, unit conventions and the parameter types shared by every module.

Units throughout: energies in meV, times in ps, angular frequencies in
ps^-1, temperatures in K.  An energy ``E`` converts to an angular frequency
as ``E / HBAR``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

#: Reduced Planck constant in meV ps (CODATA 2018).
HBAR = 0.6582119569
#: Boltzmann constant in meV/K (CODATA 2018).
K_B = 0.08617333262

LN2 = math.log(2.0)

# Defaults when a configuration leaves a knob unspecified.
DEFAULT_FWHM_PS = 0.110
DEFAULT_COUPLING_PS2 = 0.0272
DEFAULT_CUTOFF_PSINV = 2.2
DEFAULT_TEMPERATURE_K = 4.2
DEFAULT_TRANSITION_MEV = 1059.7  # 1170 nm
DEFAULT_N_SAMPLES = 2**14
DEFAULT_WINDOW_FACTOR = 16.0


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalRefusal(RuntimeError):
    """A computation was refused because its numerical settings are unsafe."""


class GridSizingError(NumericalRefusal):
    """The sampling grid cannot represent the requested pulse."""


class StepSizeError(NumericalRefusal):
    """The integrator step is too coarse for the drive."""

    def __init__(self, message: str, required_dt: float):
        super().__init__(message)
        self.required_dt = required_dt


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


@dataclass(frozen=True)
class PulseSpec:
    """Transform-limited Gaussian pulse plus the shaping-mask knobs.

    Attributes
    ----------
    fwhm_tl : float
        Intensity FWHM of the transform-limited pulse (ps).
    area : float
        Pulse area of the *unmasked* pulse, in units of pi.
    chirp_spectral : float
        Quadratic spectral phase coefficient (ps^2).
    center_detuning : float
        Static detuning ``omega_0 - omega_l`` expressed as an energy (meV).
    hole_fwhm : float
        Full width at half maximum of the spectral hole (meV).
    hole_depth : float
        Depth of the Gaussian notch, 1 removes the resonant component fully.
    """

    fwhm_tl: float = DEFAULT_FWHM_PS
    area: float = 1.0
    chirp_spectral: float = 0.0
    center_detuning: float = 0.0
    hole_fwhm: float = 0.0
    hole_depth: float = 1.0

    def __post_init__(self):
        _require(self.fwhm_tl > 0, "fwhm_tl must be > 0")
        _require(self.area >= 0, "area must be >= 0")
        _require(self.hole_fwhm >= 0, "hole_fwhm must be >= 0")
        _require(0.0 <= self.hole_depth <= 1.0, "hole_depth must lie in [0, 1]")
        for name in ("fwhm_tl", "area", "chirp_spectral", "center_detuning",
                     "hole_fwhm", "hole_depth"):
            _require(math.isfinite(getattr(self, name)), f"{name} must be finite")

    @property
    def has_hole(self) -> bool:
        return self.hole_fwhm > 0 and self.hole_depth > 0

    def with_(self, **changes) -> "PulseSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class PhononSpec:
    """Acoustic-phonon bath with spectral density ``A w^3 exp(-w^2/wc^2)``."""

    coupling: float = DEFAULT_COUPLING_PS2
    cutoff: float = DEFAULT_CUTOFF_PSINV
    temperature: float = DEFAULT_TEMPERATURE_K

    def __post_init__(self):
        _require(self.coupling >= 0, "coupling must be >= 0")
        _require(self.cutoff > 0, "cutoff must be > 0")
        _require(self.temperature >= 0, "temperature must be >= 0")


@dataclass(frozen=True)
class EmitterConfig:
    transition_energy: float = DEFAULT_TRANSITION_MEV
    dipole_scale: float = 1.0
    phonon: Optional[PhononSpec] = None

    def __post_init__(self):
        _require(self.transition_energy > 0, "transition_energy must be > 0")
        _require(self.dipole_scale > 0, "dipole_scale must be > 0")

    def with_(self, **changes) -> "EmitterConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class SimGrid:
    """Uniform time grid ``t_k = (k - n/2) dt`` and its conjugate frequency grid."""

    n_samples: int
    time_step: float

    def __post_init__(self):
        n = self.n_samples
        _require(n >= 2 and n & (n - 1) == 0, "n_samples must be a power of two")
        _require(self.time_step > 0, "time_step must be > 0")

    @property
    def frequency_step(self) -> float:
        return 2 * math.pi / (self.n_samples * self.time_step)

    @property
    def window(self) -> float:
        return self.n_samples * self.time_step

    def times(self):
        return (np.arange(self.n_samples) - self.n_samples // 2) * self.time_step

    def frequencies(self):
        """Angular frequency offsets from the emitter transition (ps^-1)."""
        return (np.arange(self.n_samples) - self.n_samples // 2) * self.frequency_step

    @classmethod
    def for_pulse(cls, pulse: PulseSpec, n_samples: int = DEFAULT_N_SAMPLES,
                  window_factor: float = DEFAULT_WINDOW_FACTOR) -> "SimGrid":
        """Grid whose window is ``window_factor`` times the longest pulse timescale.

        The longest timescale is the stretched pulse, or the stretched
        temporal wing produced by a narrow spectral hole when that is longer.
        ``n_samples`` is doubled as needed to keep the frequency window wide
        enough for the pulse bandwidth.
        """
        _require(window_factor > 0, "window_factor must be > 0")
        window = window_factor * pulse_timescale(pulse)
        bandwidth = 4 * LN2 / pulse.fwhm_tl
        # keep the frequency span >= 6 bandwidths when the window is long
        while 2 * math.pi * n_samples / window < 6 * bandwidth:
            n_samples *= 2
        return cls(n_samples, window / n_samples)

    def check(self, pulse: PulseSpec) -> None:
        """Raise :class:`GridSizingError` if the grid cannot hold ``pulse``."""
        stretched = stretched_duration(pulse.chirp_spectral, pulse.fwhm_tl)
        if self.window < 8 * stretched:
            raise GridSizingError(
                f"time window {self.window:.4g} ps is shorter than 8x the stretched "
                f"duration ({8 * stretched:.4g} ps)")
        bandwidth = 4 * LN2 / pulse.fwhm_tl
        span = self.n_samples * self.frequency_step
        if span < 6 * bandwidth:
            raise GridSizingError(
                f"frequency window {span:.4g} ps^-1 spans fewer than 6 spectral "
                f"FWHMs ({6 * bandwidth:.4g} ps^-1)")


def temporal_chirp(phi2: float, tau0: float) -> float:
    """Temporal chirp ``alpha`` (ps^-2) produced by spectral chirp ``phi2``.

    ``alpha = 2 phi2 / (tau0^4 / (2 ln 2)^2 + (2 phi2)^2)`` for a Gaussian of
    transform-limited intensity FWHM ``tau0``.
    """
    if not tau0 > 0:
        raise DomainError("tau0 must be > 0")
    return 2 * phi2 / (tau0**4 / (2 * LN2) ** 2 + (2 * phi2) ** 2)


def stretched_duration(phi2: float, tau0: float) -> float:
    """Intensity FWHM of a Gaussian pulse after quadratic spectral phase."""
    if not tau0 > 0:
        raise DomainError("tau0 must be > 0")
    return tau0 * math.sqrt(1 + (4 * LN2 * phi2 / tau0**2) ** 2)


def hole_duration(pulse: PulseSpec) -> float:
    """Stretched intensity FWHM of the temporal structure carved by the hole.

    The notch removes a Gaussian spectral component of amplitude FWHM equal
    to the hole width; its transform-limited intensity FWHM is
    ``4 sqrt(2) ln 2 hbar / hole_fwhm``.  Zero without a hole.
    """
    if not pulse.has_hole:
        return 0.0
    tau_hole = 4 * math.sqrt(2) * LN2 * HBAR / pulse.hole_fwhm
    return stretched_duration(pulse.chirp_spectral, tau_hole)


def pulse_timescale(pulse: PulseSpec) -> float:
    return max(stretched_duration(pulse.chirp_spectral, pulse.fwhm_tl),
               hole_duration(pulse))


def field_amplitude_for_area(theta: float, tau0: float, dipole_scale: float = 1.0) -> float:
    """Peak field amplitude whose unmasked Gaussian envelope has area ``theta``.

    The envelope is ``exp(-2 ln2 t^2 / tau0^2)``; the Rabi frequency is
    ``dipole_scale`` times the field, so with ``dipole_scale = 1`` the return
    value is the peak Rabi frequency ``theta / (tau0 sqrt(pi / (2 ln 2)))``.
    """
    if theta < 0:
        raise DomainError("theta must be >= 0")
    if not tau0 > 0:
        raise DomainError("tau0 must be > 0")
    if not dipole_scale > 0:
        raise DomainError("dipole_scale must be > 0")
    return theta / (tau0 * math.sqrt(math.pi / (2 * LN2))) / dipole_scale


@dataclass(frozen=True)
class SolverParams:
    """Fixed-step integrator settings; ``dt`` of None selects the default rule."""

    dt: Optional[float] = None
    store: bool = True

    def __post_init__(self):
        if self.dt is not None:
            _require(self.dt > 0, "dt must be > 0")
