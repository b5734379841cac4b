"""Spectral synthesis of the shaped drive.

Fields live in the frame rotating at the emitter transition ``omega_0``.  A
spectral component at absolute frequency ``omega_0 + nu`` contributes
``exp(-i nu t)`` to the complex Rabi envelope, and the transform pair is

    spectrum(nu) = sum_k envelope(t_k) exp(+i nu t_k) dt
    envelope(t)  = (1 / 2pi) sum_j spectrum(nu_j) exp(-i nu_j t) dnu

With this choice a positive spectral chirp sweeps the instantaneous laser
frequency upward in time, and the instantaneous detuning
``omega_0 - omega_laser(t)`` equals the time derivative of the envelope phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .core import (
    HBAR,
    LN2,
    DomainError,
    EmitterConfig,
    GridSizingError,
    PulseSpec,
    SimGrid,
    field_amplitude_for_area,
)

#: Relative amplitude below which the envelope phase is treated as undefined.
AMPLITUDE_FLOOR = 1e-6


def to_spectrum(envelope: np.ndarray, dt: float) -> np.ndarray:
    n = envelope.shape[-1]
    return dt * n * np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(envelope)))


def to_time(spectrum: np.ndarray, dt: float) -> np.ndarray:
    n = spectrum.shape[-1]
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(spectrum))) / (n * dt)


@dataclass(frozen=True)
class MaskSpec:
    """Amplitude notch and quadratic phase, both centred on the emitter line.

    ``A(nu) = 1 - depth * exp(-ln2 nu^2 / delta^2)`` with ``2 delta`` the hole
    FWHM, and ``Phi(nu) = chirp_spectral / 2 * nu^2``; ``nu`` is the angular
    frequency offset from the transition.
    """

    hole_fwhm: float = 0.0
    hole_depth: float = 1.0
    chirp_spectral: float = 0.0

    def __post_init__(self):
        if self.hole_fwhm < 0:
            raise DomainError("hole_fwhm must be >= 0")
        if not 0.0 <= self.hole_depth <= 1.0:
            raise DomainError("hole_depth must lie in [0, 1]")

    @classmethod
    def from_pulse(cls, pulse: PulseSpec) -> "MaskSpec":
        return cls(pulse.hole_fwhm, pulse.hole_depth, pulse.chirp_spectral)

    @property
    def hole_half_width(self) -> float:
        """``delta`` as an angular frequency (ps^-1)."""
        return 0.5 * self.hole_fwhm / HBAR

    @property
    def is_identity(self) -> bool:
        return (self.hole_fwhm == 0 or self.hole_depth == 0) and self.chirp_spectral == 0

    def amplitude(self, nu: np.ndarray) -> np.ndarray:
        nu = np.asarray(nu, dtype=float)
        if self.hole_fwhm == 0 or self.hole_depth == 0:
            return np.ones_like(nu)
        delta = self.hole_half_width
        return 1.0 - self.hole_depth * np.exp(-LN2 * nu**2 / delta**2)

    def phase(self, nu: np.ndarray) -> np.ndarray:
        nu = np.asarray(nu, dtype=float)
        return 0.5 * self.chirp_spectral * nu**2

    def __call__(self, nu: np.ndarray) -> np.ndarray:
        return self.amplitude(nu) * np.exp(1j * self.phase(nu))


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex Rabi envelope (ps^-1) and its spectrum on a shared grid.

    ``center_frequency_offset`` is ``omega_l - omega_0`` (ps^-1), the laser
    carrier offset already contained in the envelope phase.
    """

    grid: SimGrid
    time_envelope: np.ndarray
    spectrum: np.ndarray
    center_frequency_offset: float = 0.0
    fwhm_tl: Optional[float] = None
    transition_energy: Optional[float] = None

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()

    @property
    def frequencies(self) -> np.ndarray:
        return self.grid.frequencies()

    @property
    def static_detuning(self) -> float:
        """``omega_0 - omega_l`` in ps^-1."""
        return -self.center_frequency_offset

    def energy(self) -> float:
        return float(np.sum(np.abs(self.time_envelope) ** 2) * self.grid.time_step)

    def with_spectrum(self, spectrum: np.ndarray) -> "SampledField":
        envelope = to_time(spectrum, self.grid.time_step)
        return replace(self, spectrum=spectrum, time_envelope=envelope)

    def upsample(self, factor: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Band-limited interpolation onto a grid ``factor`` times finer.

        Returns ``(times, envelope, d envelope / dt)``; the derivative is taken
        spectrally, so it is exact for the sampled band.
        """
        if factor < 1 or factor & (factor - 1):
            raise DomainError("upsampling factor must be a power of two")
        n = self.grid.n_samples
        m = n * factor
        dt = self.grid.time_step / factor
        padded = np.zeros(m, dtype=complex)
        lo = m // 2 - n // 2
        padded[lo:lo + n] = self.spectrum
        nu = (np.arange(m) - m // 2) * self.grid.frequency_step
        times = (np.arange(m) - m // 2) * dt
        return times, to_time(padded, dt), to_time(-1j * nu * padded, dt)


def synthesize(pulse: PulseSpec, emitter: EmitterConfig,
               grid: Optional[SimGrid] = None) -> SampledField:
    """Build the shaped drive for ``pulse`` acting on ``emitter``.

    The unmasked spectrum is the analytic transform of a Gaussian envelope of
    intensity FWHM ``pulse.fwhm_tl`` whose time integral is the requested area;
    the hole/chirp mask is then applied at the emitter frequency.
    """
    if grid is None:
        grid = SimGrid.for_pulse(pulse)
    grid.check(pulse)

    tau0 = pulse.fwhm_tl
    theta = pulse.area * math.pi
    peak = emitter.dipole_scale * field_amplitude_for_area(theta, tau0, emitter.dipole_scale)
    carrier = -pulse.center_detuning / HBAR
    if abs(carrier) + 3 * 4 * LN2 / tau0 > 0.5 * grid.n_samples * grid.frequency_step:
        raise GridSizingError("laser spectrum extends past the frequency window")

    nu = grid.frequencies()
    width = tau0 * math.sqrt(math.pi / (2 * LN2))
    spectrum = (peak * width) * np.exp(-((nu - carrier) ** 2) * tau0**2 / (8 * LN2))
    spectrum = spectrum.astype(complex)

    field = SampledField(
        grid=grid,
        time_envelope=to_time(spectrum, grid.time_step),
        spectrum=spectrum,
        center_frequency_offset=carrier,
        fwhm_tl=tau0,
        transition_energy=emitter.transition_energy,
    )
    mask = MaskSpec.from_pulse(pulse)
    if mask.is_identity:
        return field
    return apply_mask(field, mask)


def apply_mask(field: SampledField, mask: MaskSpec) -> SampledField:
    if mask.is_identity:
        return field
    nu = field.frequencies
    return field.with_spectrum(field.spectrum * mask(nu))


class InstantaneousProfile(NamedTuple):
    times: np.ndarray
    omega_abs: np.ndarray
    delta_inst: np.ndarray  # NaN where the envelope is below the amplitude floor
    valid: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return ~self.valid


def _profile(times, envelope, derivative) -> InstantaneousProfile:
    magnitude = np.abs(envelope)
    peak = magnitude.max() if magnitude.size else 0.0
    if peak == 0:
        raise DomainError("field has no energy")
    valid = magnitude >= AMPLITUDE_FLOOR * peak
    delta = np.full(magnitude.shape, np.nan)
    delta[valid] = (np.imag(np.conj(envelope[valid]) * derivative[valid])
                    / magnitude[valid] ** 2)
    return InstantaneousProfile(times, magnitude, delta, valid)


def instantaneous_profile(field: SampledField, upsample: int = 1) -> InstantaneousProfile:
    """``|Omega(t)|`` and the instantaneous detuning ``Delta(t)`` in ps^-1.

    ``Delta(t) = d arg(Omega) / dt = Im(Omega* dOmega/dt) / |Omega|^2``, which
    is ``Delta_0 - 2 alpha t`` for a linearly chirped Gaussian.  Samples with
    ``|Omega|`` below ``AMPLITUDE_FLOOR`` times the peak are flagged invalid and
    carry NaN detuning.
    """
    times, envelope, derivative = field.upsample(upsample)
    return _profile(times, envelope, derivative)


def autocorrelation(field: SampledField) -> tuple[np.ndarray, np.ndarray]:
    """Normalised intensity autocorrelation ``G(tau)``, symmetric about 0."""
    intensity = np.abs(field.time_envelope) ** 2
    n = intensity.size
    if not intensity.any():
        raise DomainError("field has no energy")
    spec = np.fft.rfft(intensity, 2 * n)
    corr = np.fft.irfft(spec * np.conj(spec), 2 * n)
    g = np.concatenate([corr[n + 1:], corr[:n]])  # lags -(n-1) .. n-1
    g = 0.5 * (g + g[::-1])
    g /= g[n - 1]
    delays = (np.arange(2 * n - 1) - (n - 1)) * field.grid.time_step
    return delays, g


def effective_areas(field: SampledField) -> tuple[float, float]:
    """``(integral |Omega| dt, |integral Omega dt|)``.

    The coherent area equals the magnitude of the spectrum at the transition.
    """
    dt = field.grid.time_step
    magnitude_area = float(np.sum(np.abs(field.time_envelope)) * dt)
    coherent_area = float(abs(np.sum(field.time_envelope) * dt))
    return magnitude_area, coherent_area


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum of a single-peaked curve, linearly interpolated."""
    y = np.asarray(y, dtype=float)
    half = 0.5 * y.max()
    above = np.nonzero(y >= half)[0]
    i, j = above[0], above[-1]
    if i == 0 or j == y.size - 1:
        raise DomainError("curve does not fall below half maximum inside the window")
    left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1])
    right = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j])
    return float(right - left)
