"""Density-matrix propagation of the driven two-level emitter.

The state is propagated in the frame rotating at the transition frequency,

    H(t) / hbar = 1/2 [[0, Omega*(t)], [Omega(t), 0]]      basis (|0>, |1>)

so detuning and chirp enter only through the phase of ``Omega``.  Phonon
coupling is modelled as relaxation between the instantaneous dressed states
(eigenstates of the Hamiltonian in the frame following the laser phase) with
weak-coupling golden-rule rates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numba
import numpy as np

from .core import (
    HBAR,
    K_B,
    DomainError,
    EmitterConfig,
    PhononSpec,
    PulseSpec,
    SimGrid,
    SolverParams,
    StepSizeError,
)
from .shaper import SampledField, _profile, synthesize

# Spectral amplitude (relative to peak) that still counts towards the drive bandwidth.
_BAND_FLOOR = 1e-3


def phonon_rates(omega_abs, delta_inst, phonon: PhononSpec):
    """Downward, upward and pure-dephasing rates between dressed states (ps^-1).

    ``Lambda = sqrt(Omega^2 + Delta^2)``, ``J(w) = A w^3 exp(-w^2/wc^2)`` and

        gamma_down = pi/2 J(Lambda) (Omega/Lambda)^2 (n + 1)
        gamma_up   = pi/2 J(Lambda) (Omega/Lambda)^2 n

    with ``n`` the Bose occupation at ``hbar Lambda``.  Pure dephasing is not
    part of the model and is returned as zeros.
    """
    if phonon.temperature < 0:
        raise DomainError("temperature must be >= 0")
    omega = np.abs(np.asarray(omega_abs, dtype=float))
    delta = np.asarray(delta_inst, dtype=float)
    omega, delta = np.broadcast_arrays(omega, delta)
    lam = np.hypot(omega, delta)
    nonzero = lam > 0

    base = np.zeros(lam.shape)
    occ = np.zeros(lam.shape)
    lz = lam[nonzero]
    j = phonon.coupling * lz**3 * np.exp(-(lz / phonon.cutoff) ** 2)
    base[nonzero] = 0.5 * np.pi * j * (omega[nonzero] / lz) ** 2
    if phonon.temperature > 0:
        with np.errstate(over="ignore"):
            occ[nonzero] = 1.0 / np.expm1(HBAR * lz / (K_B * phonon.temperature))

    gamma_down = base * (occ + 1.0)
    gamma_up = base * occ
    gamma_phi = np.zeros(lam.shape)
    if gamma_down.ndim == 0:
        return float(gamma_down), float(gamma_up), float(gamma_phi)
    return gamma_down, gamma_up, gamma_phi


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    rho: np.ndarray  # (N, 2, 2), basis (|0>, |1>)
    bloch: np.ndarray  # (N, 3)
    occupation: np.ndarray
    dressed_energies: np.ndarray  # (N, 2): E+, E- in meV; NaN in profile gaps
    adiabaticity_ratio: np.ndarray
    step: float

    @property
    def final_occupation(self) -> float:
        return float(self.occupation[-1])

    def __len__(self):
        return self.times.size


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """``(sx, sy, sz)`` with ``sz = rho11 - rho00`` (ground state at the south pole)."""
    rho10 = rho[..., 1, 0]
    return np.stack([2 * rho10.real, -2 * rho10.imag,
                     (rho[..., 1, 1] - rho[..., 0, 0]).real], axis=-1)


@numba.njit(cache=True)
def _rhs(r, om, gd, gu, m0, m1, p0, p1, out):
    # coherent part: -i [H, rho] with H = 1/2 [[0, om*], [om, 0]]
    h01 = 0.5 * np.conj(om)
    h10 = 0.5 * om
    out[0, 0] = -1j * (h01 * r[1, 0] - r[0, 1] * h10)
    out[0, 1] = -1j * (h01 * r[1, 1] - r[0, 0] * h01)
    out[1, 0] = -1j * (h10 * r[0, 0] - r[1, 1] * h10)
    out[1, 1] = -1j * (h10 * r[0, 1] - r[1, 0] * h01)
    if gd == 0.0 and gu == 0.0:
        return
    # dressed states |+> = (p0, p1), |-> = (m0, m1); L_down = |-><+|
    pp = np.empty((2, 2), dtype=np.complex128)
    mm = np.empty((2, 2), dtype=np.complex128)
    pv = (p0, p1)
    mv = (m0, m1)
    for a in range(2):
        for b in range(2):
            pp[a, b] = pv[a] * np.conj(pv[b])
            mm[a, b] = mv[a] * np.conj(mv[b])
    pop_plus = 0.0 + 0.0j
    pop_minus = 0.0 + 0.0j
    for a in range(2):
        for b in range(2):
            pop_plus += np.conj(pv[a]) * r[a, b] * pv[b]
            pop_minus += np.conj(mv[a]) * r[a, b] * mv[b]
    for a in range(2):
        for b in range(2):
            acomm_p = 0.0 + 0.0j
            acomm_m = 0.0 + 0.0j
            for k in range(2):
                acomm_p += pp[a, k] * r[k, b] + r[a, k] * pp[k, b]
                acomm_m += mm[a, k] * r[k, b] + r[a, k] * mm[k, b]
            out[a, b] += gd * (pop_plus * mm[a, b] - 0.5 * acomm_p)
            out[a, b] += gu * (pop_minus * pp[a, b] - 0.5 * acomm_m)


@numba.njit(cache=True)
def _rk4(rho0, omega, gd, gu, cos_h, sin_h, phase, h, store):
    n_steps = (omega.size - 1) // 2
    n_out = n_steps + 1 if store else 1
    history = np.empty((n_out, 2, 2), dtype=np.complex128)
    r = rho0.copy()
    if store:
        history[0] = r
    k1 = np.empty((2, 2), dtype=np.complex128)
    k2 = np.empty((2, 2), dtype=np.complex128)
    k3 = np.empty((2, 2), dtype=np.complex128)
    k4 = np.empty((2, 2), dtype=np.complex128)
    tmp = np.empty((2, 2), dtype=np.complex128)
    for step in range(n_steps):
        i0 = 2 * step
        for stage in range(4):
            idx = i0 + (stage + 1) // 2
            c = cos_h[idx]
            s = sin_h[idx]
            ph = phase[idx]
            m0 = c + 0.0j
            m1 = -s * ph
            p0 = s + 0.0j
            p1 = c * ph
            if stage == 0:
                _rhs(r, omega[idx], gd[idx], gu[idx], m0, m1, p0, p1, k1)
            elif stage == 1:
                for a in range(2):
                    for b in range(2):
                        tmp[a, b] = r[a, b] + 0.5 * h * k1[a, b]
                _rhs(tmp, omega[idx], gd[idx], gu[idx], m0, m1, p0, p1, k2)
            elif stage == 2:
                for a in range(2):
                    for b in range(2):
                        tmp[a, b] = r[a, b] + 0.5 * h * k2[a, b]
                _rhs(tmp, omega[idx], gd[idx], gu[idx], m0, m1, p0, p1, k3)
            else:
                for a in range(2):
                    for b in range(2):
                        tmp[a, b] = r[a, b] + h * k3[a, b]
                _rhs(tmp, omega[idx], gd[idx], gu[idx], m0, m1, p0, p1, k4)
        for a in range(2):
            for b in range(2):
                r[a, b] += h / 6.0 * (k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b])
        if store:
            history[step + 1] = r
    if not store:
        history[0] = r
    return history


def max_generalized_rabi(field: SampledField) -> float:
    """Upper bound on ``sqrt(|Omega|^2 + Delta^2)`` over the drive (ps^-1).

    In the emitter frame the envelope oscillates no faster than the drive
    bandwidth, so the detuning part is bounded by the largest frequency offset
    carrying spectral amplitude above ``_BAND_FLOOR`` of the peak.
    """
    spec = np.abs(field.spectrum)
    peak = spec.max()
    if peak == 0:
        return 0.0
    band = np.abs(field.frequencies[spec >= _BAND_FLOOR * peak]).max()
    return float(math.hypot(np.abs(field.time_envelope).max(), band))


def default_step(field: SampledField) -> float:
    """``min(tau0 / 200, 2 pi / (50 Lambda_max))``."""
    lam = max_generalized_rabi(field)
    tau0 = field.fwhm_tl if field.fwhm_tl is not None else math.inf
    limits = [tau0 / 200]
    if lam > 0:
        limits.append(2 * math.pi / (50 * lam))
    dt = min(limits)
    if not math.isfinite(dt):
        dt = field.grid.time_step / 2
    return dt


def _subdivision(field: SampledField, solver: SolverParams) -> int:
    lam = max_generalized_rabi(field)
    if solver.dt is not None and lam > 0:
        limit = 2 * math.pi / (20 * lam)
        if solver.dt > limit:
            raise StepSizeError(
                f"dt = {solver.dt:.4g} ps exceeds the stability limit; "
                f"use dt <= {limit:.4g} ps", required_dt=limit)
    target = solver.dt if solver.dt is not None else default_step(field)
    # RK4 step spans two fine samples so the midpoint drive is sampled exactly
    factor = 1
    while 2 * field.grid.time_step / factor > target * (1 + 1e-12):
        factor *= 2
    return factor


def _check_initial(rho0: np.ndarray) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise DomainError("initial state must be a 2x2 density matrix")
    if abs(np.trace(rho0) - 1) > 1e-12:
        raise DomainError("initial state is not normalized (trace != 1)")
    if not np.allclose(rho0, rho0.conj().T, atol=1e-12):
        raise DomainError("initial state is not Hermitian")
    if np.linalg.eigvalsh(rho0).min() < -1e-12:
        raise DomainError("initial state is not positive semidefinite")
    return rho0


class _Drive(NamedTuple):
    times: np.ndarray
    omega: np.ndarray
    delta: np.ndarray
    valid: np.ndarray
    gd: np.ndarray
    gu: np.ndarray
    cos_h: np.ndarray
    sin_h: np.ndarray
    phase: np.ndarray
    step: float


def _prepare(field: SampledField, emitter: EmitterConfig, solver: SolverParams) -> _Drive:
    factor = _subdivision(field, solver)
    times, omega, domega = field.upsample(factor)
    step = 2 * field.grid.time_step / factor
    n = omega.size
    zeros = np.zeros(n)
    phonon = emitter.phonon
    if not np.any(omega):
        valid = np.zeros(n, dtype=bool)
        delta = np.full(n, np.nan)
    else:
        _, _, delta, valid = _profile(times, omega, domega)

    if phonon is None or phonon.coupling == 0 or not valid.any():
        return _Drive(times, omega, delta, valid, zeros, zeros, np.ones(n), zeros,
                      np.ones(n, dtype=complex), step)

    mag = np.abs(omega)
    d = np.where(valid, delta, 0.0)
    m = np.where(valid, mag, 0.0)
    gd, gu, _ = phonon_rates(m, d, phonon)
    lam = np.hypot(m, d)
    # mixing angle: cos(vartheta) = Delta / Lambda, sin(vartheta) = |Omega| / Lambda
    angle = np.arctan2(m, d)
    cos_h = np.cos(0.5 * angle)
    sin_h = np.sin(0.5 * angle)
    phase = np.ones(n, dtype=complex)
    phase[valid] = omega[valid] / mag[valid]
    gd = np.where(lam > 0, gd, 0.0)
    gu = np.where(lam > 0, gu, 0.0)
    return _Drive(times, omega, delta, valid, gd, gu, cos_h, sin_h, phase, step)


def _run(drive: _Drive, rho0: np.ndarray, store: bool) -> np.ndarray:
    return _rk4(rho0, drive.omega, drive.gd, drive.gu, drive.cos_h, drive.sin_h,
                drive.phase, drive.step, store)


GROUND = np.array([[1, 0], [0, 0]], dtype=complex)


def propagate(field: SampledField, emitter: EmitterConfig,
              solver: Optional[SolverParams] = None,
              initial: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate the master equation over the whole field window.

    Fixed-step classical RK4; the step is the largest power-of-two subdivision
    of the field grid not exceeding ``solver.dt`` (or the default rule).  The
    emitter starts in the ground state unless ``initial`` is given.
    """
    from .analysis import adiabaticity_ratio

    solver = solver or SolverParams()
    rho0 = _check_initial(GROUND if initial is None else initial)
    drive = _prepare(field, emitter, solver)
    history = _run(drive, rho0, store=True)

    idx = np.arange(history.shape[0]) * 2
    times = drive.times[idx]
    mag = np.abs(drive.omega[idx])
    delta = drive.delta[idx]
    gap = np.where(drive.valid[idx], np.hypot(mag, delta), np.nan)
    energies = np.stack([0.5 * HBAR * gap, -0.5 * HBAR * gap], axis=-1)
    ratio = adiabaticity_ratio((times, mag, delta))
    return Trajectory(
        times=times,
        rho=history,
        bloch=bloch_vector(history),
        occupation=history[:, 1, 1].real.copy(),
        dressed_energies=energies,
        adiabaticity_ratio=ratio,
        step=drive.step,
    )


def final_state(field: SampledField, emitter: EmitterConfig,
                solver: Optional[SolverParams] = None) -> np.ndarray:
    """Density matrix after the pulse, without storing the trajectory."""
    drive = _prepare(field, emitter, solver or SolverParams())
    return _run(drive, GROUND, store=False)[0]


def final_occupation(field: SampledField, emitter: EmitterConfig,
                     solver: Optional[SolverParams] = None) -> float:
    return float(final_state(field, emitter, solver)[1, 1].real)


class AreaCurve(NamedTuple):
    areas: np.ndarray  # units of pi
    occupation: np.ndarray
    occupation_phonons: Optional[np.ndarray] = None


def occupation_vs_area(pulse: PulseSpec, emitter: EmitterConfig, areas: Sequence[float],
                       grid: Optional[SimGrid] = None,
                       solver: Optional[SolverParams] = None,
                       with_phonons: bool = False) -> AreaCurve:
    """Final occupation for each pulse area (units of pi) at fixed shaping.

    ``occupation`` is computed with ``emitter`` as given; with
    ``with_phonons`` a second curve is computed with the emitter's phonon bath
    (or the default bath if it has none), and the first without any bath.
    """
    areas = np.asarray(areas, dtype=float)
    if np.any(areas < 0):
        raise DomainError("areas must be non-negative")
    if np.any(np.diff(areas) < 0):
        raise DomainError("areas must be sorted")
    grid = grid or SimGrid.for_pulse(pulse)
    if with_phonons:
        bath = emitter.phonon or PhononSpec()
        plain, dressed = emitter.with_(phonon=None), emitter.with_(phonon=bath)
    else:
        plain, dressed = emitter, None

    occ = np.empty(areas.size)
    occ_ph = np.empty(areas.size) if dressed is not None else None
    for i, area in enumerate(areas):
        field = synthesize(pulse.with_(area=float(area)), plain, grid)
        occ[i] = final_occupation(field, plain, solver)
        if dressed is not None:
            occ_ph[i] = final_occupation(field, dressed, solver)
    return AreaCurve(areas, occ, occ_ph)
