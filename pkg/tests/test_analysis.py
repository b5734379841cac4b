import math

import numpy as np
import pytest

from qdarp.analysis import (
    adiabaticity_ratio,
    arp_threshold,
    bloch_export,
    dressed_energies,
    max_ratio,
)
from qdarp.core import HBAR, DomainError, EmitterConfig, PulseSpec
from qdarp.dynamics import occupation_vs_area, propagate
from qdarp.shaper import instantaneous_profile, synthesize

EM = EmitterConfig()


def profile(**kw):
    return instantaneous_profile(synthesize(PulseSpec(**kw), EM))


def test_gap_without_drive_is_detuning():
    t = np.linspace(-1, 1, 5)
    curve = dressed_energies((t, np.zeros(5), np.full(5, -2.0)))
    np.testing.assert_allclose(curve.e_plus - curve.e_minus, 2 * HBAR)


def test_gap_at_resonance_is_hbar_omega():
    t = np.linspace(-1, 1, 5)
    curve = dressed_energies((t, np.ones(5), np.zeros(5)))
    assert curve.min_gap == pytest.approx(0.6582119569, rel=1e-12)


def test_dressed_levels_are_symmetric():
    curve = dressed_energies(profile(area=5.0, chirp_spectral=0.15, hole_fwhm=2.1))
    ok = ~np.isnan(curve.e_plus)
    assert np.array_equal(curve.e_plus[ok], -curve.e_minus[ok])
    assert np.all(curve.e_plus[ok] >= 0)


def test_hole_narrows_the_anticrossing():
    plain = dressed_energies(profile(area=5.0, chirp_spectral=0.15))
    holed = dressed_energies(profile(area=5.0, chirp_spectral=0.15, hole_fwhm=2.1))
    assert holed.min_gap < plain.min_gap


def test_gap_minimum_is_the_smallest_defined_gap():
    curve = dressed_energies(profile(area=5.0, chirp_spectral=0.15))
    gap = curve.e_plus - curve.e_minus
    assert curve.min_gap == np.nanmin(gap)
    assert gap[np.searchsorted(curve.times, curve.gap_time)] == curve.min_gap
    # the chirped drive has two symmetric anticrossings away from t = 0
    mirror = np.interp(-curve.gap_time, curve.times, gap)
    assert mirror == pytest.approx(curve.min_gap, rel=1e-6)


def test_adiabaticity_zero_for_constant_drive():
    t = np.linspace(0, 1, 11)
    r = adiabaticity_ratio((t, np.full(11, 3.0), np.full(11, 1.0)))
    np.testing.assert_allclose(r, 0.0, atol=1e-15)


def test_adiabaticity_undefined_without_drive_or_detuning():
    t = np.linspace(0, 1, 4)
    r = adiabaticity_ratio((t, np.zeros(4), np.zeros(4)))
    assert np.all(np.isnan(r))


def test_adiabaticity_linear_sweep_closed_form():
    # constant Omega, Delta = beta t: ratio = Omega beta / (Omega^2 + beta^2 t^2)^(3/2)
    t = np.linspace(-2, 2, 401)
    omega, beta = 3.0, 5.0
    r = adiabaticity_ratio((t, np.full_like(t, omega), beta * t))
    expect = omega * beta / (omega**2 + (beta * t) ** 2) ** 1.5
    np.testing.assert_allclose(r, expect, rtol=1e-12)


def _peak(area):
    prof = profile(area=area, chirp_spectral=0.15)
    return max_ratio(adiabaticity_ratio(prof), prof.times)[0]


def test_adiabaticity_regimes():
    assert _peak(2.0) < 1
    assert _peak(0.2) > 1
    assert _peak(4.0) < _peak(2.0) / 2


def test_max_ratio_all_nan():
    peak, at = max_ratio(np.full(3, np.nan), np.arange(3.0))
    assert math.isnan(peak) and math.isnan(at)


def test_threshold_picks_start_of_final_plateau():
    areas = np.arange(1.0, 9.0)
    occ = np.array([0.2, 0.97, 0.5, 0.96, 0.99, 0.98, 0.99, 1.0])
    assert arp_threshold((areas, occ)) == 4.0
    assert arp_threshold((areas, occ), level=0.4) == 2.0
    assert arp_threshold((areas, np.ones(8))) == 1.0


def test_threshold_none_for_oscillating_curve():
    areas = np.linspace(0.1, 10, 100)
    assert arp_threshold((areas, np.sin(np.pi * areas / 2) ** 2)) is None


@pytest.mark.parametrize("areas,level", [([1.0, 3.0, 2.0], 0.95), ([1.0, 2.0, 3.0], 1.0),
                                         ([1.0, 2.0, 3.0], 0.0), ([1.0, 1.0, 2.0], 0.5)])
def test_threshold_rejects_bad_input(areas, level):
    with pytest.raises(DomainError):
        arp_threshold((areas, [0.0, 1.0, 1.0]), level=level)


def test_bloch_export_endpoints():
    traj = propagate(synthesize(PulseSpec(), EM), EM)
    points = bloch_export(traj)
    assert points.shape == (len(traj), 4)
    np.testing.assert_allclose(points[0, 1:], [0, 0, -1], atol=1e-12)
    np.testing.assert_allclose(points[-1, 1:], [0, 0, 1], atol=1e-7)
    np.testing.assert_array_equal(points[:, 0], traj.times)


def test_bloch_export_hole_pulse_returns_to_ground_state():
    traj = propagate(synthesize(PulseSpec(area=3.4, hole_fwhm=2.1), EM), EM)
    np.testing.assert_allclose(bloch_export(traj)[-1, 1:], [0, 0, -1], atol=1e-6)


def test_bloch_export_chirped_passage_ends_near_north_pole():
    traj = propagate(synthesize(PulseSpec(area=8.0, chirp_spectral=0.15, hole_fwhm=2.1), EM), EM)
    points = bloch_export(traj)
    assert points[-1, 3] > 0.9
    assert np.linalg.norm(points[:, 1:], axis=1).max() <= 1 + 1e-9


THRESHOLD_AREAS = np.round(np.arange(1, 121) * 0.1, 10)


def _threshold(hole):
    curve = occupation_vs_area(PulseSpec(chirp_spectral=0.15, hole_fwhm=hole), EM,
                               THRESHOLD_AREAS)
    return arp_threshold(curve, level=0.95)


@pytest.mark.xfail(strict=True, reason="simulated threshold is 1.1 pi at level 0.95; the "
                   "curve already saturates well below 2 pi for this stretch")
def test_threshold_unfiltered_near_two_pi():
    assert _threshold(0.0) == pytest.approx(2.0, abs=0.5)


@pytest.mark.xfail(strict=True, reason="simulated threshold is 5.0 pi at level 0.95")
def test_threshold_hole_pulse_near_seven_pi():
    assert _threshold(2.1) == pytest.approx(7.0, abs=1.0)


def test_threshold_hole_pulse_above_unfiltered():
    assert _threshold(2.1) > _threshold(0.0) + 2
