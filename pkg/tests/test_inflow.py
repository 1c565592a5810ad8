import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floathil.analysis import welch
from floathil.inflow import (Bump, SpectrumTarget, WakeProfile, advect, advection_delay, calibrate_deficit,
                             expected_thrust, make_wake_spectrum, rotor_average, solve_mean_inflow,
                             synthesize_turbulence, von_karman_spectrum, wake_mean, wake_ti, white_spectrum)
from floathil.plant import Rotor

D = 178.4
U = 12.3
PROFILE = WakeProfile()


@given(st.floats(3.5, 5.75), st.floats(0, 600))
def test_wake_mean_symmetric_and_bounded(x, y):
    a, b = wake_mean(x, y, U, PROFILE), wake_mean(x, -y, U, PROFILE)
    assert a == b
    assert U * (1 - PROFILE.deficit_center) - 1e-9 <= a <= U + 1e-12


@pytest.mark.parametrize("x", [3.5, 4.3, 5.75])
def test_free_stream_recovered_far_out(x):
    assert wake_mean(x, 3 * D, U, PROFILE) == pytest.approx(U, rel=1e-3)


def test_double_gaussian_near_top_hat_far():
    # off-axis maxima at 3.5D, centre maximum at the far end
    near = wake_mean(3.5, np.array([0.0, PROFILE.gaussian_offset]), U, PROFILE)
    far = wake_mean(5.75, np.array([0.0, PROFILE.gaussian_offset]), U, PROFILE)
    assert near[1] < near[0]
    assert far[0] <= far[1]


def test_outside_range_warns():
    with pytest.warns(RuntimeWarning):
        a = wake_mean(8.0, 0.0, U, PROFILE)
    assert a == wake_mean(5.75, 0.0, U, PROFILE)


def test_ti_values():
    assert float(wake_ti(4.3, 0.0, PROFILE)) == pytest.approx(7.0, abs=1e-12)
    assert float(wake_ti(4.3, PROFILE.gaussian_offset, PROFILE)) == pytest.approx(14.0, abs=1e-12)
    assert float(wake_ti(4.3, 5 * D, PROFILE)) == pytest.approx(2.0, abs=1e-6)
    ys = np.linspace(0, 3 * D, 400)
    np.testing.assert_array_equal(wake_ti(4.3, ys, PROFILE), wake_ti(4.3, -ys, PROFILE))
    assert np.max(wake_ti(4.3, ys, PROFILE)) <= 14.0 + 1e-12


def test_profile_validation():
    with pytest.raises(ValueError):
        WakeProfile(deficit_center=1.5)
    with pytest.raises(ValueError):
        WakeProfile(ti_center=20.0)


def test_calibrated_rotor_average_and_thrust(wt2):
    rotor = Rotor(wt2)
    u2 = solve_mean_inflow(rotor.steady_thrust, 627e3)
    prof = calibrate_deficit(PROFILE, 5.75, U, D, u2)
    assert rotor_average(5.75, U, prof, D) == pytest.approx(u2, rel=1e-10)
    assert rotor.steady_thrust(u2) == pytest.approx(627e3, rel=0.02)
    # the quasi-steady estimate of the rotor-averaged wake speed is about 7.2 m/s
    assert u2 == pytest.approx(7.2, rel=0.05)


def test_expected_thrust_closure(wt2):
    rotor = Rotor(wt2)
    u2 = solve_mean_inflow(rotor.steady_thrust, 627e3, 0.11)
    assert expected_thrust(rotor.steady_thrust, u2, 0.11 * u2) == pytest.approx(627e3, rel=1e-9)
    assert expected_thrust(rotor.steady_thrust, u2, 0.0) == rotor.steady_thrust(u2)


def test_white_synthesis_variance():
    s = synthesize_turbulence(white_spectrum(0.25, 0.5), 2 ** 18, 1.0, seed=1)
    assert np.var(s) == pytest.approx(0.25, rel=0.02)
    assert abs(np.mean(s)) < 1e-12


def test_zero_target_gives_zeros():
    target = SpectrumTarget((0.0, 1.0), (0.0, 0.0), 1.0)
    assert np.all(synthesize_turbulence(target, 100.0, 0.5, seed=0) == 0.0)


def test_synthesis_deterministic_per_seed():
    t = von_karman_spectrum(0.02, U, 15.0, 0.5)
    a = synthesize_turbulence(t, 1000.0, 1.0, 3)
    assert np.array_equal(a, synthesize_turbulence(t, 1000.0, 1.0, 3))
    assert not np.array_equal(a, synthesize_turbulence(t, 1000.0, 1.0, 4))


def test_synthesis_beyond_nyquist_rejected():
    with pytest.raises(ValueError):
        synthesize_turbulence(white_spectrum(1.0, 2.0), 100.0, 1.0, 0)


def test_bump_round_trip_through_welch():
    base = white_spectrum(1.0, 0.5)
    target = SpectrumTarget(base.frequencies, base.values, base.f_max, (Bump(0.005, 0.0015, 10.0),))
    s = synthesize_turbulence(target, 2 ** 18, 1.0, seed=7)
    spec = welch(s, 1.0)
    mask = np.abs(spec.frequencies - 0.005) <= 0.0003
    assert np.mean(spec.psd[mask]) / base.psd(0.005) == pytest.approx(10.0, rel=0.2)


def test_wake_spectrum_unit_gains_keeps_base():
    base = von_karman_spectrum(0.11, 7.0, 1.5, 0.5 / 0.06)
    same = make_wake_spectrum(base, 0.005, 0.04, (1.0, 1.0))
    f = np.geomspace(1e-4, 8.0, 50)
    np.testing.assert_allclose(same.psd(f), base.psd(f), rtol=1e-12)


def test_wake_spectrum_gains_and_variance():
    dt = 0.06
    base = von_karman_spectrum(0.11, 7.0, 1.5, 0.5 / dt)
    wake = make_wake_spectrum(base, 0.005, 0.04, (5.0, 3.0))
    assert wake.variance() == pytest.approx((0.11 * 7.0) ** 2, rel=0.01)
    assert 4.0 <= wake.psd(0.005) / base.psd(0.005) <= 6.0
    s_w = synthesize_turbulence(wake, 2 ** 18 * dt, dt, seed=1)
    s_b = synthesize_turbulence(base, 2 ** 18 * dt, dt, seed=2)
    pw, pb = welch(s_w, dt), welch(s_b, dt)
    ratio = pw.band_mean(0.005, 0.1) / pb.band_mean(0.005, 0.1)
    assert 4.0 <= ratio <= 6.0


def test_gains_below_one_rejected():
    with pytest.raises(ValueError):
        make_wake_spectrum(white_spectrum(1.0, 1.0), 0.005, 0.04, (0.5, 1.0))


def test_von_karman_variance():
    t = von_karman_spectrum(0.02, U, 15.0, 5.0)
    assert t.variance() == pytest.approx((0.02 * U) ** 2, rel=1e-9)
    f = np.geomspace(1e-3, 5.0, 100)
    assert np.all(np.diff(t.psd(f)) <= 0)


def _band_errors(target, dt, n, seed, bands):
    s = synthesize_turbulence(target, n * dt, dt, seed)
    spec = welch(s, dt)
    out = []
    for lo, hi in bands:
        m = (spec.frequencies >= lo) & (spec.frequencies < hi)
        est = np.sum(spec.psd[m]) * spec.resolution
        ref = np.sum(target.psd(spec.frequencies[m])) * spec.resolution
        out.append(est / ref - 1.0)
    return np.array(out), np.var(s)


BANDS = [(0.002, 0.01), (0.01, 0.05), (0.05, 0.2), (0.2, 1.0), (1.0, 5.0)]


def test_synthesis_matches_target_per_band():
    t = von_karman_spectrum(0.11, 7.0, 1.5, 0.5 / 0.06)
    err, var = _band_errors(t, 0.06, 2 ** 17, 3, BANDS)
    assert np.all(np.abs(err) < 0.2)
    assert var == pytest.approx(t.variance(), rel=0.02)


def test_synthesis_ensemble_matches_target():
    t = von_karman_spectrum(0.11, 7.0, 1.5, 0.5 / 0.06)
    errs = np.mean([_band_errors(t, 0.06, 2 ** 16, s, BANDS)[0] for s in range(10)], axis=0)
    assert np.all(np.abs(errs) < 0.05)


def test_advection_delay_example():
    assert advection_delay(5.75 * D, 9.75) == pytest.approx(105.2, abs=0.05)


def test_advect_shifts_series():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(5000)
    dt = 0.6
    y = advect(x, 5.75 * D, 9.75, dt)
    lag = int(round(105.2 / dt))
    np.testing.assert_array_equal(y[lag:], x[:-lag])
    assert np.all(y[:lag] == x.mean())
    xc = np.correlate(y - y.mean(), x - x.mean(), "full")
    assert np.argmax(xc) - (len(x) - 1) == lag


def test_advect_infinite_speed_is_identity():
    x = np.arange(10.0)
    np.testing.assert_array_equal(advect(x, 100.0, math.inf, 1.0), x)


def test_advect_delay_too_long():
    with pytest.raises(ValueError):
        advect(np.arange(10.0), 1000.0, 1.0, 1.0)
