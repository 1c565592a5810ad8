import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from floathil.compensation import (CompensationModel, IdentificationError, NacelleLoadRegressor,
                                   RigMotionRecord, StreamingLowpass, entry_errors, identify,
                                   log_sweep, low_frequency_group_delay, lowpass, nacelle_load_model,
                                   reconstruct)
from floathil.dynamics import GenForce
from floathil.plant import LoadCell, RigState
from floathil.scenarios import add_load_noise, identification_sweeps

H = 124.1
IDENT = {"band": [0.5, 3.0], "surge_amplitude": 12.0, "pitch_amplitude_deg": 2.0,
         "surge_duration": 3000.0, "pitch_duration": 900.0}


@pytest.fixture(scope="module")
def sweeps(truth, farm):
    return identification_sweeps(truth, farm.rig_bandwidth[0], farm.dt, IDENT, 0.005, 0.04)


def test_nacelle_model_values(truth):
    m = 3.31 * 150 ** 3
    np.testing.assert_allclose(truth.M_n, -m * np.array([[1, H], [H, H * H]]), rtol=1e-12)
    np.testing.assert_allclose(truth.K_n, m * 9.81 / 24 * np.array([[0, 1], [0, H]]), rtol=1e-12)


def test_reconstruct_cancels_inertia(truth):
    q, a = (0.3, 0.01), (0.02, -0.001)
    f = truth.load(q, a)
    out = reconstruct(GenForce(*f), q, a, truth)
    assert out.fx == pytest.approx(0.0, abs=1e-6 * abs(f[0]))
    assert out.my == pytest.approx(0.0, abs=1e-6 * abs(f[1]))


def test_reconstruct_without_motion(truth):
    t = 1.841e6
    assert reconstruct(GenForce(t, t * H), (0, 0), (0, 0), truth) == GenForce(t, t * H)


def test_reconstruct_recovers_injected_aero(truth):
    t = np.arange(0, 600, 0.06)
    q = np.column_stack([2 * np.sin(0.03 * t), 0.01 * np.sin(0.25 * t)])
    a = np.column_stack([-2 * 0.03 ** 2 * np.sin(0.03 * t), -0.01 * 0.25 ** 2 * np.sin(0.25 * t)])
    aero = np.column_stack([1.8e6 + 5e4 * np.sin(0.2 * t), (1.8e6 + 5e4 * np.sin(0.2 * t)) * H])
    cell = LoadCell(truth)
    rec = np.array([reconstruct(cell.measure(GenForce(*fa), RigState(tuple(qq), (0, 0), tuple(aa))),
                                qq, aa, truth).as_array() for fa, qq, aa in zip(aero, q, a)])
    err = np.sqrt(np.mean((rec - aero) ** 2, axis=0)) / np.sqrt(np.mean(aero ** 2, axis=0))
    assert np.all(err < 5e-3)


def test_noise_propagation_bound(truth):
    noise = 0.01 * 1.841e6
    cell = LoadCell(truth, (noise, noise * H), seed=3)
    n = 4000
    rng = np.random.default_rng(0)
    q, a = rng.normal(size=(n, 2)) * (1, 0.01), rng.normal(size=(n, 2)) * (0.01, 1e-4)
    nz = cell.noise_block(n)
    rec = np.array([reconstruct(cell.measure(GenForce(1.841e6, 1.841e6 * H),
                                             RigState(tuple(qq), (0, 0), tuple(aa)), z), qq, aa,
                                truth).fx for qq, aa, z in zip(q, a, nz)])
    assert np.sqrt(np.mean((rec - 1.841e6) ** 2)) <= noise * math.sqrt(2)


def test_identify_noiseless(truth, sweeps):
    model = identify(sweeps)
    assert entry_errors(model, truth, sweeps).max() < 1e-8


def test_identify_zero_loads(sweeps):
    recs = [RigMotionRecord(r.t, r.q_a, r.qddot_a, np.zeros_like(r.f_meas)) for r in sweeps]
    model = identify(recs)
    assert np.all(model.M_n == 0) and np.all(model.K_n == 0)


def test_identify_rank_deficient():
    t = np.arange(100.0)
    q = np.column_stack([np.sin(t), np.zeros_like(t)])
    rec = RigMotionRecord(t, q, -q, np.column_stack([np.sin(t), np.sin(t)]))
    with pytest.raises(IdentificationError) as exc:
        identify([rec])
    assert exc.value.condition_number > 1e10


def test_identify_with_noise_over_seeds(truth, sweeps):
    worst = max(entry_errors(identify(add_load_noise(sweeps, 0.01, s)), truth, sweeps).max()
                for s in range(20))
    assert worst < 0.02


def test_residual_near_noise_floor(sweeps):
    noisy = add_load_noise(sweeps, 0.01, 5)
    model = identify(noisy)
    y = np.vstack([r.f_meas for r in sweeps])
    floor = 0.01 * np.sqrt(np.mean(y ** 2, axis=0))
    assert np.all(np.asarray(model.residual_rms) < 1.5 * floor)


def test_regressor_is_sklearn_estimator(sweeps):
    est = NacelleLoadRegressor(max_condition=1e9)
    assert clone(est).get_params() == {"rcond": None, "max_condition": 1e9}
    X = np.hstack([sweeps[0].qddot_a, sweeps[0].q_a])
    est.fit(np.vstack([X, np.hstack([sweeps[1].qddot_a, sweeps[1].q_a])]),
            np.vstack([sweeps[0].f_meas, sweeps[1].f_meas]))
    np.testing.assert_allclose(est.predict(X), sweeps[0].f_meas, rtol=1e-8,
                               atol=1e-8 * np.abs(sweeps[0].f_meas).max())


def test_regressor_wrong_width():
    with pytest.raises(ValueError):
        NacelleLoadRegressor().fit(np.ones((10, 3)), np.ones((10, 2)))


def test_scaled_model(truth):
    s = truth.scaled(0.95, 1.0)
    np.testing.assert_allclose(s.M_n, 0.95 * truth.M_n)
    np.testing.assert_array_equal(s.K_n, truth.K_n)


def test_model_rejects_bad_shape():
    with pytest.raises(ValueError):
        CompensationModel(np.eye(3), np.eye(2))


FS = 1000.0


def _gain(f, cutoff=4.8):
    t = np.arange(0, 20 * max(1 / f, 1.0), 1 / FS)
    y = lowpass(np.sin(2 * np.pi * f * t), cutoff, FS)
    tail = y[len(y) // 2:]
    return 0.5 * (tail.max() - tail.min())


def test_lowpass_dc_gain():
    np.testing.assert_allclose(lowpass(np.full(500, 3.7), 4.8, FS), 3.7, rtol=1e-12)


def test_lowpass_gain_at_cutoff():
    assert _gain(4.8) == pytest.approx(1 / math.sqrt(2), rel=0.02)


def test_lowpass_stopband():
    assert _gain(48.0) < 0.05


def test_lowpass_rejects_cutoff_above_nyquist():
    with pytest.raises(ValueError):
        lowpass(np.ones(10), 500.0, FS)


def test_lowpass_group_delay():
    f = 0.3
    t = np.arange(0, 40, 1 / FS)
    y = lowpass(np.sin(2 * np.pi * f * t), 4.8, FS)
    x = np.sin(2 * np.pi * f * t)
    half = len(t) // 2
    lag = np.argmax(np.correlate(y[half:], x[half:], "full")) - (len(t) - half - 1)
    assert lag / FS == pytest.approx(low_frequency_group_delay(4.8), rel=0.05)


@settings(max_examples=20)
@given(st.lists(st.floats(-1e6, 1e6), min_size=5, max_size=50))
def test_streaming_matches_batch(xs):
    flt = StreamingLowpass(4.8, FS, xs[0])
    stream = [flt(v) for v in xs]
    np.testing.assert_allclose(stream, lowpass(np.array(xs), 4.8, FS), rtol=1e-9, atol=1e-6)


def test_log_sweep_derivatives_consistent():
    dt = 0.01
    t, q, qd, qdd = log_sweep(0.1, 1.0, 100.0, dt, 2.0)
    np.testing.assert_allclose(np.gradient(q, dt)[5:-5], qd[5:-5], atol=2e-3 * np.abs(qd).max())
    np.testing.assert_allclose(np.gradient(qd, dt)[5:-5], qdd[5:-5], atol=2e-3 * np.abs(qdd).max())
    assert q[0] == 0.0 and abs(q[-1]) < 1e-9


def test_nacelle_load_model_matches_hand_values():
    m = 3.31 * 150 ** 3
    h = 124.1
    model = nacelle_load_model(3.31, h)
    np.testing.assert_allclose(model.M_n, -m * np.array([[1.0, h], [h, h * h]]), rtol=1e-12)
    np.testing.assert_allclose(model.K_n, m * 9.81 / 24 * np.array([[0.0, 1.0], [0.0, h]]), rtol=1e-12)
