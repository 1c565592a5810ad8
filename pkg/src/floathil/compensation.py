"""Aerodynamic load reconstruction from tower-top force measurements.

The load cell sees aerodynamic loads plus the inertia and gravity loads of
the physical rotor-nacelle assembly. Those are modelled as

    F_c = M_n q_a'' + K_n q_a

and subtracted from the filtered measurement. ``M_n`` and ``K_n`` are
identified by linear least squares from prescribed-motion runs in still air.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dynamics import GenForce
from .scaling import NOMINAL_SCALES, QuantityKind, ScaleSet, to_full_scale


class IdentificationError(RuntimeError):
    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


@dataclass(frozen=True)
class CompensationModel:
    M_n: np.ndarray
    K_n: np.ndarray
    residual_rms: tuple[float, float] | None = None

    def __post_init__(self):
        for attr in ("M_n", "K_n"):
            arr = np.array(getattr(self, attr), dtype=float)
            if arr.shape != (2, 2) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{attr} must be a finite 2x2 matrix")
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)

    def load(self, q, qddot) -> np.ndarray:
        return self.M_n @ np.asarray(qddot, float) + self.K_n @ np.asarray(q, float)

    def scaled(self, mass_scale: float = 1.0, stiffness_scale: float = 1.0) -> "CompensationModel":
        return CompensationModel(self.M_n * mass_scale, self.K_n * stiffness_scale)


@dataclass(frozen=True)
class RigMotionRecord:
    t: np.ndarray
    q_a: np.ndarray  # (n, 2)
    qddot_a: np.ndarray  # (n, 2)
    f_meas: np.ndarray  # (n, 2)


def nacelle_load_model(mass_model: float, hub_height: float, scales: ScaleSet = NOMINAL_SCALES,
                       inertia_model: float = 0.0, g_model: float = 9.81) -> CompensationModel:
    """Inertia/gravity loads of the physical rotor-nacelle, in full-scale units.

    The physical RNA is a model-scale mass under model-scale gravity, so its
    weight converts to full scale through the acceleration ratio, not at 1 g.
    The measured load is the reaction on the tower, hence the negative mass
    matrix.
    """
    m = to_full_scale(mass_model, QuantityKind.MASS, scales)
    inertia = to_full_scale(inertia_model, QuantityKind.MASS, scales) / float(scales.length_ratio) ** 2
    g = to_full_scale(g_model, QuantityKind.ACCELERATION, scales)
    h = hub_height
    m_n = -np.array([[m, m * h], [m * h, m * h * h + inertia]])
    k_n = m * g * np.array([[0.0, 1.0], [0.0, h]])
    return CompensationModel(m_n, k_n)


def reconstruct(f_meas_filtered: GenForce, q_a, qddot_a, model: CompensationModel) -> GenForce:
    """``F_wt,n = F_wt,f - (M_n q_a'' + K_n q_a)``."""
    fc = model.load(q_a, qddot_a)
    return GenForce(f_meas_filtered.fx - float(fc[0]), f_meas_filtered.my - float(fc[1]))


class NacelleLoadRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``loads ~ [qddot, q] @ [M_n; K_n]``.

    ``X`` columns are ``(xddot, betaddot, x, beta)``; ``y`` columns are the
    tower-top ``(fx, my)``.
    """

    def __init__(self, rcond: float | None = None, max_condition: float = 1e10):
        self.rcond = rcond
        self.max_condition = max_condition

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        if X.shape[1] != 4:
            raise ValueError("expected 4 regressor columns (xddot, betaddot, x, beta)")
        y = y.reshape(len(y), -1)
        # column scaling keeps the condition number meaningful across units
        scale = np.sqrt(np.mean(X ** 2, axis=0))
        if np.any(scale == 0):
            raise IdentificationError("regressor column is identically zero", math.inf)
        Xs = X / scale
        sv = np.linalg.svd(Xs, compute_uv=False)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
        if cond > self.max_condition:
            raise IdentificationError(f"regressor matrix is rank deficient (condition {cond:.3g})", cond)
        coef, *_ = np.linalg.lstsq(Xs, y, rcond=self.rcond)
        self.coef_ = (coef / scale[:, None]).T  # (n_outputs, 4)
        self.condition_number_ = cond
        resid = y - X @ self.coef_.T
        self.residual_rms_ = np.sqrt(np.mean(resid ** 2, axis=0))
        self.n_features_in_ = 4
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_.T

    def to_model(self) -> CompensationModel:
        check_is_fitted(self, "coef_")
        return CompensationModel(self.coef_[:, :2], self.coef_[:, 2:],
                                 tuple(float(v) for v in self.residual_rms_))


def regressors(qddot_a, q_a) -> np.ndarray:
    return np.hstack([np.asarray(qddot_a, float), np.asarray(q_a, float)])


def identify(records: Sequence[RigMotionRecord]) -> CompensationModel:
    """Identify ``M_n`` and ``K_n`` from still-air prescribed-motion records."""
    if not records:
        raise ValueError("no identification records")
    X = np.vstack([regressors(r.qddot_a, r.q_a) for r in records])
    y = np.vstack([np.asarray(r.f_meas, float) for r in records])
    if np.all(y == 0):
        return CompensationModel(np.zeros((2, 2)), np.zeros((2, 2)), (0.0, 0.0))
    return NacelleLoadRegressor().fit(X, y).to_model()


def entry_errors(estimate: CompensationModel, truth: CompensationModel,
                 records: Sequence[RigMotionRecord]) -> np.ndarray:
    """Per-entry error of ``[M_n | K_n]`` (2x4).

    Relative to the true value where it is non-zero; entries that are zero
    in truth are scored by the load they contribute, relative to the RMS
    load on that channel.
    """
    est = np.hstack([estimate.M_n, estimate.K_n])
    ref = np.hstack([truth.M_n, truth.K_n])
    X = np.vstack([regressors(r.qddot_a, r.q_a) for r in records])
    y = np.vstack([np.asarray(r.f_meas, float) for r in records])
    diff = np.abs(est - ref)
    contrib = diff * np.sqrt(np.mean(X ** 2, axis=0)) / np.sqrt(np.mean(y ** 2, axis=0))[:, None]
    return np.where(ref != 0, diff / np.where(ref != 0, np.abs(ref), 1.0), contrib)


def butter_lowpass(cutoff: float, fs: float, order: int = 2):
    if not 0 < cutoff < 0.5 * fs:
        raise ValueError(f"cutoff {cutoff} Hz must lie in (0, Nyquist={0.5 * fs} Hz)")
    return signal.butter(order, cutoff, btype="low", fs=fs)


def lowpass(series, cutoff: float, fs: float) -> np.ndarray:
    """Causal second-order Butterworth low-pass, started from steady state.

    Butterworth gives a maximally flat, ripple-free magnitude. Its group
    delay is close to constant well inside the passband, about
    ``sqrt(2) / (2 pi cutoff)`` seconds at low frequency.
    """
    b, a = butter_lowpass(cutoff, fs)
    x = np.asarray(series, float)
    zi = signal.lfilter_zi(b, a) * (x[0] if len(x) else 0.0)
    return signal.lfilter(b, a, x, zi=zi)[0]


def low_frequency_group_delay(cutoff: float) -> float:
    return math.sqrt(2.0) / (2.0 * math.pi * cutoff)


class StreamingLowpass:
    """Sample-by-sample biquad (transposed direct form II)."""

    def __init__(self, cutoff: float, fs: float, initial: float = 0.0):
        b, a = butter_lowpass(cutoff, fs)
        self.b0, self.b1, self.b2 = (float(v / a[0]) for v in b)
        self.a1, self.a2 = float(a[1] / a[0]), float(a[2] / a[0])
        self.reset(initial)

    def reset(self, value: float = 0.0) -> None:
        # steady state for a constant input equal to ``value`` (unit DC gain)
        self.z1 = value * (1.0 - self.b0)
        self.z2 = value * (self.b2 - self.a2)

    def __call__(self, x: float) -> float:
        y = self.b0 * x + self.z1
        self.z1 = self.b1 * x - self.a1 * y + self.z2
        self.z2 = self.b2 * x - self.a2 * y
        return y


def log_sweep(f0: float, f1: float, duration: float, dt: float, amplitude: float,
              taper: float = 0.1):
    """Logarithmic sine sweep with a cosine fade in/out.

    Returns ``(t, q, qdot, qddot)`` with exact derivatives of the tapered
    signal.
    """
    n = int(round(duration / dt)) + 1
    t = np.arange(n) * dt
    rate = math.log(f1 / f0) / duration
    phase = 2 * math.pi * f0 * (np.exp(rate * t) - 1.0) / rate
    dphase = 2 * math.pi * f0 * np.exp(rate * t)
    ddphase = rate * dphase
    s, c = np.sin(phase), np.cos(phase)
    base = amplitude * s
    dbase = amplitude * c * dphase
    ddbase = amplitude * (c * ddphase - s * dphase ** 2)

    tf = taper * duration
    w = np.ones(n)
    dw = np.zeros(n)
    ddw = np.zeros(n)
    if tf > 0:
        k = math.pi / tf
        lead = t < tf
        w[lead] = 0.5 * (1 - np.cos(k * t[lead]))
        dw[lead] = 0.5 * k * np.sin(k * t[lead])
        ddw[lead] = 0.5 * k * k * np.cos(k * t[lead])
        tr = duration - t
        trail = tr < tf
        w[trail] = 0.5 * (1 - np.cos(k * tr[trail]))
        dw[trail] = -0.5 * k * np.sin(k * tr[trail])
        ddw[trail] = 0.5 * k * k * np.cos(k * tr[trail])
    q = w * base
    qd = dw * base + w * dbase
    qdd = ddw * base + 2 * dw * dbase + w * ddbase
    return t, q, qd, qdd
