"""Rotor inflow: free stream, wake mean/TI fields and spectral turbulence."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy import fft
from scipy.optimize import brentq

WAKE_X_RANGE = (3.5, 5.75)


@dataclass(frozen=True)
class WakeProfile:
    """Lateral wake shape; lengths in metres.

    The deficit is a double Gaussian at the near end of ``x_range`` and
    blends linearly (in x/D) into a smoothed top hat at the far end.
    ``deficit_center`` is the peak deficit as a fraction of the free stream.
    """
    deficit_center: float = 0.4
    gaussian_offset: float = 71.4
    gaussian_width: float = 35.7
    tophat_halfwidth: float = 107.0
    tophat_edge: float = 17.8
    ti_center: float = 7.0
    ti_edge: float = 14.0
    ti_ambient: float = 2.0
    x_range: tuple[float, float] = WAKE_X_RANGE

    def __post_init__(self):
        if not 0.0 <= self.deficit_center <= 1.0:
            raise ValueError("deficit_center must lie in [0, 1]")
        if not (self.ti_ambient < self.ti_center < self.ti_edge):
            raise ValueError("wake TI must satisfy ambient < center < edge")


def _clip_x(x_over_d: float, profile: WakeProfile) -> float:
    lo, hi = profile.x_range
    if x_over_d < lo or x_over_d > hi:
        warnings.warn(f"x/D={x_over_d} outside the calibrated wake range {profile.x_range}; "
                      "using the nearest edge", RuntimeWarning, stacklevel=3)
        return min(max(x_over_d, lo), hi)
    return x_over_d


def _double_gaussian(y, y0, s):
    y = np.asarray(y, float)
    g = np.exp(-0.5 * ((y - y0) / s) ** 2) + np.exp(-0.5 * ((y + y0) / s) ** 2)
    ys = np.linspace(0.0, y0 + 4 * s, 4001)
    peak = float(np.max(np.exp(-0.5 * ((ys - y0) / s) ** 2) + np.exp(-0.5 * ((ys + y0) / s) ** 2)))
    return g / peak


def _top_hat(y, half, edge):
    y = np.abs(np.asarray(y, float))
    return 0.5 * (1.0 - np.tanh((y - half) / edge)) / (0.5 * (1.0 - math.tanh(-half / edge)))


def deficit_shape(x_over_d: float, y, profile: WakeProfile):
    """Normalised deficit in [0, 1]; even in y."""
    x = _clip_x(x_over_d, profile)
    lo, hi = profile.x_range
    w = (x - lo) / (hi - lo)
    dg = _double_gaussian(y, profile.gaussian_offset, profile.gaussian_width)
    th = _top_hat(y, profile.tophat_halfwidth, profile.tophat_edge)
    return (1.0 - w) * dg + w * th


def wake_mean(x_over_d: float, y, u_inf: float, profile: WakeProfile):
    return u_inf * (1.0 - profile.deficit_center * deficit_shape(x_over_d, y, profile))


def rotor_average(x_over_d: float, u_inf: float, profile: WakeProfile, diameter: float,
                  n: int = 64) -> float:
    """Disk-averaged mean speed, treating the lateral profile as axisymmetric."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    r = 0.25 * diameter * (nodes + 1.0)  # map [-1, 1] -> [0, R]
    u = wake_mean(x_over_d, r, u_inf, profile)
    radius = 0.5 * diameter
    return float(np.sum(weights * u * r) * 0.5 * radius * 2.0 / radius ** 2)


def wake_ti(x_over_d: float, y, profile: WakeProfile):
    """Turbulence intensity in percent.

    ``ti_edge`` exactly at ``|y| = gaussian_offset``, ``ti_center`` on the
    axis, relaxing to ``ti_ambient`` far outside. Smooth and even in y.
    """
    _clip_x(x_over_d, profile)
    y = np.asarray(y, float)
    y0sq = profile.gaussian_offset ** 2
    span = profile.ti_edge - profile.ti_ambient
    ratio = (profile.ti_center - profile.ti_ambient) / span
    s4 = y0sq ** 2 / (-2.0 * math.log(ratio))
    return profile.ti_ambient + span * np.exp(-((y * y - y0sq) ** 2) / (2.0 * s4))


@dataclass(frozen=True)
class Bump:
    center: float
    width: float
    gain: float

    def factor(self, f):
        return 1.0 + (self.gain - 1.0) * np.exp(-0.5 * ((np.asarray(f, float) - self.center) / self.width) ** 2)


@dataclass(frozen=True)
class SpectrumTarget:
    """One-sided velocity PSD target on ``[0, f_max]``.

    ``psd(f) = scale * interp(frequencies, values)(f) * prod(bump factors)``.
    """
    frequencies: tuple[float, ...]
    values: tuple[float, ...]
    f_max: float
    bumps: tuple[Bump, ...] = ()
    scale: float = 1.0

    def __post_init__(self):
        if len(self.frequencies) != len(self.values) or len(self.frequencies) < 2:
            raise ValueError("spectrum target needs matching frequency/value lists")
        if any(v < 0 for v in self.values):
            raise ValueError("PSD values must be non-negative")
        if np.any(np.diff(self.frequencies) <= 0):
            raise ValueError("spectrum frequencies must increase")

    def psd(self, f):
        f = np.asarray(f, float)
        out = self.scale * np.interp(f, self.frequencies, self.values, left=self.values[0], right=0.0)
        for b in self.bumps:
            out = out * b.factor(f)
        return np.where((f >= 0) & (f <= self.f_max), out, 0.0)

    def variance(self, n: int = 2 ** 17) -> float:
        f = np.linspace(0.0, self.f_max, n + 1)
        return float(np.trapezoid(self.psd(f), f))

    def rescaled(self, variance: float) -> "SpectrumTarget":
        current = self.variance()
        if current == 0:
            return self
        return replace(self, scale=self.scale * variance / current)


def von_karman_spectrum(ti: float, u_mean: float, length_scale: float, f_max: float,
                        n: int = 4000) -> SpectrumTarget:
    """Longitudinal von Karman shape, normalised to ``(ti * u_mean)^2`` on [0, f_max].

    ``ti`` is a fraction (0.02 for 2%).
    """
    tau = length_scale / u_mean
    f = np.concatenate([[0.0], np.geomspace(1e-5, f_max, n)])
    shape = 4.0 * tau / (1.0 + 70.8 * (f * tau) ** 2) ** (5.0 / 6.0)
    target = SpectrumTarget(tuple(f.tolist()), tuple(shape.tolist()), f_max)
    return target.rescaled((ti * u_mean) ** 2)


def white_spectrum(variance: float, f_max: float) -> SpectrumTarget:
    level = variance / f_max
    return SpectrumTarget((0.0, f_max), (level, level), f_max)


def make_wake_spectrum(base: SpectrumTarget, f_surge: float, f_pitch: float,
                       gains: Sequence[float] = (5.0, 3.0), relative_width: float = 0.3,
                       variance: float | None = None) -> SpectrumTarget:
    """Enrich ``base`` at the platform frequencies, then restore the variance.

    ``variance`` defaults to that of ``base`` (its wake TI target).
    """
    if any(g < 1 for g in gains):
        raise ValueError("wake spectral gains must be >= 1")
    target_var = base.variance() if variance is None else variance
    bumps = tuple(Bump(fc, relative_width * fc, g) for fc, g in zip((f_surge, f_pitch), gains))
    return replace(base, bumps=base.bumps + bumps).rescaled(target_var)


def synthesize_turbulence(target: SpectrumTarget, duration: float, dt: float,
                          seed: int | None) -> np.ndarray:
    """Zero-mean series with the target PSD: fixed amplitudes, random phases.

    The discrete amplitudes are normalised so the series variance equals the
    target variance integrated over the resolved band.
    """
    n = int(round(duration / dt))
    if n < 2:
        raise ValueError("duration must span at least two samples")
    if target.f_max > 0.5 / dt * (1 + 1e-12):
        raise ValueError("spectrum target extends beyond the Nyquist frequency")
    df = 1.0 / (n * dt)
    k = np.arange(n // 2 + 1)
    f = k * df
    s = target.psd(f)
    s[0] = 0.0
    if n % 2 == 0:
        s[-1] = 0.0
    total = float(np.sum(s) * df)
    if total == 0.0:
        return np.zeros(n)
    s *= target.variance() / total
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * math.pi, len(k))
    spec = n * np.sqrt(0.5 * s * df) * np.exp(1j * phases)
    return fft.irfft(spec, n)


def advection_delay(spacing: float, u_conv: float) -> float:
    if not spacing > 0 or not u_conv > 0:
        raise ValueError("spacing and convection speed must be positive")
    return spacing / u_conv


def advect(series, spacing: float, u_conv: float, dt: float, fill: float | None = None) -> np.ndarray:
    """Frozen-turbulence transport: delay by ``spacing / u_conv`` samples-rounded.

    The head of the output is filled with ``fill`` (default: series mean).
    """
    x = np.asarray(series, float)
    if math.isinf(u_conv):
        return x.copy()
    lag = int(round(advection_delay(spacing, u_conv) / dt))
    if lag >= len(x):
        raise ValueError(f"advection delay of {lag} samples exceeds the series length {len(x)}")
    out = np.empty_like(x)
    out[:lag] = x.mean() if fill is None else fill
    out[lag:] = x[:len(x) - lag]
    return out


def expected_thrust(thrust_fn: Callable[[float], float], u_mean: float, sigma: float,
                    n: int = 40) -> float:
    """E[thrust(u)] for Gaussian u, by Gauss-Hermite quadrature."""
    if sigma == 0:
        return thrust_fn(u_mean)
    nodes, weights = np.polynomial.hermite_e.hermegauss(n)
    vals = [thrust_fn(u_mean + sigma * z) for z in nodes]
    return float(np.dot(weights, vals) / math.sqrt(2 * math.pi))


def solve_mean_inflow(thrust_fn: Callable[[float], float], target_thrust: float, ti: float = 0.0,
                      bracket: tuple[float, float] = (0.5, 40.0)) -> float:
    """Mean speed whose expected thrust (TI as a fraction) equals the target."""
    return brentq(lambda u: expected_thrust(thrust_fn, u, ti * u) - target_thrust,
                  *bracket, xtol=1e-12)


def calibrate_deficit(profile: WakeProfile, x_over_d: float, u_inf: float, diameter: float,
                      u_rotor: float) -> WakeProfile:
    """Set the peak deficit so the disk-averaged speed at ``x_over_d`` is ``u_rotor``."""
    unit = replace(profile, deficit_center=1.0)
    shape_avg = 1.0 - rotor_average(x_over_d, 1.0, unit, diameter)
    deficit = (1.0 - u_rotor / u_inf) / shape_avg
    if not 0.0 <= deficit <= 1.0:
        raise ValueError(f"required wake deficit {deficit:.3f} is outside [0, 1]")
    return replace(profile, deficit_center=deficit)
