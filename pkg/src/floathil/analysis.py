"""Post-processing: Welch PSD, free-decay modal metrics, summary statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import signal


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    psd: np.ndarray
    resolution: float
    window: str
    segments: int

    def variance(self) -> float:
        return float(np.sum(self.psd) * self.resolution)

    def value_near(self, f: float, rel_band: float = 0.0) -> float:
        """Largest PSD value within ``f * (1 +- rel_band)`` (nearest bin if the band is empty)."""
        fr = self.frequencies
        mask = np.abs(fr - f) <= rel_band * f
        if not np.any(mask):
            return float(self.psd[np.argmin(np.abs(fr - f))])
        return float(np.max(self.psd[mask]))

    def band_mean(self, f: float, rel_band: float = 0.2) -> float:
        """Mean PSD over ``f * (1 +- rel_band)``; steadier than a single bin."""
        mask = np.abs(self.frequencies - f) <= rel_band * f
        if not np.any(mask):
            return self.value_near(f)
        return float(np.mean(self.psd[mask]))

    def has_peak_near(self, f: float, rel_band: float = 0.25) -> bool:
        """True if a local maximum of the PSD lies within the band around ``f``."""
        peaks, _ = signal.find_peaks(self.psd)
        fr = self.frequencies[peaks]
        return bool(np.any(np.abs(fr - f) <= rel_band * f))


def welch(series, dt: float, segment_length: int | None = None,
          overlap_fraction: float = 0.5, window: str = "hann") -> Spectrum:
    """One-sided averaged-periodogram PSD (density scaling, per-segment mean removed).

    ``segment_length`` is in samples; default is one eighth of the record.
    """
    x = np.asarray(series, float)
    n = len(x)
    if segment_length is None:
        segment_length = n // 8
    if n < 8 or segment_length < 8 or segment_length > n:
        raise ValueError(f"series of {n} samples is too short for segments of {segment_length}")
    if not 0 <= overlap_fraction < 1:
        raise ValueError("overlap fraction must lie in [0, 1)")
    noverlap = int(round(overlap_fraction * segment_length))
    f, p = signal.welch(x, fs=1.0 / dt, window=window, nperseg=segment_length,
                        noverlap=noverlap, detrend="constant", scaling="density")
    step = segment_length - noverlap
    segments = 1 + (n - segment_length) // step
    return Spectrum(f, p, float(f[1] - f[0]), window, segments)


@dataclass(frozen=True)
class DecayMetrics:
    f_n: tuple[float, ...]
    zeta: tuple[float, ...]
    peak_times: tuple[np.ndarray, ...]


def _peaks(x: np.ndarray, dt: float, min_rel: float):
    idx, _ = signal.find_peaks(x)
    if len(idx) == 0:
        return np.array([]), np.array([])
    # parabolic refinement
    idx = idx[(idx > 0) & (idx < len(x) - 1)]
    ym, y0, yp = x[idx - 1], x[idx], x[idx + 1]
    denom = ym - 2 * y0 + yp
    shift = np.where(denom != 0, 0.5 * (ym - yp) / np.where(denom != 0, denom, 1.0), 0.0)
    amp = y0 - 0.25 * (ym - yp) * shift
    times = (idx + shift) * dt
    # start at the largest peak; anything earlier is a filter edge transient
    start = int(np.argmax(amp))
    times, amp = times[start:], amp[start:]
    keep = amp > min_rel * np.max(np.abs(x))
    # stop at the first peak that falls below the threshold
    if not np.all(keep):
        first_bad = int(np.argmin(keep))
        times, amp = times[:first_bad], amp[:first_bad]
    return times, amp


def _single_mode(x: np.ndarray, dt: float, min_rel: float):
    times, amp = _peaks(x, dt, min_rel)
    if len(amp) < 3:
        raise InsufficientDataError(f"found {len(amp)} usable peaks, need at least 3")
    period = float(np.mean(np.diff(times)))
    # log decrement from a straight-line fit of ln(peak) against peak index
    slope = np.polyfit(np.arange(len(amp)), np.log(amp), 1)[0]
    delta = max(-slope, 0.0)
    zeta = delta / math.sqrt(4 * math.pi ** 2 + delta ** 2)
    f_d = 1.0 / period
    return f_d / math.sqrt(1.0 - zeta ** 2), zeta, times


def decay_metrics(series, dt: float, n_modes: int = 1, frequencies: Sequence[float] | None = None,
                  equilibrium: float = 0.0, min_rel_amplitude: float = 0.01) -> DecayMetrics:
    """Natural frequency and damping ratio from a free-decay record.

    With ``n_modes=2`` the record is split with zero-phase Butterworth
    filters at the geometric mean of the two expected ``frequencies`` and
    each band is analysed as a single mode.
    """
    x = np.asarray(series, float) - equilibrium
    if n_modes == 1:
        f, z, tp = _single_mode(x, dt, min_rel_amplitude)
        return DecayMetrics((f,), (z,), (tp,))
    if n_modes != 2:
        raise ValueError("n_modes must be 1 or 2")
    if frequencies is None or len(frequencies) != 2:
        raise ValueError("two-mode analysis needs the two expected frequencies")
    split = math.sqrt(frequencies[0] * frequencies[1])
    fs = 1.0 / dt
    low = signal.sosfiltfilt(signal.butter(4, split, "low", fs=fs, output="sos"), x)
    high = signal.sosfiltfilt(signal.butter(4, split, "high", fs=fs, output="sos"), x)
    out = [_single_mode(band, dt, min_rel_amplitude) for band in (low, high)]
    return DecayMetrics(tuple(o[0] for o in out), tuple(o[1] for o in out), tuple(o[2] for o in out))


class Stats(NamedTuple):
    mean: float
    std: float
    ti: float


def stats(series, velocity: bool = False) -> Stats:
    x = np.asarray(series, float)
    if x.size == 0:
        raise ValueError("stats of an empty series")
    mean = float(np.mean(x))
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    ti = std / mean if velocity and mean != 0 else 0.0
    return Stats(mean, std, ti)
