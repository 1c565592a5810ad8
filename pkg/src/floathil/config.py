"""Scenario configuration: YAML documents merged over built-in defaults."""
from __future__ import annotations

import copy
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

SCENARIOS = ("decay-open", "decay-closed", "steady-wind", "identify", "psd", "scale")
STOCHASTIC = ("steady-wind", "identify")
OUTPUT_ENV = "FLOATHIL_OUTPUT_DIR"

DEFAULTS: dict[str, Any] = {
    "scenario": "decay-closed",
    "duration": 1200.0,  # s, full scale
    "dt_model": 0.001,  # s, model scale
    "decimation": 10,
    "seed": 2025,
    "settle_time": 300.0,  # s excluded from statistics
    "output_dir": "out",
    "scaling": {"length_ratio": [1, 150], "velocity_ratio": [2, 5]},
    "platform": {
        "components": [
            {"name": "platform", "mass": 5.6e7, "x": 0.0, "z": -20.0, "inertia_yy": 1.26e10},
            {"name": "tower", "mass": 1.0e6, "x": 0.0, "z": 50.0, "inertia_yy": 9.5052e8},
            {"name": "rna", "mass": 6.8e6, "x": 0.0, "z": 124.1, "inertia_yy": 0.0},
        ],
        "hub_height": 124.1,
        "rotor_diameter": 178.4,
        "added_mass": {"surge_fraction": 0.8, "coupling": 0.0, "pitch": "fit"},
        "damping_ratios": [0.05, 0.03],
    },
    "calibration": {
        "f_surge": 0.005, "f_pitch": 0.040,
        "static_force": -1.1e6, "static_surge": -12.0, "static_pitch_deg": -2.0,
        "tolerance": 0.05,
    },
    "rotor": {
        "air_density": 1.225,
        "thrust_table": [[2.0, 0.22], [3.0, 0.35], [4.0, 0.48], [5.0, 0.60], [6.0, 0.70],
                         [7.0, 0.78], [8.0, 0.84], [9.0, 0.88], [10.0, 0.91], [11.0, 0.93]],
        "anchor": {"wind_speed": 12.3, "rotor_speed": 9.5, "thrust": 1.841e6},
    },
    "turbines": [
        {"name": "wt1", "rotor_speed": 9.5},
        {"name": "wt2", "rotor_speed": 6.0},
    ],
    "turbine_defaults": {
        "rig_bandwidth_model": 10.0,  # Hz model scale; "inf" for an ideal rig
        "rna_mass_model": 3.31,  # kg, physical rotor-nacelle
        "noise_rms": [0.0, 0.0],  # N, N m full scale
        "compensation": {"source": "plant", "mass_scale": 1.0, "stiffness_scale": 1.0},
    },
    "filter": {"cutoff_model": 4.8},  # Hz model scale; null disables
    "wave": {"kind": "step", "step_level": -1.1e6, "step_time": 0.0, "amplitude": 0.0, "frequency": 0.0},
    "inflow": {"wind_speed": 12.3, "ti": 0.02, "length_scale": 15.0},
    "wake": {
        "spacing_d": 5.75,
        "target_thrust": 6.27e5,
        "profile": {"gaussian_offset_d": 0.4, "gaussian_width_d": 0.2, "tophat_halfwidth_d": 0.6,
                    "tophat_edge_d": 0.1, "ti_center": 7.0, "ti_edge": 14.0, "ti_ambient": 2.0},
        "probe": {"x_d": 4.3, "y_d": 0.5},
        "length_scale": 1.5,
        "gains": [5.0, 3.0],
        "relative_width": 0.3,
    },
    "identification": {
        "surge_amplitude": 12.0, "pitch_amplitude_deg": 2.0,
        "surge_duration": 3000.0, "pitch_duration": 900.0,
        "band": [0.5, 3.0], "noise_fraction": 0.01,
    },
    "analysis": {"segment_fraction": 0.125, "overlap": 0.5, "window": "hann"},
    "psd": {"input": None, "column": None, "output": None},
    "scale": {"from": "model", "kind": "frequency", "value": 2.4},
}


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_ratio(value) -> Fraction | float:
    """``[1, 150]`` or ``"1:150"`` -> Fraction(1, 150); plain numbers pass through."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, str) and ":" in value:
        a, b = value.split(":")
        return Fraction(int(a), int(b))
    return float(value)


def parse_bandwidth(value) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


@dataclass
class ScenarioConfig:
    data: dict
    source: Path | None = None

    def __getitem__(self, key):
        return self.data[key]

    @property
    def kind(self) -> str:
        return self.data["scenario"]

    def turbine(self, i: int) -> dict:
        return deep_merge(self.data["turbine_defaults"], self.data["turbines"][i])

    @property
    def output_dir(self) -> Path:
        env = os.environ.get(OUTPUT_ENV)
        return Path(env) if env else Path(self.data["output_dir"])


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ScenarioConfig:
    doc = {}
    if path is not None:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: top level must be a mapping")
    data = deep_merge(DEFAULTS, doc)
    if overrides:
        data = deep_merge(data, overrides)
    return ScenarioConfig(data, Path(path) if path else None)


def _num(d, key, path, diags, positive=False, nonneg=False, allow_none=False):
    v = d.get(key) if isinstance(d, dict) else None
    if v is None:
        if not allow_none:
            diags.append(f"{path}.{key}: required number is missing")
        return None
    try:
        x = float(v)
    except (TypeError, ValueError):
        diags.append(f"{path}.{key}: expected a number, got {v!r}")
        return None
    if not math.isfinite(x) and not (math.isinf(x) and x > 0 and not positive):
        if not (positive and math.isinf(x) and x > 0):
            diags.append(f"{path}.{key}: must be finite")
            return None
    if positive and not x > 0:
        diags.append(f"{path}.{key}: must be > 0 (got {x:g})")
    if nonneg and x < 0:
        diags.append(f"{path}.{key}: must be >= 0 (got {x:g})")
    return x


def validate(config: ScenarioConfig | dict) -> list[str]:
    """Return diagnostics; an empty list means the scenario is runnable."""
    c = config.data if isinstance(config, ScenarioConfig) else config
    diags: list[str] = []
    kind = c.get("scenario")
    if kind not in SCENARIOS:
        diags.append(f"scenario: must be one of {', '.join(SCENARIOS)} (got {kind!r})")
    _num(c, "duration", "config", diags, positive=True)
    dt = _num(c, "dt_model", "config", diags, positive=True)
    dec = c.get("decimation")
    if not isinstance(dec, int) or dec < 1:
        diags.append("config.decimation: must be an integer >= 1")
    _num(c, "settle_time", "config", diags, nonneg=True)
    if kind in STOCHASTIC and not isinstance(c.get("seed"), int):
        diags.append("config.seed: an integer seed is required for stochastic scenarios")

    for key in ("length_ratio", "velocity_ratio"):
        try:
            if not parse_ratio(c["scaling"][key]) > 0:
                diags.append(f"scaling.{key}: must be > 0")
        except (KeyError, TypeError, ValueError, ZeroDivisionError):
            diags.append(f"scaling.{key}: expected a number, 'a:b' or [a, b]")

    plat = c.get("platform", {})
    comps = plat.get("components") or []
    if not comps:
        diags.append("platform.components: at least one rigid-body component is required")
    for i, comp in enumerate(comps):
        p = f"platform.components[{i}]"
        _num(comp, "mass", p, diags, nonneg=True)
        _num(comp, "z", p, diags)
        _num(comp, "x", p, diags, allow_none=True)
        _num(comp, "inertia_yy", p, diags, nonneg=True, allow_none=True)
    _num(plat, "hub_height", "platform", diags, positive=True)
    _num(plat, "rotor_diameter", "platform", diags, positive=True)
    am = plat.get("added_mass", {})
    _num(am, "surge_fraction", "platform.added_mass", diags, nonneg=True)
    if am.get("pitch") != "fit":
        _num(am, "pitch", "platform.added_mass", diags, nonneg=True)
    zr = plat.get("damping_ratios")
    if not (isinstance(zr, (list, tuple)) and len(zr) == 2 and all(0 <= float(z) < 1 for z in zr)):
        diags.append("platform.damping_ratios: expected two ratios in [0, 1)")

    cal = c.get("calibration", {})
    fs = _num(cal, "f_surge", "calibration", diags, positive=True)
    fp = _num(cal, "f_pitch", "calibration", diags, positive=True)
    if fs is not None and fp is not None and fs >= fp:
        diags.append("calibration.f_surge: must be below calibration.f_pitch")
    force = _num(cal, "static_force", "calibration", diags)
    for key in ("static_surge", "static_pitch_deg"):
        v = _num(cal, key, "calibration", diags)
        if v is not None and force is not None and (v * force <= 0):
            diags.append(f"calibration.{key}: must have the sign of calibration.static_force")

    rot = c.get("rotor", {})
    _num(rot, "air_density", "rotor", diags, positive=True)
    table = rot.get("thrust_table") or []
    if len(table) < 2 or any(len(row) != 2 for row in table):
        diags.append("rotor.thrust_table: expected at least two [tsr, ct] pairs")
    anc = rot.get("anchor", {})
    for key in ("wind_speed", "rotor_speed", "thrust"):
        _num(anc, key, "rotor.anchor", diags, positive=True)

    turbines = c.get("turbines") or []
    if not 1 <= len(turbines) <= 2:
        diags.append("turbines: expected one or two turbines")
    if kind == "steady-wind" and len(turbines) != 2:
        diags.append("turbines: steady-wind needs two turbines (free stream and wake)")
    for i, t in enumerate(turbines):
        tt = deep_merge(c.get("turbine_defaults", {}), t)
        p = f"turbines[{i}]"
        _num(tt, "rotor_speed", p, diags, positive=True)
        try:
            if not parse_bandwidth(tt.get("rig_bandwidth_model")) > 0:
                diags.append(f"{p}.rig_bandwidth_model: must be > 0")
        except (TypeError, ValueError):
            diags.append(f"{p}.rig_bandwidth_model: expected a number or 'inf'")
        _num(tt, "rna_mass_model", p, diags, nonneg=True)
        nr = tt.get("noise_rms")
        if not (isinstance(nr, (list, tuple)) and len(nr) == 2 and all(float(v) >= 0 for v in nr)):
            diags.append(f"{p}.noise_rms: expected two non-negative values")
        comp = tt.get("compensation", {})
        if comp.get("source") not in ("plant", "identified"):
            diags.append(f"{p}.compensation.source: must be 'plant' or 'identified'")

    flt = c.get("filter", {})
    cut = flt.get("cutoff_model")
    if cut is not None:
        cut = _num(flt, "cutoff_model", "filter", diags, positive=True)
        if cut is not None and dt is not None and dt > 0 and cut >= 0.5 / dt:
            diags.append(f"filter.cutoff_model: must be below the Nyquist frequency {0.5 / dt:g} Hz")

    wave = c.get("wave", {})
    if wave.get("kind") not in ("zero", "step", "sinusoid"):
        diags.append("wave.kind: must be zero, step or sinusoid")
    elif wave["kind"] == "sinusoid":
        _num(wave, "frequency", "wave", diags, positive=True)

    inf = c.get("inflow", {})
    _num(inf, "wind_speed", "inflow", diags, positive=True)
    _num(inf, "ti", "inflow", diags, nonneg=True)
    _num(inf, "length_scale", "inflow", diags, positive=True)
    wake = c.get("wake", {})
    _num(wake, "spacing_d", "wake", diags, positive=True)
    _num(wake, "target_thrust", "wake", diags, positive=True)
    _num(wake, "length_scale", "wake", diags, positive=True)
    gains = wake.get("gains")
    if not (isinstance(gains, (list, tuple)) and len(gains) == 2 and all(float(g) >= 1 for g in gains)):
        diags.append("wake.gains: expected two gains >= 1")
    prof = wake.get("profile", {})
    tis = [prof.get(k) for k in ("ti_ambient", "ti_center", "ti_edge")]
    if not all(isinstance(v, (int, float)) for v in tis) or not tis[0] < tis[1] < tis[2]:
        diags.append("wake.profile: TI must satisfy ti_ambient < ti_center < ti_edge")

    if kind == "psd":
        src = (c.get("psd") or {}).get("input")
        if not src:
            diags.append("psd.input: path to a CSV time series is required")
        elif not Path(src).exists():
            diags.append(f"psd.input: file {src} does not exist")
    if kind == "scale":
        sc = c.get("scale", {})
        if sc.get("from") not in ("model", "full"):
            diags.append("scale.from: must be 'model' or 'full'")
        from .scaling import QuantityKind
        if sc.get("kind") not in [k.value for k in QuantityKind]:
            diags.append("scale.kind: unknown quantity kind")
        _num(sc, "value", "scale", diags)
    return diags
