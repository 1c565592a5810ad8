"""Scenario runner: config -> calibrated models -> HIL run -> CSV artifacts + summary."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analysis, inflow
from .compensation import (CompensationModel, IdentificationError, RigMotionRecord, entry_errors,
                           identify, log_sweep, nacelle_load_model)
from .config import ScenarioConfig, parse_bandwidth, parse_ratio, validate
from .dynamics import DivergenceError, PlatformState, WaveForceSpec
from .farmmodel import (CalibrationError, CalibrationTargets, PlatformCalibration, PlatformDesign,
                        RigidBodyComponent, TurbineParams, calibrate_platform, natural_frequencies,
                        write_matrix_csv)
from .hilloop import TurbineLoop, TurbineResult, simulate
from .plant import Rig, Rotor, anchored_thrust_table, thrust_anchor_ct, tip_speed_ratio
from .scaling import QuantityKind, ScaleSet, derive_scales, to_full_scale

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CALIBRATION = 3
EXIT_DIVERGENCE = 4

MOTION_HEADER = ("t (s)", "x_s (m)", "beta_s (rad)", "xdot_s (m/s)", "betadot_s (rad/s)",
                 "f_aero_x (N)", "f_aero_my (N m)", "f_wave_x (N)")
MOTION_KEYS = ("t", "x", "beta", "xdot", "betadot", "f_aero_x", "f_aero_my", "f_wave_x")
FORCE_HEADER = ("t (s)", "f_meas_x (N)", "f_meas_my (N m)", "f_true_x (N)", "f_true_my (N m)",
                "f_wt_n_x (N)", "f_wt_n_my (N m)")
FORCE_KEYS = ("t", "f_meas_x", "f_meas_my", "f_true_x", "f_true_my", "f_aero_x", "f_aero_my")
ROTOR_HEADER = ("t (s)", "u_rel (m/s)", "tsr (-)", "ct (-)", "thrust (N)")
ROTOR_KEYS = ("t", "u_rel", "tsr", "ct", "thrust")


@dataclass
class RunResult:
    status: int
    summary: dict = field(default_factory=dict)
    results: list[TurbineResult] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class FarmSetup:
    scales: ScaleSet
    dt: float  # s, full scale
    platform: PlatformCalibration
    params: list[TurbineParams]
    plant_truth: list[CompensationModel]
    rig_bandwidth: list[float]  # Hz, full scale
    filter_cutoff: float | None  # Hz, full scale


# ----------------------------------------------------------------- building


def build_scales(cfg: ScenarioConfig) -> ScaleSet:
    sc = cfg["scaling"]
    return derive_scales(parse_ratio(sc["length_ratio"]), parse_ratio(sc["velocity_ratio"]))


def build_targets(cfg: ScenarioConfig) -> CalibrationTargets:
    c = cfg["calibration"]
    return CalibrationTargets(
        f_surge=float(c["f_surge"]), f_pitch=float(c["f_pitch"]),
        static_force=float(c["static_force"]), static_surge=float(c["static_surge"]),
        static_pitch=math.radians(float(c["static_pitch_deg"])),
        hub_height=float(cfg["platform"]["hub_height"]))


def build_platform(cfg: ScenarioConfig) -> PlatformCalibration:
    p = cfg["platform"]
    comps = tuple(RigidBodyComponent(str(c.get("name", f"body{i}")), float(c["mass"]),
                                     float(c.get("x", 0.0)), float(c["z"]),
                                     float(c.get("inertia_yy", 0.0)))
                  for i, c in enumerate(p["components"]))
    am = p["added_mass"]
    design = PlatformDesign(
        components=comps, hub_height=float(p["hub_height"]),
        added_mass_surge_fraction=float(am["surge_fraction"]),
        added_mass_coupling=float(am.get("coupling", 0.0)),
        added_mass_pitch=None if am.get("pitch") == "fit" else float(am["pitch"]),
        damping_ratios=tuple(float(z) for z in p["damping_ratios"]))
    return calibrate_platform(design, build_targets(cfg), float(cfg["calibration"]["tolerance"]))


def build_farm(cfg: ScenarioConfig) -> FarmSetup:
    scales = build_scales(cfg)
    dt = float(to_full_scale(float(cfg["dt_model"]), QuantityKind.TIME, scales))
    pc = build_platform(cfg)
    plat, rot = cfg["platform"], cfg["rotor"]
    d, h, rho = float(plat["rotor_diameter"]), float(plat["hub_height"]), float(rot["air_density"])
    anc = rot["anchor"]
    table = anchored_thrust_table(
        [tuple(r) for r in rot["thrust_table"]],
        tip_speed_ratio(float(anc["rotor_speed"]), d, float(anc["wind_speed"])),
        thrust_anchor_ct(float(anc["thrust"]), float(anc["wind_speed"]), d, rho))
    params, truths, bws = [], [], []
    for i in range(len(cfg["turbines"])):
        t = cfg.turbine(i)
        params.append(TurbineParams(pc.M_fowt, pc.A_inf, pc.R, pc.K, h, d, table,
                                    float(t["rotor_speed"]), str(t.get("name", f"wt{i + 1}"))))
        truths.append(nacelle_load_model(float(t["rna_mass_model"]), h, scales))
        bw = parse_bandwidth(t["rig_bandwidth_model"])
        bws.append(bw if math.isinf(bw) else float(to_full_scale(bw, QuantityKind.FREQUENCY, scales)))
    cut = cfg["filter"].get("cutoff_model")
    cut = None if cut is None else float(to_full_scale(float(cut), QuantityKind.FREQUENCY, scales))
    return FarmSetup(scales, dt, pc, params, truths, bws, cut)


def build_wave(cfg: ScenarioConfig) -> WaveForceSpec:
    w = cfg["wave"]
    return WaveForceSpec(w["kind"], float(w.get("step_level", 0.0)), float(w.get("step_time", 0.0)),
                         float(w.get("amplitude", 0.0)), float(w.get("frequency", 0.0)))


def _seeds(cfg: ScenarioConfig, n: int) -> list[np.random.SeedSequence]:
    seed = cfg["seed"]
    return np.random.SeedSequence(0 if seed is None else int(seed)).spawn(n)


def identification_sweeps(plant_truth: CompensationModel, rig_bandwidth: float, dt: float,
                          ident: dict, f_surge: float, f_pitch: float) -> list[RigMotionRecord]:
    """Noiseless still-air log sweeps in surge and in pitch, tracked by the rig."""
    lo, hi = (float(v) for v in ident["band"])
    sweeps = ((0, f_surge, float(ident["surge_amplitude"]), float(ident["surge_duration"])),
              (1, f_pitch, math.radians(float(ident["pitch_amplitude_deg"])),
               float(ident["pitch_duration"])))
    records = []
    for axis, f0, amp, dur in sweeps:
        t, q, qd, qdd = log_sweep(lo * f0, hi * f0, dur, dt, amp)
        rig = Rig(rig_bandwidth, dt)
        qa = np.zeros((len(t), 2))
        aa = np.zeros((len(t), 2))
        for n in range(len(t)):
            cq, cv, ca = [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]
            cq[axis], cv[axis], ca[axis] = q[n], qd[n], qdd[n]
            rs = rig.track(PlatformState(t[n], tuple(cq), tuple(cv), tuple(ca)))
            qa[n], aa[n] = rs.q, rs.qddot
        clean = aa @ plant_truth.M_n.T + qa @ plant_truth.K_n.T
        records.append(RigMotionRecord(t, qa, aa, clean))
    return records


def add_load_noise(records: list[RigMotionRecord], fraction: float, seed=None) -> list[RigMotionRecord]:
    """White load noise with RMS ``fraction`` times each channel's load RMS."""
    rng = np.random.default_rng(seed)
    out = []
    for r in records:
        rms = np.sqrt(np.mean(np.asarray(r.f_meas) ** 2, axis=0))
        noisy = r.f_meas + rng.standard_normal(r.f_meas.shape) * fraction * rms
        out.append(RigMotionRecord(r.t, r.q_a, r.qddot_a, noisy))
    return out


def identify_turbine(cfg: ScenarioConfig, farm: FarmSetup, index: int, seed=None) -> CompensationModel:
    ident = cfg["identification"]
    records = identification_sweeps(
        farm.plant_truth[index], farm.rig_bandwidth[index], farm.dt, ident,
        float(cfg["calibration"]["f_surge"]), float(cfg["calibration"]["f_pitch"]))
    return identify(add_load_noise(records, float(ident["noise_fraction"]), seed))


def controller_for(cfg: ScenarioConfig, farm: FarmSetup, index: int, seed=None) -> CompensationModel:
    comp = cfg.turbine(index)["compensation"]
    base = farm.plant_truth[index]
    if comp["source"] == "identified":
        base = identify_turbine(cfg, farm, index, seed)
    return base.scaled(float(comp.get("mass_scale", 1.0)), float(comp.get("stiffness_scale", 1.0)))


@dataclass
class WakeSetup:
    u_free: np.ndarray
    u_wake: np.ndarray
    u_rotor_mean: float
    profile: inflow.WakeProfile
    probe_ti: float  # fraction
    delay: float  # s
    free_target: inflow.SpectrumTarget
    wake_target: inflow.SpectrumTarget


def build_inflow(cfg: ScenarioConfig, farm: FarmSetup, n_samples: int, seeds) -> WakeSetup:
    """Free-stream series for the upstream rotor and advected wake series downstream."""
    inf, wk = cfg["inflow"], cfg["wake"]
    d = farm.params[0].rotor_diameter
    u_inf = float(inf["wind_speed"])
    pr = wk["profile"]
    profile = inflow.WakeProfile(
        gaussian_offset=pr["gaussian_offset_d"] * d, gaussian_width=pr["gaussian_width_d"] * d,
        tophat_halfwidth=pr["tophat_halfwidth_d"] * d, tophat_edge=pr["tophat_edge_d"] * d,
        ti_center=float(pr["ti_center"]), ti_edge=float(pr["ti_edge"]),
        ti_ambient=float(pr["ti_ambient"]))
    probe = wk["probe"]
    probe_ti = float(inflow.wake_ti(float(probe["x_d"]), float(probe["y_d"]) * d, profile)) / 100.0
    rotor2 = Rotor(farm.params[1], float(cfg["rotor"]["air_density"]))
    u2 = inflow.solve_mean_inflow(rotor2.steady_thrust, float(wk["target_thrust"]), probe_ti)
    spacing = float(wk["spacing_d"])
    profile = inflow.calibrate_deficit(profile, spacing, u_inf, d, u2)

    dt = farm.dt
    f_nyq = 0.5 / dt
    free = inflow.von_karman_spectrum(float(inf["ti"]), u_inf, float(inf["length_scale"]), f_nyq)
    base = inflow.von_karman_spectrum(probe_ti, u2, float(wk["length_scale"]), f_nyq)
    cal = cfg["calibration"]
    wake_t = inflow.make_wake_spectrum(base, float(cal["f_surge"]), float(cal["f_pitch"]),
                                       [float(g) for g in wk["gains"]], float(wk["relative_width"]))
    duration = n_samples * dt
    u1 = u_inf + inflow.synthesize_turbulence(free, duration, dt, seeds[0])
    w = inflow.synthesize_turbulence(wake_t, duration, dt, seeds[1])
    u_conv = 0.5 * (u_inf + u2)
    u2s = u2 + inflow.advect(w, spacing * d, u_conv, dt, 0.0)
    return WakeSetup(u1, u2s, u2, profile, probe_ti, inflow.advection_delay(spacing * d, u_conv),
                     free, wake_t)


# ----------------------------------------------------------------- output


def write_csv(path: Path, header, columns) -> Path:
    data = np.column_stack([np.asarray(c, float) for c in columns])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in data:
            w.writerow([f"{v:.12g}" for v in row])
    return path


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def format_summary(summary: dict) -> str:
    return "".join(f"{k}: {format_value(v)}\n" for k, v in summary.items())


def parse_summary(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if ": " in line:
            k, v = line.split(": ", 1)
            out[k.strip()] = v.strip()
    return out


def _spectrum(series, dt: float, cfg: ScenarioConfig) -> analysis.Spectrum:
    a = cfg["analysis"]
    n = len(series)
    seg = max(8, min(n, int(round(float(a["segment_fraction"]) * n))))
    return analysis.welch(series, dt, seg, float(a["overlap"]), a.get("window", "hann"))


# ----------------------------------------------------------------- scenarios


def _calibration_summary(farm: FarmSetup) -> dict:
    pc = farm.platform
    f = natural_frequencies(pc.M_fowt + pc.A_inf, pc.K)
    st = pc.calibration.static_response
    return {
        "dt_full_s": farm.dt,
        "calibration.f_surge_hz": f[0],
        "calibration.f_pitch_hz": f[1],
        "calibration.static_surge_m": float(st[0]),
        "calibration.static_pitch_deg": math.degrees(float(st[1])),
        "calibration.feasibility": pc.calibration.feasibility,
        "calibration.added_pitch_inertia_kgm2": float(pc.A_inf[1, 1]),
    }


def _write_turbine(out: Path, r: TurbineResult, files: list[Path], rotor: bool) -> None:
    files.append(write_csv(out / f"{r.name}_motion.csv", MOTION_HEADER, [r[k] for k in MOTION_KEYS]))
    files.append(write_csv(out / f"{r.name}_forces.csv", FORCE_HEADER, [r[k] for k in FORCE_KEYS]))
    if rotor:
        files.append(write_csv(out / f"{r.name}_rotor.csv", ROTOR_HEADER, [r[k] for k in ROTOR_KEYS]))
        files.append(write_csv(out / f"{r.name}_inflow.csv", ("t (s)", "u (m/s)"), [r["t"], r["u"]]))


def _matrices(farm: FarmSetup, controllers) -> dict:
    pc = farm.platform
    mats = {"M_fowt": pc.M_fowt, "A_inf": pc.A_inf, "M_total": pc.M_fowt + pc.A_inf, "K": pc.K,
            "K_gravity": pc.K_gravity, "K_hydro_mooring": pc.K_hydro_mooring, "R_hydro": pc.R}
    for p, truth, ctrl in zip(farm.params, farm.plant_truth, controllers):
        mats[f"{p.name}.M_n_truth"] = truth.M_n
        mats[f"{p.name}.K_n_truth"] = truth.K_n
        mats[f"{p.name}.M_n_controller"] = ctrl.M_n
        mats[f"{p.name}.K_n_controller"] = ctrl.K_n
    return mats


def run_decay(cfg: ScenarioConfig, farm: FarmSetup, out: Path) -> RunResult:
    closed = cfg.kind == "decay-closed"
    seeds = _seeds(cfg, 2 * len(farm.params))
    ctrls = [controller_for(cfg, farm, i, seeds[2 * i]) for i in range(len(farm.params))]
    loops = [TurbineLoop(p, truth, ctrl, bw, farm.filter_cutoff,
                         tuple(float(v) for v in cfg.turbine(i)["noise_rms"]), seeds[2 * i + 1],
                         None, closed, float(cfg["rotor"]["air_density"]), p.name)
             for i, (p, truth, ctrl, bw) in enumerate(zip(farm.params, farm.plant_truth, ctrls,
                                                          farm.rig_bandwidth))]
    wave = build_wave(cfg)
    duration, dec = float(cfg["duration"]), int(cfg["decimation"])
    results = simulate(loops, wave, duration, farm.dt, dec)
    reference = simulate([replace(tl, feedback=False) for tl in loops], wave, duration, farm.dt, dec) \
        if closed else None

    summary = {"scenario": cfg.kind, "duration_s": duration}
    summary.update(_calibration_summary(farm))
    files: list[Path] = []
    cal = cfg["calibration"]
    fs, fp = float(cal["f_surge"]), float(cal["f_pitch"])
    release = float(cfg["wave"].get("step_time", 0.0))
    for i, r in enumerate(results):
        k = r.name
        start = int(round(release / r.dt))
        x, b = r["x"][start:], r["beta"][start:]
        summary[f"{k}.initial_surge_m"] = float(x[0])
        summary[f"{k}.initial_pitch_deg"] = math.degrees(float(b[0]))
        try:
            ms = analysis.decay_metrics(x, r.dt, 1)
            summary[f"{k}.f_surge_hz"], summary[f"{k}.zeta_surge"] = ms.f_n[0], ms.zeta[0]
            mp = analysis.decay_metrics(b, r.dt, 2, (fs, fp))
            summary[f"{k}.f_pitch_hz"], summary[f"{k}.zeta_pitch"] = mp.f_n[1], mp.zeta[1]
            summary[f"{k}.pitch_low_band_f_hz"] = mp.f_n[0]
        except analysis.InsufficientDataError as exc:
            log.warning("%s: decay metrics unavailable (%s)", k, exc)
        spec_x, spec_b = _spectrum(x, r.dt, cfg), _spectrum(b, r.dt, cfg)
        summary[f"{k}.pitch_psd_peak_at_f_surge"] = spec_b.has_peak_near(fs)
        summary[f"{k}.pitch_psd_peak_at_f_pitch"] = spec_b.has_peak_near(fp)
        summary[f"{k}.max_abs_f_wt_n_x_n"] = float(np.max(np.abs(r["f_aero_x"])))
        summary[f"{k}.max_abs_f_meas_x_n"] = float(np.max(np.abs(r["f_meas_x"])))
        if reference is not None:
            ref = reference[i]["x"]
            n5 = min(len(ref), int(round(5.0 / fs / r.dt)) + 1)
            diff = r["x"][:n5] - ref[:n5]
            summary[f"{k}.open_loop_rms_rel_diff"] = float(np.sqrt(np.mean(diff ** 2))
                                                           / np.sqrt(np.mean(ref[:n5] ** 2)))
        _write_turbine(out, r, files, rotor=False)
        files.append(write_csv(out / f"{k}_spectra.csv",
                               ("f (Hz)", "psd_x_s (m^2/Hz)", "psd_beta_s (rad^2/Hz)"),
                               [spec_x.frequencies, spec_x.psd, spec_b.psd]))
    write_matrix_csv(out / "matrices.csv", _matrices(farm, ctrls))
    files.append(out / "matrices.csv")
    return RunResult(EXIT_OK, summary, results, files)


def run_steady_wind(cfg: ScenarioConfig, farm: FarmSetup, out: Path) -> RunResult:
    duration, dec = float(cfg["duration"]), int(cfg["decimation"])
    n_steps = int(round(duration / farm.dt))
    seeds = _seeds(cfg, 6)
    wake = build_inflow(cfg, farm, n_steps + 1, seeds[:2])
    ctrls = [controller_for(cfg, farm, i, seeds[2 + 2 * i]) for i in range(2)]
    loops = [TurbineLoop(p, truth, ctrl, bw, farm.filter_cutoff,
                         tuple(float(v) for v in cfg.turbine(i)["noise_rms"]), seeds[3 + 2 * i],
                         u, True, float(cfg["rotor"]["air_density"]), p.name)
             for i, (p, truth, ctrl, bw, u) in enumerate(zip(
                 farm.params, farm.plant_truth, ctrls, farm.rig_bandwidth,
                 (wake.u_free, wake.u_wake)))]
    results = simulate(loops, build_wave(cfg), duration, farm.dt, dec)

    summary = {"scenario": cfg.kind, "duration_s": duration}
    summary.update(_calibration_summary(farm))
    summary["wake.probe_ti_pct"] = 100.0 * wake.probe_ti
    summary["wake.rotor_mean_speed_ms"] = wake.u_rotor_mean
    summary["wake.deficit_center"] = wake.profile.deficit_center
    summary["wake.advection_delay_s"] = wake.delay
    cal = cfg["calibration"]
    fs, fp = float(cal["f_surge"]), float(cal["f_pitch"])
    skip = int(round(float(cfg["settle_time"]) / results[0].dt))
    files: list[Path] = []
    metrics = []
    for r in results:
        k = r.name
        th, x, b, u = (r[c][skip:] for c in ("thrust", "x", "beta", "u"))
        sx, sb, su = (_spectrum(s, r.dt, cfg) for s in (x, b, u))
        m = {
            "mean_thrust_kn": float(np.mean(th)) / 1e3,
            "std_thrust_kn": float(np.std(th)) / 1e3,
            "mean_surge_m": float(np.mean(x)),
            "std_surge_m": float(np.std(x)),
            "mean_pitch_deg": math.degrees(float(np.mean(b))),
            "std_pitch_deg": math.degrees(float(np.std(b))),
            "mean_inflow_ms": float(np.mean(u)),
            "inflow_ti_pct": 100.0 * analysis.stats(u, velocity=True).ti,
            "min_u_rel_ms": float(np.min(r["u_rel"][skip:])),
            "psd_surge_at_f_surge": sx.band_mean(fs, 0.2),
            "psd_pitch_at_f_pitch": sb.band_mean(fp, 0.2),
        }
        metrics.append(m)
        summary.update({f"{k}.{name}": v for name, v in m.items()})
        _write_turbine(out, r, files, rotor=True)
        files.append(write_csv(out / f"{k}_spectra.csv",
                               ("f (Hz)", "psd_x_s (m^2/Hz)", "psd_beta_s (rad^2/Hz)",
                                "psd_u (m^2/s^2/Hz)"),
                               [sx.frequencies, sx.psd, sb.psd, su.psd]))
    for name, key in (("thrust", "mean_thrust_kn"), ("surge", "mean_surge_m"),
                      ("pitch", "mean_pitch_deg"), ("psd_surge", "psd_surge_at_f_surge"),
                      ("psd_pitch", "psd_pitch_at_f_pitch")):
        summary[f"ratio.{name}"] = metrics[1][key] / metrics[0][key]
    write_matrix_csv(out / "matrices.csv", _matrices(farm, ctrls))
    files.append(out / "matrices.csv")
    return RunResult(EXIT_OK, summary, results, files)


def run_identify(cfg: ScenarioConfig, farm: FarmSetup, out: Path) -> RunResult:
    summary = {"scenario": cfg.kind}
    summary.update(_calibration_summary(farm))
    seeds = _seeds(cfg, len(farm.params))
    files: list[Path] = []
    mats = {}
    ident = cfg["identification"]
    for i, (p, truth) in enumerate(zip(farm.params, farm.plant_truth)):
        clean = identification_sweeps(truth, farm.rig_bandwidth[i], farm.dt, ident,
                                      float(cfg["calibration"]["f_surge"]),
                                      float(cfg["calibration"]["f_pitch"]))
        model = identify(add_load_noise(clean, float(ident["noise_fraction"]), seeds[i]))
        k = p.name
        for name, est, ref in (("M_n", model.M_n, truth.M_n), ("K_n", model.K_n, truth.K_n)):
            for (a, c), v in np.ndenumerate(est):
                summary[f"{k}.{name}_{a}{c}"] = float(v)
                summary[f"{k}.{name}_{a}{c}_truth"] = float(ref[a, c])
        summary[f"{k}.max_entry_error"] = float(entry_errors(model, truth, clean).max())
        summary[f"{k}.residual_rms_x_n"], summary[f"{k}.residual_rms_my_nm"] = model.residual_rms
        mats.update({f"{k}.M_n_identified": model.M_n, f"{k}.K_n_identified": model.K_n,
                     f"{k}.M_n_truth": truth.M_n, f"{k}.K_n_truth": truth.K_n})
    write_matrix_csv(out / "matrices.csv", mats)
    files.append(out / "matrices.csv")
    return RunResult(EXIT_OK, summary, [], files)


def read_series(path: str | Path, column: str | None = None):
    """Return ``(t, values, column_header)`` from a CSV with a leading time column."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], float)
    if column is None:
        idx = 1
    else:
        matches = [i for i, h in enumerate(header) if h == column or h.split(" (")[0] == column]
        if not matches:
            raise KeyError(f"column {column!r} not in {header}")
        idx = matches[0]
    return body[:, 0], body[:, idx], header[idx]


def psd_file(src: str | Path, dst: str | Path, column: str | None = None,
             segment_fraction: float = 0.125, overlap: float = 0.5, window: str = "hann") -> Path:
    t, x, name = read_series(src, column)
    dt = float(np.median(np.diff(t)))
    n = len(x)
    seg = max(8, min(n, int(round(segment_fraction * n))))
    spec = analysis.welch(x, dt, seg, overlap, window)
    unit = name.split("(")[1].rstrip(")") if "(" in name else "-"
    return write_csv(Path(dst), ("f (Hz)", f"psd ({unit}^2/Hz)"), [spec.frequencies, spec.psd])


def run_psd(cfg: ScenarioConfig, out: Path) -> RunResult:
    p, a = cfg["psd"], cfg["analysis"]
    dst = Path(p["output"]) if p.get("output") else out / "spectrum.csv"
    path = psd_file(p["input"], dst, p.get("column"), float(a["segment_fraction"]),
                    float(a["overlap"]), a.get("window", "hann"))
    return RunResult(EXIT_OK, {"scenario": "psd", "output": str(path)}, [], [path])


def convert(value: float, kind: str, direction: str, scales: ScaleSet) -> float:
    from .scaling import to_model_scale
    fn = to_full_scale if direction == "model" else to_model_scale
    return float(fn(value, kind, scales))


def run(cfg: ScenarioConfig, write_summary: bool = True) -> RunResult:
    """Execute a validated scenario; failures map to non-zero exit statuses."""
    diags = validate(cfg)
    if diags:
        return RunResult(EXIT_INVALID, diagnostics=diags)
    if cfg.kind == "scale":
        s = cfg["scale"]
        v = convert(float(s["value"]), s["kind"], s["from"], build_scales(cfg))
        return RunResult(EXIT_OK, {"scenario": "scale", "value": v})
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    if cfg.kind == "psd":
        res = run_psd(cfg, out)
    else:
        try:
            farm = build_farm(cfg)
            if cfg.kind in ("decay-open", "decay-closed"):
                res = run_decay(cfg, farm, out)
            elif cfg.kind == "steady-wind":
                res = run_steady_wind(cfg, farm, out)
            else:
                res = run_identify(cfg, farm, out)
        except (CalibrationError, IdentificationError) as exc:
            return RunResult(EXIT_CALIBRATION, diagnostics=[f"calibration: {exc}"])
        except ValueError as exc:
            return RunResult(EXIT_CALIBRATION, diagnostics=[f"setup: {exc}"])
        except DivergenceError as exc:
            return RunResult(EXIT_DIVERGENCE, diagnostics=[f"divergence: {exc}"])
    if write_summary:
        path = out / "summary.txt"
        path.write_text(format_summary(res.summary))
        res.files.append(path)
    return res
