"""Closed-loop HIL co-simulation of one or more floating turbines.

Each control step, per turbine:

1. the numerical model advances ``q_s`` with the wave force and the
   aerodynamic force reconstructed on the previous step;
2. the rig tracks the previous command;
3. the rotor produces thrust from the inflow and the rig velocity and the
   load cell synthesises the tower-top measurement;
4. measurement and rig kinematics pass through the same low-pass filter and
   the compensation model removes inertia and gravity loads.

Every signal crossing a subsystem boundary is therefore one step old. The
turbines only interact through precomputed inflow buffers, so they are
stepped one after the other; the result does not depend on the order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compensation import CompensationModel, StreamingLowpass
from .dynamics import GenForce, PlatformIntegrator, PlatformState, WaveForceSpec, wave_force_x
from .farmmodel import TurbineParams
from .plant import AIR_DENSITY, LoadCell, Rig, RigState, Rotor

CHANNELS = ("t", "x", "beta", "xdot", "betadot", "f_aero_x", "f_aero_my", "f_wave_x",
            "f_meas_x", "f_meas_my", "f_true_x", "f_true_my", "u", "u_rel", "tsr", "ct", "thrust")


@dataclass
class TurbineLoop:
    params: TurbineParams
    plant_truth: CompensationModel
    controller: CompensationModel
    rig_bandwidth: float = math.inf  # Hz full scale, -3 dB
    filter_cutoff: float | None = None  # Hz full scale; None disables filtering
    noise_rms: tuple[float, float] = (0.0, 0.0)
    seed: int = 0
    inflow: np.ndarray | None = None  # m/s, one sample per step (n_steps + 1)
    feedback: bool = True
    rho: float = AIR_DENSITY
    name: str = "wt"


@dataclass
class TurbineResult:
    name: str
    dt: float
    data: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.data[key]


def _identity(v):
    return v


def simulate(turbines: list[TurbineLoop], wave: WaveForceSpec, duration: float, dt: float,
             decimation: int = 1, start_static: bool = True) -> list[TurbineResult]:
    """Run the HIL loop; rows are recorded every ``decimation`` steps.

    With ``start_static`` the platform, rig and filters start at the static
    equilibrium under the pre-start wave force plus the steady thrust at the
    mean inflow.
    """
    if not dt > 0 or not duration > 0:
        raise ValueError("dt and duration must be positive")
    n_steps = int(round(duration / dt))
    return [_run_one(tl, wave, n_steps, dt, decimation, start_static) for tl in turbines]


def _run_one(tl: TurbineLoop, wave: WaveForceSpec, n_steps: int, dt: float,
             decimation: int, start_static: bool) -> TurbineResult:
    params = tl.params
    integ = PlatformIntegrator(params, tl.name)
    h = params.hub_height
    rotor = Rotor(params, tl.rho)
    cell = LoadCell(tl.plant_truth, tl.noise_rms, tl.seed)
    noise = cell.noise_block(n_steps + 1)
    inflow = tl.inflow
    if inflow is not None and len(inflow) < n_steps + 1:
        raise ValueError(f"inflow series for {tl.name} has {len(inflow)} samples, "
                         f"need {n_steps + 1}")

    # initial equilibrium
    fw0 = wave_force_x(-dt, wave) if start_static else 0.0
    f_true0 = GenForce()
    q0 = integ.static_response(fw0, fw0 * h) if start_static else (0.0, 0.0)
    if inflow is not None and start_static:
        # thrust surge component depends on pitch (T cos beta): fixed-point iteration
        u_mean = float(np.mean(inflow))
        for _ in range(20):
            f_true0, _ = rotor.thrust(u_mean, RigState(q0))
            q_new = integ.static_response(fw0 + f_true0.fx, fw0 * h + f_true0.my)
            done = abs(q_new[1] - q0[1]) <= 1e-15 + 1e-14 * abs(q_new[1])
            q0 = q_new
            if done:
                break
        f_true0, _ = rotor.thrust(u_mean, RigState(q0))
    rig = Rig(tl.rig_bandwidth, dt, RigState(q0, (0.0, 0.0), (0.0, 0.0)))

    if tl.filter_cutoff is None:
        filters = [_identity] * 6
    else:
        filters = [StreamingLowpass(tl.filter_cutoff, 1.0 / dt) for _ in range(6)]
    meas0 = cell.measure(f_true0, rig.state)
    init_vals = (meas0.fx, meas0.my, q0[0], q0[1], 0.0, 0.0)
    if tl.filter_cutoff is not None:
        for flt, v in zip(filters, init_vals):
            flt.reset(v)
    ctrl_m = tuple(float(v) for v in tl.controller.M_n.ravel())
    ctrl_k = tuple(float(v) for v in tl.controller.K_n.ravel())

    def reconstruct(mx, mm, qx, qb, ax, ab):
        return (mx - (ctrl_m[0] * ax + ctrl_m[1] * ab + ctrl_k[0] * qx + ctrl_k[1] * qb),
                mm - (ctrl_m[2] * ax + ctrl_m[3] * ab + ctrl_k[2] * qx + ctrl_k[3] * qb))

    f_wt = reconstruct(*init_vals)
    meas, f_true = meas0, f_true0
    op = rotor.operating_point(float(inflow[0])) if inflow is not None else None

    n_rec = n_steps // decimation + 1
    rec = {c: np.empty(n_rec) for c in CHANNELS}
    y = (q0[0], q0[1], 0.0, 0.0)
    fb = 1.0 if tl.feedback else 0.0
    r = 0
    for n in range(n_steps + 1):
        t = n * dt
        fa_x, fa_my = fb * f_wt[0], fb * f_wt[1]
        fw = wave_force_x(t, wave)
        if n % decimation == 0:
            row = rec
            row["t"][r] = t
            row["x"][r], row["beta"][r], row["xdot"][r], row["betadot"][r] = y
            row["f_aero_x"][r], row["f_aero_my"][r] = f_wt
            row["f_wave_x"][r] = fw
            row["f_meas_x"][r], row["f_meas_my"][r] = meas.fx, meas.my
            row["f_true_x"][r], row["f_true_my"][r] = f_true.fx, f_true.my
            if op is not None:
                row["u"][r] = inflow[n]
                row["u_rel"][r], row["tsr"][r], row["ct"][r], row["thrust"][r] = (
                    op.u_rel, op.tsr, op.ct, op.thrust)
            else:
                for c in ("u", "u_rel", "tsr", "ct", "thrust"):
                    row[c][r] = 0.0
            r += 1
        if n == n_steps:
            break
        acc = integ.accel(*y, fw + fa_x, fw * h + fa_my)
        command = PlatformState(t, (y[0], y[1]), (y[2], y[3]), acc)
        y = integ.step(t, y, dt, wave, fa_x, fa_my)

        rs = rig.track(command)
        if inflow is not None:
            f_true, op = rotor.thrust(float(inflow[n + 1]), rs)
        nz = noise[n + 1]
        meas = cell.measure(f_true, rs, nz)
        f_wt = reconstruct(filters[0](meas.fx), filters[1](meas.my),
                           filters[2](rs.q[0]), filters[3](rs.q[1]),
                           filters[4](rs.qddot[0]), filters[5](rs.qddot[1]))
    return TurbineResult(tl.name, dt * decimation, {k: v[:r] for k, v in rec.items()})
