"""Virtual physical subsystem: robot tracking, rotor thrust, load cell."""
from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .compensation import CompensationModel
from .dynamics import GenForce, PlatformState
from .farmmodel import TurbineParams

log = logging.getLogger(__name__)

AIR_DENSITY = 1.225

# Generic thrust-coefficient shape of a 10 MW-class rotor at fine pitch.
BASE_THRUST_TABLE = (
    (2.0, 0.22), (3.0, 0.35), (4.0, 0.48), (5.0, 0.60), (6.0, 0.70),
    (7.0, 0.78), (8.0, 0.84), (9.0, 0.88), (10.0, 0.91), (11.0, 0.93),
)

# -3 dB frequency of w^2/(s+w)^2 is w*sqrt(sqrt(2)-1)
_CRITICAL_BW_FACTOR = math.sqrt(math.sqrt(2.0) - 1.0)


@dataclass(frozen=True)
class RigState:
    q: tuple[float, float] = (0.0, 0.0)
    qdot: tuple[float, float] = (0.0, 0.0)
    qddot: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class RotorOperatingPoint:
    rotor_speed: float  # rpm
    u_rel: float
    tsr: float
    ct: float
    thrust: float


def rpm_to_rad_s(rpm: float) -> float:
    return rpm * 2.0 * math.pi / 60.0


def tip_speed_ratio(rotor_speed_rpm: float, diameter: float, u: float) -> float:
    return rpm_to_rad_s(rotor_speed_rpm) * 0.5 * diameter / u


def disk_thrust(ct: float, u: float, diameter: float, rho: float = AIR_DENSITY) -> float:
    return 0.5 * rho * 0.25 * math.pi * diameter ** 2 * ct * u * u


class ThrustCurve:
    """Monotone cubic ``ct(tsr)`` with flat extrapolation.

    Evaluation is hand-rolled from the PCHIP coefficients; it sits in the
    inner simulation loop.
    """

    def __init__(self, table: Sequence[tuple[float, float]]):
        table = sorted((float(a), float(b)) for a, b in table)
        tsr = np.array([a for a, _ in table])
        ct = np.array([b for _, b in table])
        if len(tsr) < 2 or np.any(np.diff(tsr) <= 0):
            raise ValueError("thrust table needs at least two distinct tip-speed ratios")
        self._pchip = PchipInterpolator(tsr, ct, extrapolate=False)
        self._x = tsr.tolist()
        self._c = self._pchip.c.T.tolist()  # per-interval cubic coefficients
        self._lo, self._hi = float(ct[0]), float(ct[-1])

    def __call__(self, tsr: float) -> float:
        x = self._x
        if tsr <= x[0]:
            return self._lo
        if tsr >= x[-1]:
            return self._hi
        i = bisect.bisect_right(x, tsr) - 1
        c3, c2, c1, c0 = self._c[i]
        d = tsr - x[i]
        return ((c3 * d + c2) * d + c1) * d + c0


def anchored_thrust_table(base: Sequence[tuple[float, float]], tsr: float, ct: float):
    """Rescale ``base`` so that the interpolated curve passes through (tsr, ct)."""
    factor = ct / ThrustCurve(base)(tsr)
    return tuple((a, b * factor) for a, b in base)


def thrust_anchor_ct(thrust: float, u: float, diameter: float, rho: float = AIR_DENSITY) -> float:
    """Thrust coefficient that reproduces ``thrust`` at inflow ``u``."""
    return thrust / disk_thrust(1.0, u, diameter, rho)


class Rig:
    """Per-axis critically damped second-order tracking of the command.

    ``bandwidth`` is the -3 dB frequency in Hz (full scale). The update is
    the exact solution for a command held over the step. An infinite
    bandwidth makes the rig a pass-through of the commanded kinematics.
    """

    def __init__(self, bandwidth: float, dt: float, state: RigState | None = None):
        self.bandwidth = bandwidth
        self.dt = dt
        self.state = state or RigState()
        self.ideal = math.isinf(bandwidth)
        if not self.ideal:
            if not bandwidth > 0:
                raise ValueError("rig bandwidth must be positive")
            self.wn = 2 * math.pi * bandwidth / _CRITICAL_BW_FACTOR
            self._decay = math.exp(-self.wn * dt)

    def track(self, command: PlatformState) -> RigState:
        if self.ideal:
            self.state = RigState(tuple(command.q), tuple(command.qdot), tuple(command.qddot))
            return self.state
        wn, dt, dec = self.wn, self.dt, self._decay
        q, qd, qdd = [], [], []
        for axis in range(2):
            e0 = self.state.q[axis] - command.q[axis]
            ed0 = self.state.qdot[axis]
            b = ed0 + wn * e0
            e = (e0 + b * dt) * dec
            ed = (ed0 - wn * b * dt) * dec
            q.append(command.q[axis] + e)
            qd.append(ed)
            qdd.append(-wn * wn * e - 2 * wn * ed)
        self.state = RigState(tuple(q), tuple(qd), tuple(qdd))
        return self.state


def rig_track(command: PlatformState, rig: RigState, dt: float, bandwidth: float) -> RigState:
    tracker = Rig(bandwidth, dt, rig)
    return tracker.track(command)


class Rotor:
    def __init__(self, params: TurbineParams, rho: float = AIR_DENSITY):
        self.params = params
        self.rho = rho
        self.curve = ThrustCurve(params.thrust_table)
        self.omega = rpm_to_rad_s(params.rotor_speed)
        self.radius = 0.5 * params.rotor_diameter
        self.half_rho_area = 0.5 * rho * 0.25 * math.pi * params.rotor_diameter ** 2
        self.hub_height = params.hub_height
        self._warned = False

    def operating_point(self, u_rel: float) -> RotorOperatingPoint:
        if u_rel <= 0.0:
            if not self._warned:
                log.warning("rotor-relative inflow %.3g m/s <= 0; thrust clamped to zero", u_rel)
                self._warned = True
            return RotorOperatingPoint(self.params.rotor_speed, u_rel, math.inf, 0.0, 0.0)
        tsr = self.omega * self.radius / u_rel
        ct = self.curve(tsr)
        return RotorOperatingPoint(self.params.rotor_speed, u_rel, tsr, ct,
                                   self.half_rho_area * ct * u_rel * u_rel)

    def steady_thrust(self, u: float) -> float:
        """Thrust for a still rotor at inflow ``u``; zero (silently) for u <= 0."""
        if u <= 0.0:
            return 0.0
        return self.half_rho_area * self.curve(self.omega * self.radius / u) * u * u

    def thrust(self, u_inflow: float, rig: RigState) -> tuple[GenForce, RotorOperatingPoint]:
        u_rel = u_inflow - rig.qdot[0] - self.hub_height * rig.qdot[1]
        op = self.operating_point(u_rel)
        return GenForce(op.thrust * math.cos(rig.q[1]), op.thrust * self.hub_height), op


def rotor_thrust(u_inflow: float, rig: RigState, params: TurbineParams,
                 rho: float = AIR_DENSITY) -> tuple[GenForce, RotorOperatingPoint]:
    if u_inflow < 0:
        raise ValueError("inflow speed must be non-negative")
    return Rotor(params, rho).thrust(u_inflow, rig)


class LoadCell:
    """Tower-top load synthesis: aero + inertia/gravity of the physical RNA + noise."""

    def __init__(self, plant_truth: CompensationModel, noise_rms=(0.0, 0.0), seed: int | None = 0):
        self.truth = plant_truth
        self.noise_rms = np.broadcast_to(np.asarray(noise_rms, float), (2,)).copy()
        self.rng = np.random.default_rng(seed)
        m, k = plant_truth.M_n, plant_truth.K_n
        self._m = tuple(float(v) for v in m.ravel())
        self._k = tuple(float(v) for v in k.ravel())

    def noise_block(self, n: int) -> np.ndarray:
        return self.rng.standard_normal((n, 2)) * self.noise_rms

    def measure(self, f_aero: GenForce, rig: RigState, noise=(0.0, 0.0)) -> GenForce:
        m00, m01, m10, m11 = self._m
        k00, k01, k10, k11 = self._k
        (x, b), (xa, ba) = rig.q, rig.qddot
        return GenForce(f_aero.fx + m00 * xa + m01 * ba + k00 * x + k01 * b + noise[0],
                        f_aero.my + m10 * xa + m11 * ba + k10 * x + k11 * b + noise[1])


def load_cell(f_aero_true: GenForce, rig: RigState, plant_truth: CompensationModel,
              noise_rms=0.0, rng: np.random.Generator | None = None) -> GenForce:
    cell = LoadCell(plant_truth, noise_rms)
    noise = (0.0, 0.0)
    if np.any(cell.noise_rms > 0):
        rng = rng if rng is not None else np.random.default_rng(0)
        noise = tuple(rng.standard_normal(2) * cell.noise_rms)
    return cell.measure(f_aero_true, rig, noise)
