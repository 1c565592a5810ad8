"""Surge/pitch equations of motion and a fixed-step RK4 integrator.

    (M_fowt + A_inf) q'' + R_hydro q' + K_hs_moor q = F_wave + F_aero

All quantities are full scale. The hot loop works on plain floats; the
dataclass API is kept for callers that step one state at a time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .farmmodel import TurbineParams


class DivergenceError(RuntimeError):
    def __init__(self, t: float, turbine: str | None = None):
        where = f" in turbine {turbine}" if turbine else ""
        super().__init__(f"non-finite platform state{where} at t={t:.6g} s")
        self.t = t
        self.turbine = turbine


@dataclass(frozen=True)
class GenForce:
    fx: float = 0.0  # N
    my: float = 0.0  # N m

    def __add__(self, other: "GenForce") -> "GenForce":
        return GenForce(self.fx + other.fx, self.my + other.my)

    def __sub__(self, other: "GenForce") -> "GenForce":
        return GenForce(self.fx - other.fx, self.my - other.my)

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.my])


ZERO_FORCE = GenForce()


@dataclass(frozen=True)
class PlatformState:
    t: float
    q: tuple[float, float] = (0.0, 0.0)
    qdot: tuple[float, float] = (0.0, 0.0)
    qddot: tuple[float, float] = (0.0, 0.0)

    @property
    def surge(self) -> float:
        return self.q[0]

    @property
    def pitch(self) -> float:
        return self.q[1]


@dataclass(frozen=True)
class WaveForceSpec:
    kind: Literal["zero", "step", "sinusoid"] = "zero"
    step_level: float = 0.0
    step_time: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "step", "sinusoid"):
            raise ValueError(f"unknown wave force kind {self.kind!r}")
        if self.kind == "sinusoid" and not self.frequency > 0:
            raise ValueError("sinusoidal wave force needs a positive frequency")


def wave_force_x(t: float, spec: WaveForceSpec) -> float:
    if spec.kind == "step":
        return spec.step_level if t < spec.step_time else 0.0
    if spec.kind == "sinusoid":
        return spec.amplitude * math.sin(2.0 * math.pi * spec.frequency * t)
    return 0.0


def wave_force(t: float, spec: WaveForceSpec, hub_height: float) -> GenForce:
    """Fictitious wave load, applied at the hub: ``[1, h_hub] * F_x``."""
    fx = wave_force_x(t, spec)
    return GenForce(fx, fx * hub_height)


class PlatformIntegrator:
    """RK4 integrator for one platform with precomputed scalar coefficients."""

    def __init__(self, params: TurbineParams, name: str | None = None):
        m = params.M_total
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not det > 0 or not math.isfinite(det):
            raise ValueError("singular total mass matrix")
        self.params = params
        self.name = name or params.name
        self.hub_height = float(params.hub_height)
        self._mi = (m[1, 1] / det, -m[0, 1] / det, -m[1, 0] / det, m[0, 0] / det)
        r, k = params.R_hydro, params.K_hs_moor
        self._r = tuple(float(v) for v in r.ravel())
        self._k = tuple(float(v) for v in k.ravel())

    def accel(self, x, b, xd, bd, fx, my):
        r00, r01, r10, r11 = self._r
        k00, k01, k10, k11 = self._k
        rx = fx - r00 * xd - r01 * bd - k00 * x - k01 * b
        rb = my - r10 * xd - r11 * bd - k10 * x - k11 * b
        i00, i01, i10, i11 = self._mi
        return i00 * rx + i01 * rb, i10 * rx + i11 * rb

    def step(self, t, y, dt, wave: WaveForceSpec, aero_fx: float, aero_my: float):
        """Advance ``y = (x, beta, xdot, betadot)`` by one step.

        The aerodynamic force is held over the step; the wave force is
        evaluated at the RK4 stage times.
        """
        h = self.hub_height
        x, b, xd, bd = y

        def f(tt, x, b, xd, bd):
            fw = wave_force_x(tt, wave)
            return self.accel(x, b, xd, bd, fw + aero_fx, fw * h + aero_my)

        half = 0.5 * dt
        a1x, a1b = f(t, x, b, xd, bd)
        x2, b2, xd2, bd2 = x + half * xd, b + half * bd, xd + half * a1x, bd + half * a1b
        a2x, a2b = f(t + half, x2, b2, xd2, bd2)
        x3, b3, xd3, bd3 = x + half * xd2, b + half * bd2, xd + half * a2x, bd + half * a2b
        a3x, a3b = f(t + half, x3, b3, xd3, bd3)
        x4, b4, xd4, bd4 = x + dt * xd3, b + dt * bd3, xd + dt * a3x, bd + dt * a3b
        a4x, a4b = f(t + dt, x4, b4, xd4, bd4)
        s = dt / 6.0
        out = (
            x + s * (xd + 2 * xd2 + 2 * xd3 + xd4),
            b + s * (bd + 2 * bd2 + 2 * bd3 + bd4),
            xd + s * (a1x + 2 * a2x + 2 * a3x + a4x),
            bd + s * (a1b + 2 * a2b + 2 * a3b + a4b),
        )
        if not all(math.isfinite(v) for v in out):
            raise DivergenceError(t + dt, self.name)
        return out

    def static_response(self, fx: float, my: float) -> tuple[float, float]:
        q = np.linalg.solve(self.params.K_hs_moor, [fx, my])
        return float(q[0]), float(q[1])


def eom_accel(state: PlatformState, f_wave: GenForce, f_aero: GenForce,
              params: TurbineParams) -> tuple[float, float]:
    rhs = (f_wave.as_array() + f_aero.as_array()
           - params.R_hydro @ np.asarray(state.qdot) - params.K_hs_moor @ np.asarray(state.q))
    try:
        acc = np.linalg.solve(params.M_total, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular total mass matrix") from exc
    return float(acc[0]), float(acc[1])


def step(state: PlatformState, forces: tuple[GenForce, GenForce], dt: float,
         params: TurbineParams) -> PlatformState:
    """One RK4 step with both forces held constant over the step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    integ = PlatformIntegrator(params)
    total = forces[0] + forces[1]
    y = integ.step(state.t, (*state.q, *state.qdot), dt, WaveForceSpec(), total.fx, total.my)
    acc = integ.accel(*y, total.fx, total.my)
    return PlatformState(state.t + dt, (y[0], y[1]), (y[2], y[3]), acc)


def mechanical_energy(params: TurbineParams, q, qdot) -> float:
    q, qdot = np.asarray(q, float), np.asarray(qdot, float)
    return 0.5 * float(qdot @ params.M_total @ qdot) + 0.5 * float(q @ params.K_hs_moor @ q)
