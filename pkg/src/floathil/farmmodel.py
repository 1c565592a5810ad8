"""Platform parameters and the 2x2 surge/pitch system matrices.

Coordinates: x along the wind, z up from still-water level, pitch positive
nose-down (a positive thrust at the hub gives positive surge and pitch).
The generalized coordinates are referenced to the still-water-level point
on the platform centreline.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

GRAVITY = 9.81


class CalibrationError(RuntimeError):
    """No admissible stiffness matrix reproduces the calibration targets."""

    def __init__(self, message: str, residuals: dict | None = None):
        super().__init__(message)
        self.residuals = residuals or {}


@dataclass(frozen=True)
class RigidBodyComponent:
    name: str
    mass: float
    x: float = 0.0
    z: float = 0.0
    inertia_yy: float = 0.0

    def __post_init__(self):
        if self.mass < 0 or self.inertia_yy < 0:
            raise ValueError(f"component {self.name!r}: mass and inertia must be >= 0")


@dataclass(frozen=True)
class CalibrationTargets:
    f_surge: float
    f_pitch: float
    static_force: float
    static_surge: float
    static_pitch: float
    hub_height: float
    mean_thrust: float | None = None
    mean_surge: float | None = None
    mean_pitch: float | None = None

    def __post_init__(self):
        if not (self.f_surge > 0 and self.f_pitch > 0):
            raise ValueError("calibration frequencies must be positive")
        if not self.f_surge < self.f_pitch:
            raise ValueError("surge frequency must be below pitch frequency")
        if self.static_force == 0:
            raise ValueError("static force must be non-zero")
        if (np.sign(self.static_surge) != np.sign(self.static_force)
                or np.sign(self.static_pitch) != np.sign(self.static_force)):
            raise ValueError("static deflections must have the sign of the applied force")

    @property
    def load_vector(self) -> np.ndarray:
        return self.static_force * np.array([1.0, self.hub_height])

    @property
    def static_vector(self) -> np.ndarray:
        return np.array([self.static_surge, self.static_pitch])


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def is_spd(a: np.ndarray) -> bool:
    a = np.asarray(a, dtype=float)
    if not np.allclose(a, a.T, rtol=1e-12, atol=0.0):
        return False
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class TurbineParams:
    M_fowt: np.ndarray
    A_inf: np.ndarray
    R_hydro: np.ndarray
    K_hs_moor: np.ndarray
    hub_height: float
    rotor_diameter: float
    thrust_table: tuple[tuple[float, float], ...]
    rotor_speed: float
    name: str = "wt"

    def __post_init__(self):
        for attr in ("M_fowt", "A_inf", "R_hydro", "K_hs_moor"):
            arr = _frozen(getattr(self, attr))
            if arr.shape != (2, 2) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{attr} must be a finite 2x2 matrix")
            object.__setattr__(self, attr, arr)
        object.__setattr__(self, "thrust_table",
                           tuple((float(a), float(b)) for a, b in self.thrust_table))
        if not is_spd(self.M_total):
            raise ValueError("M_fowt + A_inf must be symmetric positive definite")
        if not is_spd(self.K_hs_moor):
            raise ValueError("K_hs_moor must be symmetric positive definite")
        if np.any(np.diag(self.R_hydro) < 0):
            raise ValueError("R_hydro must have a non-negative diagonal")

    @property
    def M_total(self) -> np.ndarray:
        return self.M_fowt + self.A_inf


def assemble_mass_matrix(components: Iterable[RigidBodyComponent]) -> np.ndarray:
    m = np.zeros((2, 2))
    for c in components:
        m[0, 0] += c.mass
        m[0, 1] += c.mass * c.z
        m[1, 1] += c.inertia_yy + c.mass * (c.x ** 2 + c.z ** 2)
    m[1, 0] = m[0, 1]
    return m


def gravity_stiffness(components: Iterable[RigidBodyComponent], g: float = GRAVITY) -> np.ndarray:
    k = np.zeros((2, 2))
    k[1, 1] = -sum(c.mass * g * c.z for c in components)
    return k


def assemble_stiffness(mooring, components: Sequence[RigidBodyComponent], hydrostatic,
                       g: float = GRAVITY, check: bool = True) -> np.ndarray:
    """Sum mooring, hydrostatic and gravity restoring terms.

    With ``check`` set, an indefinite result (an unstable platform) raises
    :class:`CalibrationError`. A merely semi-definite sum is returned.
    """
    k = np.asarray(mooring, float) + np.asarray(hydrostatic, float) + gravity_stiffness(components, g)
    if check:
        eig = np.linalg.eigvalsh(0.5 * (k + k.T))
        if eig[0] < -1e-12 * max(1.0, abs(eig[-1])):
            raise CalibrationError("assembled stiffness is not positive semi-definite "
                                   f"(eigenvalues {eig})", {"eigenvalues": eig.tolist()})
    return k


def natural_frequencies(M_total, K) -> tuple[float, float]:
    """Undamped natural frequencies in Hz, ascending."""
    if not is_spd(M_total) or not is_spd(K):
        raise ValueError("natural_frequencies requires symmetric positive definite M and K")
    lam = linalg.eigh(np.asarray(K, float), np.asarray(M_total, float), eigvals_only=True)
    f = np.sqrt(lam) / (2 * math.pi)
    return float(f[0]), float(f[1])


def modal_damping_matrix(M_total, K, zetas: Sequence[float]) -> np.ndarray:
    """Damping matrix that is diagonal in the undamped modal basis."""
    lam, phi = linalg.eigh(np.asarray(K, float), np.asarray(M_total, float))
    omega = np.sqrt(lam)
    m = np.asarray(M_total, float)
    modal = np.diag(2.0 * np.asarray(zetas, float) * omega)
    r = m @ phi @ modal @ phi.T @ m
    return 0.5 * (r + r.T)


def _sym_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(w)) @ v.T


@dataclass(frozen=True)
class Calibration:
    stiffness: np.ndarray
    damping: np.ndarray
    static_response: np.ndarray
    static_residual: np.ndarray  # relative error per DOF
    feasibility: float  # 1.0 when the static targets are met exactly

    def __iter__(self):
        # allows ``K, R = calibrate(...)``
        return iter((self.stiffness, self.damping))


def _rotation_fit(M_total, targets: CalibrationTargets):
    lam1 = (2 * math.pi * targets.f_surge) ** 2
    lam2 = (2 * math.pi * targets.f_pitch) ** 2
    mh = _sym_sqrt(np.asarray(M_total, float))
    z = np.linalg.solve(mh, targets.load_vector)
    w = mh @ targets.static_vector
    mean_c = 0.5 * (1 / lam1 + 1 / lam2)
    half_c = 0.5 * (1 / lam1 - 1 / lam2)
    v = (w - mean_c * z) / half_c
    zmat = np.array([[z[0], z[1]], [-z[1], z[0]]])
    u = np.linalg.solve(zmat, v)
    return mh, lam1, lam2, u


def calibrate(M_total, targets: CalibrationTargets, zetas: Sequence[float] = (0.05, 0.03),
              tolerance: float = 0.05) -> Calibration:
    """Fit a symmetric stiffness matrix to the frequency and static targets.

    Every symmetric K with the two target frequencies can be written as
    ``M^1/2 Q(t) diag(w1^2, w2^2) Q(t)' M^1/2`` for a rotation angle t. The
    angle is the remaining unknown; it is chosen by least squares on the
    static response, measured in the mass-weighted norm, which has a closed
    form. The frequencies are therefore always met exactly.
    """
    M_total = np.asarray(M_total, float)
    if not is_spd(M_total):
        raise ValueError("M_total must be symmetric positive definite")
    mh, lam1, lam2, u = _rotation_fit(M_total, targets)
    norm = float(np.hypot(*u))
    c2, s2 = u / norm
    mean_l, half_l = 0.5 * (lam1 + lam2), 0.5 * (lam1 - lam2)
    core = np.array([[mean_l + half_l * c2, half_l * s2],
                     [half_l * s2, mean_l - half_l * c2]])
    k = mh @ core @ mh
    k = 0.5 * (k + k.T)
    static = np.linalg.solve(k, targets.load_vector)
    residual = static / targets.static_vector - 1.0
    if np.max(np.abs(residual)) > tolerance:
        raise CalibrationError(
            f"static targets missed by {residual.tolist()} (tolerance {tolerance})",
            {"static_residual": residual.tolist(), "feasibility": norm})
    r = modal_damping_matrix(M_total, k, zetas)
    return Calibration(stiffness=k, damping=r, static_response=static,
                       static_residual=residual, feasibility=norm)


@dataclass(frozen=True)
class PlatformDesign:
    """Inputs to the mass model and added-mass calibration."""
    components: tuple[RigidBodyComponent, ...]
    hub_height: float = 124.1
    added_mass_surge_fraction: float = 0.8
    added_mass_coupling: float = 0.0
    added_mass_pitch: float | None = None  # None: fitted so the static targets are met
    damping_ratios: tuple[float, float] = (0.05, 0.03)


@dataclass(frozen=True)
class PlatformCalibration:
    M_fowt: np.ndarray
    A_inf: np.ndarray
    K: np.ndarray
    R: np.ndarray
    K_gravity: np.ndarray
    calibration: Calibration

    @property
    def K_hydro_mooring(self) -> np.ndarray:
        """Stiffness left for hydrostatics and mooring once gravity is removed."""
        return self.K - self.K_gravity


def _added_mass(m_fowt, design: PlatformDesign, a22: float) -> np.ndarray:
    return np.array([[design.added_mass_surge_fraction * m_fowt[0, 0], design.added_mass_coupling],
                     [design.added_mass_coupling, a22]])


def fit_added_pitch_inertia(m_fowt, design: PlatformDesign, targets: CalibrationTargets,
                            upper_factor: float = 10.0, n_grid: int = 200) -> float | None:
    """Smallest non-negative pitch added inertia making the static targets exact.

    Returns None when no root exists in ``[0, upper_factor * M_fowt[1,1]]``.
    """
    def gap(a22):
        a = _added_mass(m_fowt, design, a22)
        mt = m_fowt + a
        if not is_spd(mt):
            return np.nan
        return float(np.hypot(*_rotation_fit(mt, targets)[3])) - 1.0

    grid = np.linspace(0.0, upper_factor * m_fowt[1, 1], n_grid)
    vals = [gap(a) for a in grid]
    for lo, hi, vlo, vhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if np.isnan(vlo) or np.isnan(vhi):
            continue
        if vlo == 0.0:
            return float(lo)
        if vlo * vhi < 0:
            return float(brentq(gap, lo, hi, xtol=1e-12 * m_fowt[1, 1], rtol=1e-15))
    return None


def calibrate_platform(design: PlatformDesign, targets: CalibrationTargets,
                       tolerance: float = 0.05) -> PlatformCalibration:
    m_fowt = assemble_mass_matrix(design.components)
    a22 = design.added_mass_pitch
    if a22 is None:
        a22 = fit_added_pitch_inertia(m_fowt, design, targets)
        if a22 is None:
            a22 = 0.0
    a_inf = _added_mass(m_fowt, design, a22)
    cal = calibrate(m_fowt + a_inf, targets, design.damping_ratios, tolerance)
    return PlatformCalibration(M_fowt=m_fowt, A_inf=a_inf, K=cal.stiffness, R=cal.damping,
                               K_gravity=gravity_stiffness(design.components), calibration=cal)


DEFAULT_COMPONENTS = (
    RigidBodyComponent("platform", 5.6e7, 0.0, -20.0, 5.6e7 * 15.0 ** 2),
    RigidBodyComponent("tower", 1.0e6, 0.0, 50.0, 1.0e6 * 106.8 ** 2 / 12.0),
    RigidBodyComponent("rna", 6.8e6, 0.0, 124.1, 0.0),
)

REFERENCE_TARGETS = CalibrationTargets(
    f_surge=0.005, f_pitch=0.040,
    static_force=-1.1e6, static_surge=-12.0, static_pitch=math.radians(-2.0),
    hub_height=124.1,
    mean_thrust=1.841e6, mean_surge=20.1, mean_pitch=math.radians(3.8),
)


def write_matrix_csv(path: str | Path, matrices: dict[str, np.ndarray]) -> None:
    """Dump named 2x2 matrices as ``name,i,j,value`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["matrix", "row", "col", "value"])
        for name, mat in matrices.items():
            mat = np.asarray(mat, float)
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    w.writerow([name, i, j, f"{mat[i, j]:.12g}"])
