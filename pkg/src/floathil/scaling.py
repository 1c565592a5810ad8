"""Model-scale / full-scale conversion.

Ratios are stored as model/full. Length and velocity ratios are chosen
independently (no Froude similitude); everything else follows from them
assuming the same working fluid at both scales.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real


class QuantityKind(str, enum.Enum):
    LENGTH = "length"
    VELOCITY = "velocity"
    TIME = "time"
    FREQUENCY = "frequency"
    ACCELERATION = "acceleration"
    FORCE = "force"
    MOMENT = "moment"
    MASS = "mass"
    ANGLE = "angle"


@dataclass(frozen=True)
class ScaleSet:
    length_ratio: Real
    velocity_ratio: Real
    time_ratio: Real
    acceleration_ratio: Real
    frequency_ratio: Real
    force_ratio: Real
    mass_ratio: Real
    moment_ratio: Real

    def ratio(self, kind: QuantityKind | str) -> Real:
        kind = QuantityKind(kind)
        if kind is QuantityKind.ANGLE:
            return 1
        return getattr(self, f"{kind.value}_ratio")


def derive_scales(length_ratio: Real, velocity_ratio: Real) -> ScaleSet:
    """Build the full family of ratios from the length and velocity ratios.

    Pass :class:`fractions.Fraction` inputs to get exact rational ratios
    (e.g. ``Fraction(1, 150)``, ``Fraction(2, 5)`` gives a time ratio of
    exactly 1/60); float inputs give float ratios.
    """
    if not length_ratio > 0 or not velocity_ratio > 0:
        raise ValueError("scale ratios must be positive, got "
                         f"length={length_ratio!r}, velocity={velocity_ratio!r}")
    lr, vr = length_ratio, velocity_ratio
    if isinstance(lr, Rational) and isinstance(vr, Rational):
        lr, vr = Fraction(lr), Fraction(vr)
    time = lr / vr
    force = lr * lr * vr * vr
    return ScaleSet(
        length_ratio=lr,
        velocity_ratio=vr,
        time_ratio=time,
        acceleration_ratio=vr / time,
        frequency_ratio=1 / time,
        force_ratio=force,
        mass_ratio=lr * lr * lr,
        moment_ratio=force * lr,
    )


# 1:150 geometric, 1:2.5 velocity
NOMINAL_SCALES = derive_scales(Fraction(1, 150), Fraction(2, 5))


def _convert(value, ratio, to_model: bool):
    if isinstance(value, Rational) and isinstance(ratio, Rational):
        return value * ratio if to_model else value / ratio
    exact = Fraction(value) * Fraction(ratio) if to_model else Fraction(value) / Fraction(ratio)
    return float(exact)


def to_full_scale(value: Real, kind: QuantityKind | str, scales: ScaleSet = NOMINAL_SCALES):
    """Convert a model-scale value to full scale.

    Rational inputs stay rational, so the model -> full -> model round trip
    is exact. Float inputs are converted through exact rational arithmetic
    and rounded once, which keeps the round trip within one ulp.
    """
    return _convert(value, scales.ratio(kind), to_model=False)


def to_model_scale(value: Real, kind: QuantityKind | str, scales: ScaleSet = NOMINAL_SCALES):
    return _convert(value, scales.ratio(kind), to_model=True)


# Published test-campaign parameters: (model value, full-scale value, kind).
CAMPAIGN_PARAMETERS: dict[str, tuple[float, float, QuantityKind]] = {
    "rotor_diameter": (1.20, 178.4, QuantityKind.LENGTH),
    "hub_height": (0.84, 124.1, QuantityKind.LENGTH),
    "tower_base_height": (0.84, 8.8, QuantityKind.LENGTH),
    "platform_mass": (17.04, 5.6e7, QuantityKind.MASS),
    "rna_mass_physical": (3.31, 1.1e7, QuantityKind.MASS),
    "rna_mass_numerical": (0.20, 6.8e6, QuantityKind.MASS),
    "surge_frequency": (0.30, 0.005, QuantityKind.FREQUENCY),
    "pitch_frequency": (2.40, 0.040, QuantityKind.FREQUENCY),
}

# The published diameters imply 1:148.7 rather than 1:150.
KNOWN_SCALE_INCONSISTENCIES = frozenset({"rotor_diameter"})


def effective_length_ratio(model_length: float = 1.20, full_length: float = 178.4) -> float:
    return model_length / full_length


def campaign_discrepancies(scales: ScaleSet = NOMINAL_SCALES) -> dict[str, float]:
    """Relative error of each campaign model value converted to full scale."""
    out = {}
    for name, (model, full, kind) in CAMPAIGN_PARAMETERS.items():
        converted = to_full_scale(model, kind, scales)
        out[name] = (converted - full) / full
    return out
