"""Virtual hardware-in-the-loop co-simulation of a two-turbine floating wind farm."""
from .scaling import NOMINAL_SCALES, QuantityKind, derive_scales, to_full_scale, to_model_scale

__version__ = "0.1.0"

__all__ = ["NOMINAL_SCALES", "QuantityKind", "derive_scales", "to_full_scale", "to_model_scale"]
