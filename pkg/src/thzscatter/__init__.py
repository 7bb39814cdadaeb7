"""Rough-surface scattering and reflection models for 1 GHz to 1 THz links."""

__version__ = "0.1.0"

from .emcore import (  # noqa: E402
    DEFAULT_CONFIG,
    IncidentWave,
    LossFactorVariant,
    Material,
    PhysicsConfig,
    Polarization,
    TABLE1_MATERIALS,
    bessel_i0,
    classify_surface,
    critical_height,
    fresnel_reflection,
    rough_reflection_coefficient,
    scattering_loss_factor,
    wavelength,
)
from .errors import ConfigError, DomainError, ParseError, ScatterError, SingularityError  # noqa: E402
