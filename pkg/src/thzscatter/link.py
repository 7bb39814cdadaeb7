"""Received power over the specular path and over directive-scattered paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .ds import (
    FVariant,
    ScatterGeometry,
    TxParams,
    power_from_field,
    scattered_field_sq_dual,
    scattered_field_sq_single,
)
from .emcore import (
    DEFAULT_CONFIG,
    IncidentWave,
    Material,
    PhysicsConfig,
    dbm,
    fresnel_reflection,
    rough_reflection_coefficient,
    scattering_loss_factor,
)
from .errors import DomainError


@dataclass(frozen=True)
class LinkGeometry:
    d_t: float
    d_r: float
    scatterer_length: float = 10.0
    scatterer_width: float = 1.0
    monostatic: bool = False

    def __post_init__(self):
        if not (self.d_t > 0 and self.d_r > 0):
            raise DomainError("link distances must be positive")
        if not (self.scatterer_length > 0 and self.scatterer_width > 0):
            raise DomainError("scatterer dimensions must be positive")
        if self.monostatic and self.d_t != self.d_r:
            raise DomainError("a monostatic link needs d_t == d_r")

    @property
    def path_length(self) -> float:
        return self.d_t + self.d_r


@dataclass(frozen=True)
class ScatterResult:
    theta_i: float
    material: str
    reflected_dbm: float
    scattered_dbm: float
    difference_db: float
    convention_id: str
    components: dict = field(default_factory=dict)


def reflected_received_power_w(material: Material, wave: IncidentWave, link: LinkGeometry, tx: TxParams,
                               cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
    """Friis power over the unfolded specular path, scaled by |Gamma_rough|^2."""
    lam = wave.wavelength(cfg)
    gamma = rough_reflection_coefficient(material, wave, cfg)
    g_t = tx.tx_gain(wave, cfg)
    g_r = tx.receive_gain(wave, cfg)
    d = link.path_length
    return tx.p_t * g_t * g_r * lam * lam * gamma * gamma / ((4.0 * math.pi) ** 2 * d * d)


def reflected_received_power(material, wave, link, tx, cfg=DEFAULT_CONFIG) -> float:
    """Specular reflected power in dBm."""
    return dbm(reflected_received_power_w(material, wave, link, tx, cfg))


def _geometry(wave: IncidentWave, link: LinkGeometry, direction: str) -> ScatterGeometry:
    if direction == "specular":
        return ScatterGeometry.specular(wave.theta_i, link.d_t, link.d_r, link.scatterer_length)
    if direction == "backscatter":
        if link.d_t != link.d_r:
            raise DomainError("backscatter needs a monostatic link (d_t == d_r)")
        return ScatterGeometry.monostatic(wave.theta_i, link.d_t, link.scatterer_length)
    raise DomainError(f"unknown scatter direction {direction!r}")


def scattered_received_power_w(material, wave, link, tx, cfg=DEFAULT_CONFIG, direction="specular",
                               f_variant=FVariant.LITERAL, dual=False) -> float:
    geom = _geometry(wave, link, direction)
    field_fn = scattered_field_sq_dual if dual else scattered_field_sq_single
    e_sq = field_fn(material, wave, geom, tx, cfg, f_variant)
    return power_from_field(e_sq, wave, g_r=tx.receive_gain(wave, cfg), cfg=cfg)


def scattered_received_power_ds(material, wave, link, tx, cfg=DEFAULT_CONFIG, direction="specular",
                                f_variant=FVariant.LITERAL, dual=False) -> float:
    """Directive-scattering power in dBm toward the specular direction or back to the TX.

    At grazing incidence the illuminated projection vanishes and the result
    is ``-inf``.
    """
    return dbm(scattered_received_power_w(material, wave, link, tx, cfg, direction, f_variant, dual))


def compare_scatter_vs_reflection(material, wave, link, tx, cfg=DEFAULT_CONFIG, convention_id="custom",
                                  f_variant=FVariant.LITERAL) -> ScatterResult:
    """Specular reflected power next to DS power scattered into the same direction."""
    refl = reflected_received_power(material, wave, link, tx, cfg)
    scat = scattered_received_power_ds(material, wave, link, tx, cfg, "specular", f_variant)
    diff = refl - scat if math.isfinite(refl) and math.isfinite(scat) else math.inf
    components = {
        "gamma_smooth": fresnel_reflection(material.eps_r, wave),
        "rho_s": scattering_loss_factor(material.h_rms, wave, cfg.loss_factor_variant, cfg),
        "tx_gain_dbi": 10.0 * math.log10(tx.tx_gain(wave, cfg)),
        "rx_gain_dbi": 10.0 * math.log10(tx.receive_gain(wave, cfg)),
    }
    return ScatterResult(wave.theta_i, material.name, refl, scat, diff, convention_id, components)
