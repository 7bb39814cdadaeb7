"""Directive scattering (effective roughness) model.

A cosine-power lobe steered toward the specular direction, optionally mixed
with a second lobe steered back toward the transmitter.  Scatter angles are
measured from the surface normal in the plane of incidence, positive on the
specular side, so the specular direction is ``theta_s = theta_i`` and the
backscatter direction is ``theta_s = -theta_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .emcore import (
    DEFAULT_CONFIG,
    FREE_SPACE_IMPEDANCE_APPROX,
    IncidentWave,
    Material,
    PhysicsConfig,
)
from .errors import DomainError, SingularityError

# Below this incidence the printed normaliser tends to zero and would blow up
# the scattered power; 1 degree is the smallest angle the published table uses.
ANGULAR_FLOOR = math.radians(0.5)


class FVariant(str, Enum):
    LITERAL = "literal"
    HEMISPHERE = "hemisphere"


@dataclass(frozen=True)
class ScatterGeometry:
    """Bistatic in-plane geometry around one illuminated surface element.

    ``psi`` is the angle from the specular direction to the scattered ray,
    ``psi_i`` the angle from the incident (backscatter) direction.
    """

    d_t: float
    d_r: float
    length_l: float
    theta_s: float
    psi: float
    psi_i: float

    def __post_init__(self):
        if not (self.d_t > 0 and self.d_r > 0 and self.length_l > 0):
            raise DomainError("distances and scatterer length must be positive")
        if not -math.pi / 2 - 1e-12 <= self.theta_s <= math.pi / 2 + 1e-12:
            raise DomainError(f"theta_s must lie in [-pi/2, pi/2], got {self.theta_s}")

    @classmethod
    def at_angle(cls, theta_i: float, theta_s: float, d_t: float, d_r: float, length_l: float):
        return cls(d_t, d_r, length_l, theta_s, theta_s - theta_i, theta_s + theta_i)

    @classmethod
    def specular(cls, theta_i: float, d_t: float, d_r: float, length_l: float):
        return cls.at_angle(theta_i, theta_i, d_t, d_r, length_l)

    @classmethod
    def monostatic(cls, theta_i: float, d: float, length_l: float):
        # psi = -2 theta_i and psi_i = 0 exactly, not via the subtraction above
        return cls(d, d, length_l, -theta_i, -2.0 * theta_i, 0.0)


@dataclass(frozen=True)
class TxParams:
    """Transmit power and antenna description.

    Give either a fixed linear gain ``g_t`` or an effective ``aperture`` (m^2);
    with an aperture the gain follows 4 pi A / lambda^2 at each frequency.
    The receive antenna copies the transmit one unless ``rx_gain`` or
    ``rx_aperture`` is set.
    """

    p_t: float
    g_t: float | None = None
    aperture: float | None = None
    rx_gain: float | None = None
    rx_aperture: float | None = None

    def __post_init__(self):
        if not self.p_t > 0:
            raise DomainError("transmit power must be positive")
        if (self.g_t is None) == (self.aperture is None):
            raise DomainError("give exactly one of g_t (fixed gain) or aperture (constant aperture)")
        if self.rx_gain is not None and self.rx_aperture is not None:
            raise DomainError("give at most one of rx_gain or rx_aperture")
        for v in (self.g_t, self.aperture, self.rx_gain, self.rx_aperture):
            if v is not None and not v > 0:
                raise DomainError("gains and apertures must be positive")

    @property
    def constant_aperture(self) -> bool:
        return self.aperture is not None

    def tx_gain(self, wave: IncidentWave, cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
        if self.g_t is not None:
            return self.g_t
        return aperture_to_gain(self.aperture, wave.wavelength(cfg))

    def receive_gain(self, wave: IncidentWave, cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
        if self.rx_gain is not None:
            return self.rx_gain
        if self.rx_aperture is not None:
            return aperture_to_gain(self.rx_aperture, wave.wavelength(cfg))
        return self.tx_gain(wave, cfg)

    def k_const(self, wave: IncidentWave, cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
        """sqrt(60 P_t G_t), the field constant in V."""
        return math.sqrt(60.0 * self.p_t * self.tx_gain(wave, cfg))


def aperture_to_gain(aperture: float, lam: float) -> float:
    return 4.0 * math.pi * aperture / (lam * lam)


def lobe_factor(psi, alpha):
    """((1 + cos psi) / 2) ** alpha; accepts arrays."""
    return (0.5 * (1.0 + np.cos(psi))) ** alpha


def _hemisphere_integrand(psi, alpha):
    return (0.5 * (1.0 + math.cos(psi))) ** alpha * math.sin(psi)


def _literal_integrand(theta_s, theta_i, alpha):
    return (0.5 * (1.0 + math.cos(theta_s - theta_i))) ** alpha * math.sin(theta_s)


def f_alpha_r(
    alpha_r: float,
    theta_i: float,
    variant: FVariant | str = FVariant.LITERAL,
    rel_tol: float = 1e-9,
) -> float:
    """Normalisation integral of the forward scattering lobe.

    ``literal`` integrates the lobe against sin(theta_s) over the whole
    incidence plane, which depends on theta_i and equals (pi/4) sin(theta_i)
    for alpha_r = 1.  ``hemisphere`` integrates over the lobe angle on
    [0, pi/2] and does not depend on theta_i.
    """
    variant = FVariant(variant)
    if not alpha_r >= 1:
        raise DomainError(f"alpha_r must be >= 1, got {alpha_r}")
    if not 0 <= theta_i <= math.pi / 2 + 1e-15:
        raise DomainError(f"theta_i must lie in [0, pi/2], got {theta_i}")
    if variant is FVariant.HEMISPHERE:
        val, _ = integrate.quad(
            _hemisphere_integrand, 0.0, math.pi / 2, args=(alpha_r,),
            epsabs=0.0, epsrel=rel_tol, limit=200,
        )
        return val
    if theta_i < ANGULAR_FLOOR:
        raise SingularityError(
            f"literal lobe normaliser vanishes at theta_i={math.degrees(theta_i):.3g} deg "
            f"(floor {math.degrees(ANGULAR_FLOOR)} deg); use the hemisphere variant"
        )
    # split at the lobe peak and at the sign change of sin(theta_s)
    pts = sorted({-math.pi / 2, 0.0, min(theta_i, math.pi / 2), math.pi / 2})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b > a:
            val, _ = integrate.quad(
                _literal_integrand, a, b, args=(theta_i, alpha_r),
                epsabs=0.0, epsrel=rel_tol, limit=200,
            )
            total += val
    return total


def peak_field_sq(
    material: Material,
    wave: IncidentWave,
    geom: ScatterGeometry,
    tx: TxParams,
    cfg: PhysicsConfig = DEFAULT_CONFIG,
    f_variant: FVariant | str = FVariant.LITERAL,
    f_value: float | None = None,
) -> float:
    """|E_s0|^2 = (S K / (d_t d_r))^2 * l cos(theta_i) / F, in (V/m)^2.

    ``f_value`` short-circuits the normaliser (callers evaluating many angles
    compute it once).
    """
    if f_value is None:
        f_value = f_alpha_r(material.alpha_r, wave.theta_i, f_variant, cfg.quadrature_rel_tol)
    if not f_value > 0:
        raise SingularityError(f"lobe normaliser is {f_value:.3g}; scattered field undefined")
    k = tx.k_const(wave, cfg)
    amp = material.s_coeff * k / (geom.d_t * geom.d_r)
    cos_i = 0.0 if abs(wave.theta_i - math.pi / 2) < 1e-15 else math.cos(wave.theta_i)
    return amp * amp * geom.length_l * cos_i / f_value


def scattered_field_sq_single(material, wave, geom, tx, cfg=DEFAULT_CONFIG,
                              f_variant=FVariant.LITERAL, f_value=None) -> float:
    """Single forward-lobe scattered field power |E_s|^2 in (V/m)^2."""
    e0 = peak_field_sq(material, wave, geom, tx, cfg, f_variant, f_value)
    return e0 * float(lobe_factor(geom.psi, material.alpha_r))


def dual_lobe_shape(psi, psi_i, lambda_mix, alpha_r, alpha_i):
    """Lambda * forward lobe + (1 - Lambda) * back lobe; accepts arrays."""
    return lambda_mix * lobe_factor(psi, alpha_r) + (1.0 - lambda_mix) * lobe_factor(psi_i, alpha_i)


def scattered_field_sq_dual(material, wave, geom, tx, cfg=DEFAULT_CONFIG,
                            f_variant=FVariant.LITERAL, f_value=None) -> float:
    """Forward lobe weighted by ``lambda_mix`` plus a backscatter lobe."""
    e0 = peak_field_sq(material, wave, geom, tx, cfg, f_variant, f_value)
    shape = dual_lobe_shape(geom.psi, geom.psi_i, material.lambda_mix,
                            material.alpha_r, material.alpha_i)
    return e0 * float(shape)


def power_from_field(e_sq: float, wave: IncidentWave | None = None, *, g_r: float | None = None,
                     aperture: float | None = None, cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
    """Received power in W from a field power density |E|^2.

    Either through an aperture, P = |E|^2 A_e / (120 pi), or through a gain,
    P = |E|^2 G_r lambda^2 / (480 pi^2), which needs ``wave``.
    """
    if not e_sq >= 0:
        raise DomainError("field power must be non-negative")
    if (g_r is None) == (aperture is None):
        raise DomainError("give exactly one of g_r or aperture")
    if aperture is not None:
        return e_sq * aperture / FREE_SPACE_IMPEDANCE_APPROX
    if wave is None:
        raise DomainError("gain form needs the wave for its wavelength")
    lam = wave.wavelength(cfg)
    return e_sq * g_r * lam * lam / (480.0 * math.pi ** 2)
