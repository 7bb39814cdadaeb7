"""Two-scale monostatic radar cross section of a rough plate.

The large-scale plate term is damped by the height characteristic function;
the small-scale term averages tilted-patch cross sections over a Gaussian
slope distribution.  Cross sections are per unit length (2D), in metres.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .emcore import DEFAULT_CONFIG, IncidentWave, Material, PhysicsConfig, db10
from .errors import DomainError, SingularityError
from .quadrature import composite_nodes, refine_until_converged

# Patches within this slope distance of the shadow boundary are dropped.
SHADOW_MARGIN = 1e-9
SLOPE_TRUNCATION = 6.0
INNER_REL_TOL = 1e-10
OUTER_REL_TOL = 1e-8


class RcsPolarization(str, Enum):
    VV = "VV"
    HH = "HH"

    @classmethod
    def parse(cls, value) -> "RcsPolarization":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise DomainError(f"unknown RCS polarization {value!r}") from None


# rms tilt of the large-scale facets: a nominally flat wall or plate
DEFAULT_SIGMA_L = 0.05
SMALL_SCALE_SLOPE = "small-scale"


@dataclass(frozen=True)
class RcsSurfaceParams:
    """Plate width plus roughness statistics.

    ``h_rms`` and ``l_c`` describe the small-scale roughness inside each
    patch; ``sigma_l`` is the rms slope of the patches themselves.
    """

    width_w: float
    h_rms: float
    l_c: float
    sigma_l: float
    patch_half_length: float
    polarization: RcsPolarization = RcsPolarization.HH

    def __post_init__(self):
        object.__setattr__(self, "polarization", RcsPolarization.parse(self.polarization))
        if not self.width_w > 0:
            raise DomainError("width_w must be positive")
        if not self.h_rms >= 0:
            raise DomainError("h_rms must be >= 0")
        if not self.l_c > 0:
            raise DomainError("l_c must be positive")
        if not self.sigma_l > 0:
            raise DomainError("sigma_l must be positive")
        if not self.patch_half_length > 0:
            raise DomainError("patch_half_length must be positive")

    @classmethod
    def from_material(cls, material: Material, width_w: float = 1.0,
                      sigma_l: float | str | None = None,
                      patch_half_length: float | None = None, polarization="HH"):
        """Surface for ``material``; ``patch_half_length`` defaults to 10 l_c.

        ``sigma_l`` defaults to :data:`DEFAULT_SIGMA_L`; pass ``"small-scale"``
        to use the small-scale slope h_rms / l_c instead.
        """
        if sigma_l is None:
            sigma_l = DEFAULT_SIGMA_L
        elif sigma_l == SMALL_SCALE_SLOPE:
            # a perfectly flat surface has no slope spread; Q vanishes anyway
            sigma_l = material.h_rms / material.l_c or 1e-6
        if patch_half_length is None:
            patch_half_length = 10.0 * material.l_c
        return cls(width_w, material.h_rms, material.l_c, sigma_l, patch_half_length, polarization)


@dataclass(frozen=True)
class RcsBreakdown:
    """Linear cross sections (m) and the roughness weight; ``*_db`` give dB·m."""

    sigma_total: float
    sigma_smooth: float
    sigma_rough: float
    chi_s: float
    shadowed_mass: float = 0.0

    @property
    def sigma_total_db(self) -> float:
        return db10(self.sigma_total)

    @property
    def sigma_smooth_db(self) -> float:
        return db10(self.sigma_smooth)

    @property
    def sigma_rough_db(self) -> float:
        return db10(self.sigma_rough)


def _cos(theta):
    return 0.0 if abs(theta - math.pi / 2) < 1e-15 else math.cos(theta)


def sigma_smooth(surface: RcsSurfaceParams, wave: IncidentWave, cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
    """Plate term (2 pi w^2 / lambda) [cos(t) sinc(k0 w cos t)]^2, in metres."""
    lam = wave.wavelength(cfg)
    k0 = 2.0 * math.pi / lam
    c = _cos(wave.theta_i)
    arg = k0 * surface.width_w * c
    sinc = 1.0 if arg == 0.0 else math.sin(arg) / arg
    return 2.0 * math.pi * surface.width_w ** 2 / lam * (c * sinc) ** 2


def chi_s(surface: RcsSurfaceParams, wave: IncidentWave, cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
    """Height characteristic function exp(-k0^2 h^2 cos^2 t)."""
    if not surface.h_rms >= 0:
        raise DomainError("h_rms must be >= 0")
    k0 = 2.0 * math.pi / wave.wavelength(cfg)
    return math.exp(-(k0 * surface.h_rms * _cos(wave.theta_i)) ** 2)


def s_pp_monostatic(theta_i, omega, pol="VV"):
    """Backscatter coefficient of a patch tilted by ``omega``; accepts arrays."""
    pol = RcsPolarization.parse(pol)
    local = np.asarray(theta_i) - np.asarray(omega)
    if pol is RcsPolarization.VV:
        out = 2.0 * (1.0 + np.sin(local) ** 2)
    else:
        out = 2.0 * np.cos(local) ** 2
    return float(out) if np.ndim(out) == 0 else out


def _bracket_over_a(a, r):
    """[chi2 - |chi|^2] / a with a = v_y^2 h^2 and R(x) = r; the a -> 0 limit is r."""
    a = np.asarray(a, dtype=float)
    safe = np.where(a > 0, a, 1.0)
    ar = safe * r
    if np.any(ar > 700.0):
        # exp(a r - a) form avoids overflow once a r is large
        out = np.where(ar > 700.0,
                       (np.exp(ar - safe) - np.exp(-safe)) / safe,
                       np.exp(-safe) * np.expm1(np.minimum(ar, 700.0)) / safe)
    else:
        out = np.expm1(ar) * (np.exp(-safe) / safe)
    if np.all(a > 0):
        return out
    return np.where(a > 0, out, r)


def _cutoff(l_c, a_max, lp):
    # beyond this the correlation tail is below 1e-17 of the peak
    return min(lp, l_c * math.sqrt(math.log(max(a_max, 1.0)) + 40.0))


def _window_transform(v_x, a, l_c, lp, rel_tol=INNER_REL_TOL):
    """2 * int_0^Lp (1 - x/Lp) [bracket/a](x) cos(v_x x) dx for arrays v_x, a.

    The x-integrand's odd part vanishes, so the full-window transform is real.
    """
    v_x = np.atleast_1d(np.asarray(v_x, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    x_end = _cutoff(l_c, float(a.max()), lp)
    feature = 2.0 * l_c / math.sqrt(max(float(a.max()), 1.0))
    vmax = float(np.abs(v_x).max())
    if vmax > 0:
        feature = min(feature, 2.0 * math.pi / vmax)
    panels = max(4, int(math.ceil(x_end / feature)))

    def evaluate(n):
        x, w = composite_nodes(0.0, x_end, n)
        r = np.exp(-(x / l_c) ** 2)
        tri = 1.0 - x / lp
        f = _bracket_over_a(a[:, None], r[None, :]) * tri[None, :] * np.cos(v_x[:, None] * x[None, :])
        return 2.0 * (f @ w)

    # scale for the absolute floor: the un-oscillating integral
    peak = 2.0 * float(np.max(_bracket_over_a(a, 1.0))) * l_c
    val, _, ok = refine_until_converged(evaluate, panels, rel_tol, abs_floor=1e-15 * peak)
    if not ok:
        warnings.warn("patch transform did not converge to tolerance", RuntimeWarning, stacklevel=3)
    return val


def _patch_wavevector(k0, theta_i, h_x):
    omega = np.arctan(h_x)
    local = theta_i - omega
    return omega, local, 2.0 * k0 * np.cos(local), 2.0 * k0 * np.sin(local)


def q_monostatic(surface: RcsSurfaceParams, wave: IncidentWave, h_x: float,
                 cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
    """Backscatter Q factor of one small patch with slope ``h_x``."""
    if not math.isfinite(h_x):
        raise DomainError("h_x must be finite")
    k0 = 2.0 * math.pi / wave.wavelength(cfg)
    _, local, v_y, v_x = _patch_wavevector(k0, wave.theta_i, h_x)
    if abs(abs(local) - math.pi / 2) < 1e-12:
        raise SingularityError("v_y = 0: the patch is viewed exactly edge-on")
    if surface.h_rms == 0:
        return 0.0
    a = (v_y * surface.h_rms) ** 2
    j = _window_transform(v_x, a, surface.l_c, surface.patch_half_length)[0]
    return k0 ** 3 * (1.0 + h_x * h_x) * surface.h_rms ** 2 * j


def q_monostatic_complex(surface: RcsSurfaceParams, wave: IncidentWave, h_x: float,
                         cfg: PhysicsConfig = DEFAULT_CONFIG, panels: int = 512) -> complex:
    """Q from the full two-sided window with the complex kernel exp(-j v_x x).

    Used to check that the imaginary part cancels; not used in the cross section.
    """
    k0 = 2.0 * math.pi / wave.wavelength(cfg)
    _, local, v_y, v_x = _patch_wavevector(k0, wave.theta_i, h_x)
    if abs(abs(local) - math.pi / 2) < 1e-12:
        raise SingularityError("v_y = 0: the patch is viewed exactly edge-on")
    if surface.h_rms == 0:
        return 0j
    lp = surface.patch_half_length
    a = (v_y * surface.h_rms) ** 2
    x_end = _cutoff(surface.l_c, a, lp)
    # panels on each side, mirrored so the kink at x = 0 sits on a panel edge
    xr, wr = composite_nodes(0.0, x_end, panels)
    x = np.concatenate([-xr[::-1], xr])
    w = np.concatenate([wr[::-1], wr])
    g = _bracket_over_a(a, np.exp(-(x / surface.l_c) ** 2)) * (1.0 - np.abs(x) / lp)
    integral = np.sum(w * g * np.exp(-1j * v_x * x))
    return k0 ** 3 * (1.0 + h_x * h_x) * surface.h_rms ** 2 * complex(integral)


def slope_pdf(h_x, sigma_l):
    return np.exp(-0.5 * (np.asarray(h_x) / sigma_l) ** 2) / (math.sqrt(2.0 * math.pi) * sigma_l)


@dataclass(frozen=True)
class RoughTerm:
    value: float
    shadowed_mass: float
    panels: int


def shadow_slope(theta_i: float) -> float:
    """Patch slope at which the local incidence reaches grazing (-cot theta_i)."""
    if theta_i <= 0.0:
        return -math.inf
    return -1.0 / math.tan(theta_i)


def sigma_rough_detail(surface: RcsSurfaceParams, wave: IncidentWave,
                       cfg: PhysicsConfig = DEFAULT_CONFIG, rel_tol: float = OUTER_REL_TOL,
                       panels: int | None = None) -> RoughTerm:
    """Slope-averaged small-patch cross section with diagnostics.

    ``panels`` fixes the outer Gauss-Legendre panel count instead of refining
    until ``rel_tol`` is met.

    The slope integral is truncated at +-6 sigma_l.  Patches tilted past the
    point where the local incidence reaches grazing face away from the radar
    and are excluded; ``shadowed_mass`` is the slope probability dropped.
    """
    if surface.h_rms == 0:
        return RoughTerm(0.0, 0.0, 0)
    k0 = 2.0 * math.pi / wave.wavelength(cfg)
    lim = SLOPE_TRUNCATION * surface.sigma_l
    # the integrand jumps at the shadow boundary (VV), so it must be a panel edge
    lower = max(-lim, shadow_slope(wave.theta_i) + SHADOW_MARGIN)
    shadowed = 0.0
    if lower > -lim:
        shadowed = 0.5 * (math.erf(lower / (math.sqrt(2.0) * surface.sigma_l))
                          - math.erf(-SLOPE_TRUNCATION / math.sqrt(2.0)))
    if lower >= lim:
        return RoughTerm(0.0, shadowed, 0)

    def evaluate(n):
        h, w = composite_nodes(lower, lim, n)
        omega, _, v_y, v_x = _patch_wavevector(k0, wave.theta_i, h)
        a = (v_y * surface.h_rms) ** 2
        j = _window_transform(v_x, a, surface.l_c, surface.patch_half_length)
        q = k0 ** 3 * (1.0 + h * h) * surface.h_rms ** 2 * j
        s = s_pp_monostatic(wave.theta_i, omega, surface.polarization)
        return float(np.sum(w * s * s * q * slope_pdf(h, surface.sigma_l)))

    if panels is not None:
        return RoughTerm(max(evaluate(panels), 0.0), shadowed, panels)
    val, panels, ok = refine_until_converged(evaluate, 4, rel_tol, max_panels=1 << 10)
    if not ok:
        warnings.warn("slope average did not converge to tolerance", RuntimeWarning, stacklevel=2)
    return RoughTerm(max(float(val), 0.0), shadowed, panels)


def sigma_rough(surface: RcsSurfaceParams, wave: IncidentWave, cfg: PhysicsConfig = DEFAULT_CONFIG) -> float:
    return sigma_rough_detail(surface, wave, cfg).value


def rcs_total(surface: RcsSurfaceParams, wave: IncidentWave, cfg: PhysicsConfig = DEFAULT_CONFIG) -> RcsBreakdown:
    """sigma_rough + |chi_s|^2 sigma_smooth, with its parts."""
    smooth = sigma_smooth(surface, wave, cfg)
    chi = chi_s(surface, wave, cfg)
    rough = sigma_rough_detail(surface, wave, cfg)
    return RcsBreakdown(rough.value + chi * chi * smooth, smooth, rough.value, chi, rough.shadowed_mass)


def rcs_received_power(sigma_db: float, d: float, p_t_dbm: float, gain_dbi: float, lam: float) -> float:
    """Monostatic radar equation in dB; ``sigma_db`` in dB·m^2 or dB·m as supplied."""
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")
    if not lam > 0:
        raise DomainError("wavelength must be positive")
    return (p_t_dbm + 2.0 * gain_dbi + 20.0 * math.log10(lam) + sigma_db
            - 30.0 * math.log10(4.0 * math.pi) - 40.0 * math.log10(d))
