"""Material files and scenario presets (INI-style key-value documents).

A material file holds one section per material with exactly the keys in
``MATERIAL_KEYS``.  A preset file describes a whole scenario: grids, link,
antennas, physics conventions and RCS surface options.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .ds import FVariant, TxParams
from .emcore import (
    LossFactorVariant,
    Material,
    PhysicsConfig,
    Polarization,
)
from .errors import ConfigError, DomainError, ParseError
from .link import LinkGeometry
from .rcs import RcsPolarization

MATERIAL_KEYS = ("name", "eps_r", "h_rms_um", "l_c_um", "s_coeff", "alpha_r", "alpha_i", "lambda_mix")
MODELS = ("ds_backscatter", "rcs_monostatic", "reflection", "ds_specular")

_FREQ_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*([kMGT]?Hz)?\s*$", re.IGNORECASE)
_FREQ_SCALE = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}


def parse_frequency(text: str | float) -> float:
    """'500GHz', '1 THz', '142e9' -> Hz."""
    if isinstance(text, (int, float)):
        f = float(text)
    else:
        m = _FREQ_RE.match(str(text))
        if not m:
            raise ConfigError(f"cannot parse frequency {text!r}")
        try:
            f = float(m.group(1)) * _FREQ_SCALE[(m.group(2) or "Hz").lower()]
        except ValueError:
            raise ConfigError(f"cannot parse frequency {text!r}") from None
    if not f > 0 or not math.isfinite(f):
        raise DomainError(f"frequency must be positive and finite, got {text!r}")
    return f


def parse_angle_grid(text: str) -> list[float]:
    """Degrees as a comma list ('1, 30, 45') or inclusive range ('1:89:1')."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"angle range must be start:stop:step, got {text!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


# ---------------------------------------------------------------- materials

def _um_to_text(metres: float) -> str:
    # shift the shortest round-trip decimal by six places; exact in both directions
    d = Decimal(repr(float(metres))).scaleb(6).normalize()
    text = format(d, "f")
    return text if "." in text else text + ".0"


def _um_to_metres(text: str) -> float:
    try:
        d = Decimal(text.strip())
    except InvalidOperation:
        raise ValueError(f"not a number: {text!r}") from None
    return float(d.scaleb(-6))


def material_to_section(m: Material) -> dict[str, str]:
    return {
        "name": m.name,
        "eps_r": repr(m.eps_r),
        "h_rms_um": _um_to_text(m.h_rms),
        "l_c_um": _um_to_text(m.l_c),
        "s_coeff": repr(m.s_coeff),
        "alpha_r": repr(m.alpha_r),
        "alpha_i": repr(m.alpha_i),
        "lambda_mix": repr(m.lambda_mix),
    }


def material_from_section(section, where="") -> Material:
    keys = set(section.keys())
    missing = [k for k in MATERIAL_KEYS if k not in keys]
    extra = sorted(keys - set(MATERIAL_KEYS))
    if missing or extra:
        raise ConfigError(f"{where}material keys must be exactly {MATERIAL_KEYS}; "
                          f"missing {missing}, unexpected {extra}")
    try:
        return Material(
            name=section["name"].strip(),
            eps_r=float(section["eps_r"]),
            h_rms=_um_to_metres(section["h_rms_um"]),
            l_c=_um_to_metres(section["l_c_um"]),
            s_coeff=float(section["s_coeff"]),
            alpha_r=float(section["alpha_r"]),
            alpha_i=float(section["alpha_i"]),
            lambda_mix=float(section["lambda_mix"]),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}{exc}") from None


def loads_materials(text: str, source="<string>") -> list[Material]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(source))
    except configparser.Error as exc:
        raise ParseError(str(exc), path=source) from None
    return [material_from_section(parser[s], f"{source}[{s}]: ") for s in parser.sections()]


def dumps_materials(materials) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    for m in materials:
        parser[m.name] = material_to_section(m)
    lines = []
    for m in materials:
        lines.append(f"[{m.name}]")
        for k in MATERIAL_KEYS:
            lines.append(f"{k} = {parser[m.name][k]}")
        lines.append("")
    return "\n".join(lines)


def load_materials(path) -> list[Material]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    return loads_materials(text, source=path)


def save_materials(materials, path) -> None:
    Path(path).write_text(dumps_materials(materials), encoding="utf-8", newline="\n")


def data_path(*parts) -> Path:
    return Path(__file__).resolve().parent.joinpath(*parts)


def table1_materials() -> list[Material]:
    return load_materials(data_path("materials", "paper_table1.cfg"))


def resolve_material(ref: str, library=None) -> Material:
    """A material by name (from ``library`` or the shipped table) or from a file."""
    library = table1_materials() if library is None else library
    for m in library:
        if m.name == ref:
            return m
    p = Path(ref)
    if p.suffix == ".cfg" or p.exists():
        found = load_materials(p)
        if len(found) != 1:
            raise ConfigError(f"{ref}: expected exactly one material, found {len(found)}")
        return found[0]
    names = ", ".join(m.name for m in library)
    raise ConfigError(f"unknown material {ref!r} (known: {names})")


# ------------------------------------------------------------------ presets

@dataclass(frozen=True)
class RcsOptions:
    polarization: RcsPolarization = RcsPolarization.HH
    sigma_l: float | str = 0.05
    patch_half_length_lc: float = 10.0


@dataclass(frozen=True)
class ProfileOptions:
    """Angular-profile measurement setup (fitting scenarios)."""

    theta_s_deg: tuple = ()
    radius_m: float = 1.5
    tx_power_dbm: float = 0.0
    antenna_gain_dbi: float = 0.0
    hpbw_deg: float = 8.0
    beam_convolution: bool = False
    include_reflection: bool = True


@dataclass(frozen=True)
class Scenario:
    name: str
    models: tuple
    frequencies: tuple
    theta_i: tuple
    materials: tuple
    link: LinkGeometry
    tx: TxParams
    cfg: PhysicsConfig
    polarization: Polarization = Polarization.PERPENDICULAR
    f_variant: FVariant = FVariant.LITERAL
    rcs: RcsOptions = field(default_factory=RcsOptions)
    profile: ProfileOptions | None = None
    convention_id: str = ""

    def describe(self) -> dict:
        """Plain-data view for metadata sidecars."""
        return {
            "name": self.name,
            "convention_id": self.convention_id,
            "models": list(self.models),
            "frequencies_hz": list(self.frequencies),
            "theta_i_deg": [math.degrees(t) for t in self.theta_i],
            "materials": [material_to_section(m) for m in self.materials],
            "link": vars(self.link).copy(),
            "tx": vars(self.tx).copy(),
            "physics": {
                "speed_of_light": self.cfg.speed_of_light,
                "loss_factor_variant": self.cfg.loss_factor_variant.value,
                "quadrature_rel_tol": self.cfg.quadrature_rel_tol,
                "polarization": self.polarization.value,
                "f_variant": self.f_variant.value,
            },
            "rcs": {
                "polarization": self.rcs.polarization.value,
                "sigma_l": self.rcs.sigma_l,
                "patch_half_length_lc": self.rcs.patch_half_length_lc,
            },
            "profile": None if self.profile is None else vars(self.profile).copy(),
        }


def _get(parser, section, key, default=None, conv=str):
    if not parser.has_section(section) or not parser.has_option(section, key):
        if default is None:
            raise ConfigError(f"missing [{section}] {key}")
        raw = default
    else:
        raw = parser.get(section, key)
    if not isinstance(raw, str):
        return raw
    try:
        return conv(raw)
    except (ValueError, ConfigError, DomainError) as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _sigma_l(text: str):
    t = text.strip().lower()
    return "small-scale" if t in ("small-scale", "h_rms/l_c") else float(t)


def loads_scenario(text: str, source="<string>", base_dir: Path | None = None) -> Scenario:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(source))
    except configparser.Error as exc:
        raise ParseError(str(exc), path=source) from None

    name = _get(parser, "scenario", "name")
    models = tuple(m.strip() for m in _get(parser, "scenario", "models").split(",") if m.strip())
    bad = [m for m in models if m not in MODELS]
    if bad or not models:
        raise ConfigError(f"{source}: unknown models {bad}; choose from {MODELS}")
    freqs = tuple(parse_frequency(f) for f in _get(parser, "scenario", "frequencies").split(","))
    thetas = tuple(math.radians(t) for t in _get(parser, "scenario", "theta_i_deg", conv=parse_angle_grid))

    material_file = _get(parser, "scenario", "material_file", "paper_table1.cfg")
    mpath = Path(material_file)
    if not mpath.is_absolute():
        local = (base_dir / mpath) if base_dir else None
        mpath = local if local is not None and local.exists() else data_path("materials", material_file)
    library = load_materials(mpath)
    names = [n.strip() for n in _get(parser, "scenario", "materials").split(",") if n.strip()]
    mats = tuple(resolve_material(n, library) for n in names)

    link = LinkGeometry(
        d_t=_get(parser, "link", "d_t_m", conv=float),
        d_r=_get(parser, "link", "d_r_m", conv=float),
        scatterer_length=_get(parser, "link", "scatterer_length_m", 10.0, float),
        scatterer_width=_get(parser, "link", "scatterer_width_m", 1.0, float),
        monostatic=_get(parser, "link", "monostatic", False, _bool),
    )
    if parser.has_option("tx", "p_t_dbm"):
        p_t = 10 ** ((_get(parser, "tx", "p_t_dbm", conv=float) - 30.0) / 10.0)
    else:
        p_t = _get(parser, "tx", "p_t_w", conv=float)
    if parser.has_option("tx", "aperture_cm2"):
        tx = TxParams(p_t, aperture=_get(parser, "tx", "aperture_cm2", conv=float) * 1e-4)
    elif parser.has_option("tx", "gain_dbi"):
        tx = TxParams(p_t, g_t=10 ** (_get(parser, "tx", "gain_dbi", conv=float) / 10.0))
    else:
        raise ConfigError(f"{source}: [tx] needs aperture_cm2 or gain_dbi")

    cfg = PhysicsConfig(
        speed_of_light=_get(parser, "physics", "speed_of_light", 299_792_458.0, float),
        loss_factor_variant=_get(parser, "physics", "loss_factor_variant", "ament", LossFactorVariant),
        quadrature_rel_tol=_get(parser, "physics", "quadrature_rel_tol", 1e-9, float),
    )
    rcs = RcsOptions(
        polarization=_get(parser, "rcs", "polarization", "HH", RcsPolarization.parse),
        sigma_l=_get(parser, "rcs", "sigma_l", "0.05", _sigma_l),
        patch_half_length_lc=_get(parser, "rcs", "patch_half_length_lc", 10.0, float),
    )
    profile = None
    if parser.has_section("profile"):
        profile = ProfileOptions(
            theta_s_deg=tuple(_get(parser, "profile", "theta_s_deg", "-80:80:10", parse_angle_grid)),
            radius_m=_get(parser, "profile", "radius_m", 1.5, float),
            tx_power_dbm=_get(parser, "profile", "tx_power_dbm", conv=float),
            antenna_gain_dbi=_get(parser, "profile", "antenna_gain_dbi", conv=float),
            hpbw_deg=_get(parser, "profile", "hpbw_deg", 8.0, float),
            beam_convolution=_get(parser, "profile", "beam_convolution", False, _bool),
            include_reflection=_get(parser, "profile", "include_reflection", True, _bool),
        )
    return Scenario(
        name=name,
        models=models,
        frequencies=freqs,
        theta_i=thetas,
        materials=mats,
        link=link,
        tx=tx,
        cfg=cfg,
        polarization=_get(parser, "physics", "polarization", "perpendicular", Polarization.parse),
        f_variant=_get(parser, "physics", "f_variant", "literal", FVariant),
        rcs=rcs,
        profile=profile,
        convention_id=_get(parser, "scenario", "convention_id", name),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    return loads_scenario(text, source=path, base_dir=path.parent)


PRESETS = ("fig4a", "fig4b", "fig4c", "fig4d", "fig5", "table2", "drywall142")


def load_preset(name_or_path: str) -> Scenario:
    """A shipped preset by name, or any scenario file by path."""
    if name_or_path in PRESETS:
        return load_scenario(data_path("presets", f"{name_or_path}.cfg"))
    p = Path(name_or_path)
    if p.exists():
        return load_scenario(p)
    raise ConfigError(f"unknown preset {name_or_path!r} (shipped: {', '.join(PRESETS)})")
