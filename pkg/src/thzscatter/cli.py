"""Command-line front end.

Exit status is 0 on success, 1 for domain or configuration errors and 2 for
I/O failures.  Errors go to stderr as ``error:<category>:<message>``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys

import numpy as np

from . import __version__
from .config import (
    PRESETS,
    Scenario,
    load_preset,
    parse_angle_grid,
    parse_frequency,
    resolve_material,
    table1_materials,
)
from .ds import FVariant
from .emcore import (
    SPEED_OF_LIGHT,
    SPEED_OF_LIGHT_ROUNDED,
    IncidentWave,
    LossFactorVariant,
    PhysicsConfig,
    Polarization,
    classify_surface,
    critical_height,
    fresnel_reflection,
    rough_reflection_coefficient,
    scattering_loss_factor,
)
from .errors import ConfigError, ScatterError
from .fitting import ProfileMeta, fit_dual_lobe, format_profile, load_profile, predict_profile, save_profile
from .link import compare_scatter_vs_reflection, reflected_received_power, scattered_received_power_ds
from .rcs import RcsPolarization
from .sweep import (
    SWEEP_COLUMNS,
    TABLE2_COLUMNS,
    export_csv,
    format_csv,
    generate_table2,
    rcs_point,
    run_sweep,
    sweep_records,
    table2_records,
)

# presets used when a subcommand runs without --preset
DEFAULT_PRESET = {
    "reflect": "table2", "scatter-ds": "table2", "compare": "table2", "table2": "table2",
    "scatter-rcs": "fig4b", "sweep": "fig4a", "predict": "drywall142", "fit": "drywall142",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _num(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return repr(round(v, 6) + 0.0)


def _emit_pairs(pairs, fmt: str, out) -> None:
    sep = "," if fmt == "csv" else "="
    for k, v in pairs:
        out.write(f"{k}{sep}{v if isinstance(v, str) else _num(v)}\n")


def _emit_table(text_csv: str, fmt: str, out) -> None:
    if fmt == "csv":
        out.write(text_csv)
        return
    lines = text_csv.splitlines()
    header = lines[0].split(",")
    for row in csv.reader(lines[1:]):
        out.write(" ".join(f"{h}={v}" for h, v in zip(header, row)) + "\n")


# ------------------------------------------------------------ scenario

def _scenario(args) -> Scenario:
    sc = load_preset(args.preset or DEFAULT_PRESET[args.command])
    cfg = sc.cfg
    if args.exact_c:
        cfg = dataclasses.replace(cfg, speed_of_light=SPEED_OF_LIGHT)
    if args.variant:
        cfg = dataclasses.replace(cfg, loss_factor_variant=LossFactorVariant(args.variant))
    changes = {"cfg": cfg}
    if args.pol:
        changes["polarization"] = Polarization.parse(args.pol)
    if args.f_variant:
        changes["f_variant"] = FVariant(args.f_variant)
    if args.freq:
        changes["frequencies"] = tuple(parse_frequency(f) for f in args.freq.split(","))
    if args.theta_i is not None:
        changes["theta_i"] = tuple(math.radians(t) for t in parse_angle_grid(args.theta_i))
    if args.material:
        library = list(sc.materials) + [m for m in table1_materials() if m.name not in {x.name for x in sc.materials}]
        changes["materials"] = tuple(resolve_material(r.strip(), library) for r in args.material.split(","))
    if getattr(args, "rcs_pol", None):
        changes["rcs"] = dataclasses.replace(sc.rcs, polarization=RcsPolarization.parse(args.rcs_pol))
    return dataclasses.replace(sc, **changes)


def _single(sc: Scenario):
    """The one (material, wave) a point subcommand evaluates."""
    if len(sc.materials) != 1:
        raise ConfigError("select one material with --material")
    if len(sc.frequencies) != 1 or len(sc.theta_i) != 1:
        raise ConfigError("point subcommands need a single --freq and --theta-i")
    return sc.materials[0], IncidentWave(sc.frequencies[0], sc.theta_i[0], sc.polarization)


# ------------------------------------------------------------ commands

def cmd_critical_height(args, out):
    if args.freq is None or args.theta_i is None:
        raise ConfigError("critical-height needs --freq and --theta-i")
    c = SPEED_OF_LIGHT if args.exact_c else SPEED_OF_LIGHT_ROUNDED
    wave = IncidentWave(parse_frequency(args.freq), math.radians(float(args.theta_i)))
    h_c = critical_height(wave, PhysicsConfig(speed_of_light=c))
    pairs = [("h_c_um", h_c * 1e6)]
    if args.h_rms_um is not None:
        pairs.append(("class", classify_surface(args.h_rms_um * 1e-6, wave, PhysicsConfig(speed_of_light=c)).value))
    _emit_pairs(pairs, args.format, out)


def cmd_reflect(args, out):
    sc = _scenario(args)
    m, wave = _single(sc)
    _emit_pairs([
        ("material", m.name),
        ("gamma_smooth", fresnel_reflection(m.eps_r, wave)),
        ("rho_s", scattering_loss_factor(m.h_rms, wave, sc.cfg.loss_factor_variant, sc.cfg)),
        ("gamma_rough", rough_reflection_coefficient(m, wave, sc.cfg)),
        ("reflected_dbm", reflected_received_power(m, wave, sc.link, sc.tx, sc.cfg)),
    ], args.format, out)


def cmd_scatter_ds(args, out):
    sc = _scenario(args)
    m, wave = _single(sc)
    p = scattered_received_power_ds(m, wave, sc.link, sc.tx, sc.cfg, args.direction, sc.f_variant, args.dual)
    _emit_pairs([("material", m.name), ("direction", args.direction), ("scattered_dbm", p)], args.format, out)


def cmd_scatter_rcs(args, out):
    sc = _scenario(args)
    m, wave = _single(sc)
    br, p = rcs_point(sc, m, wave)
    _emit_pairs([
        ("material", m.name),
        ("sigma_total_db", br.sigma_total_db),
        ("sigma_smooth_db", br.sigma_smooth_db),
        ("sigma_rough_db", br.sigma_rough_db),
        ("chi_s", br.chi_s),
        ("received_dbm", p),
    ], args.format, out)


def cmd_compare(args, out):
    sc = _scenario(args)
    m, wave = _single(sc)
    r = compare_scatter_vs_reflection(m, wave, sc.link, sc.tx, sc.cfg, sc.convention_id, sc.f_variant)
    _emit_pairs([
        ("material", r.material),
        ("theta_i_deg", math.degrees(r.theta_i)),
        ("reflected_dbm", r.reflected_dbm),
        ("scattered_dbm", r.scattered_dbm),
        ("difference_db", r.difference_db),
        ("convention_id", r.convention_id),
    ], args.format, out)


def _write_table(records, columns, sc, args, out):
    if args.out:
        export_csv(records, args.out, columns, {"scenario": sc.describe()})
    else:
        _emit_table(format_csv(records, columns), args.format, out)


def cmd_sweep(args, out):
    sc = _scenario(args)
    if args.models:
        sc = dataclasses.replace(sc, models=tuple(m.strip() for m in args.models.split(",")))
    rows = run_sweep(sc, workers=args.workers)
    _write_table(sweep_records(rows), SWEEP_COLUMNS, sc, args, out)


def cmd_table2(args, out):
    sc = _scenario(args)
    _write_table(table2_records(generate_table2(sc)), TABLE2_COLUMNS, sc, args, out)


def _profile_meta(sc: Scenario, material) -> ProfileMeta:
    if sc.profile is None:
        raise ConfigError(f"preset {sc.name!r} has no [profile] section")
    p = sc.profile
    return ProfileMeta(sc.frequencies[0], p.tx_power_dbm, p.antenna_gain_dbi, p.hpbw_deg, p.radius_m, material.name)


def cmd_predict(args, out):
    sc = _scenario(args)
    m, wave = _single(sc)
    meta = _profile_meta(sc, m)
    grid = parse_angle_grid(args.theta_s) if args.theta_s else list(sc.profile.theta_s_deg)
    beam = meta.hpbw_deg if (args.beam or sc.profile.beam_convolution) else None
    prof = predict_profile(m, wave, meta.link(), meta.tx(), np.radians(grid), sc.cfg, sc.f_variant,
                           sc.profile.include_reflection, beam, meta)
    if args.out:
        save_profile(prof, args.out)
    else:
        _emit_table(format_profile(prof), args.format, out)


def cmd_fit(args, out):
    sc = _scenario(args)
    if len(sc.materials) != 1:
        raise ConfigError("select one skeleton material with --material")
    prof = load_profile(args.profile)
    include = sc.profile.include_reflection if (sc.profile and args.reflection is None) else bool(args.reflection)
    beam = prof.meta.hpbw_deg if args.beam else None
    res = fit_dual_lobe(prof, sc.materials[0], cfg=sc.cfg, polarization=sc.polarization,
                        f_variant=sc.f_variant, include_reflection=include, beam_hpbw_deg=beam)
    text = res.report()
    if args.format == "kv":
        text = "".join(line.replace(",", "=", 1) + "\n" for line in text.splitlines())
    out.write(text)


COMMANDS = {
    "critical-height": (cmd_critical_height, "Rayleigh critical height (micrometres)"),
    "reflect": (cmd_reflect, "rough-surface reflection coefficient and received power"),
    "scatter-ds": (cmd_scatter_ds, "directive-scattering received power"),
    "scatter-rcs": (cmd_scatter_rcs, "two-scale radar cross section and received power"),
    "compare": (cmd_compare, "reflected vs scattered power toward the specular direction"),
    "sweep": (cmd_sweep, "frequency x angle x material x model sweep"),
    "table2": (cmd_table2, "reflected/scattered comparison table at 500 GHz"),
    "fit": (cmd_fit, "fit dual-lobe parameters to a measured angular profile"),
    "predict": (cmd_predict, "predicted angular power profile"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thzscatter", description="Rough-surface scattering and reflection at 1 GHz-1 THz.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--freq", help="frequency with unit, e.g. 500GHz (comma list for sweep)")
        p.add_argument("--theta-i", help="incidence angle in degrees (list or a:b:step for sweep)")
        p.add_argument("--format", choices=("csv", "kv"), default="csv")
        p.add_argument("--exact-c", action="store_true", help="use c = 299792458 m/s instead of 3e8")
        if name == "critical-height":
            p.add_argument("--h-rms-um", type=float, help="also classify a surface of this rms height")
            continue
        p.add_argument("--material", help="material name or .cfg file (comma list for sweep)")
        p.add_argument("--preset", help=f"scenario preset ({', '.join(PRESETS)}) or .cfg path")
        p.add_argument("--variant", choices=[v.value for v in LossFactorVariant])
        p.add_argument("--f-variant", choices=[v.value for v in FVariant])
        p.add_argument("--pol", choices=("perp", "par"))
        if name in ("sweep", "table2", "predict"):
            p.add_argument("--out", help="write CSV here (plus a .meta.json sidecar)")
        if name == "scatter-ds":
            p.add_argument("--direction", choices=("backscatter", "specular"), default="backscatter")
            p.add_argument("--dual", action="store_true", help="dual-lobe model")
        if name in ("scatter-rcs", "sweep"):
            p.add_argument("--rcs-pol", choices=("HH", "VV"))
        if name == "sweep":
            p.add_argument("--models", help="comma list of models to run")
            p.add_argument("--workers", type=int, default=1)
        if name == "predict":
            p.add_argument("--theta-s", help="scattering angles in degrees")
            p.add_argument("--beam", action="store_true", help="convolve with the Gaussian antenna beam")
        if name == "fit":
            p.add_argument("--profile", required=True, help="CSV with theta_s_deg,power_dbm")
            p.add_argument("--beam", action="store_true", help="fit through the Gaussian antenna beam")
            grp = p.add_mutually_exclusive_group()
            grp.add_argument("--reflection", dest="reflection", action="store_true", default=None)
            grp.add_argument("--no-reflection", dest="reflection", action="store_false")
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command][0](args, out)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ScatterError as exc:
        err.write(f"error:{exc.category}:{exc}\n")
        return 1
    except ValueError as exc:
        err.write(f"error:domain:{exc}\n")
        return 1
    except OSError as exc:
        err.write(f"error:io:{exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
