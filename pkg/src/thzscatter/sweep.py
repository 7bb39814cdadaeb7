"""Parameter sweeps over frequency x incidence x material x model, and CSV output.

Rows come back in a fixed (model, material, frequency, theta) order whatever
the worker count, so the CSV written for a given scenario is byte-stable.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODELS, Scenario, load_preset
from .emcore import IncidentWave
from .errors import ConfigError, ScatterError
from .link import (
    compare_scatter_vs_reflection,
    reflected_received_power,
    scattered_received_power_ds,
)
from .rcs import RcsSurfaceParams, rcs_received_power, rcs_total

SweepSpec = Scenario


@dataclass(frozen=True)
class SweepRow:
    model: str
    material: str
    frequency: float
    theta_i: float
    power_dbm: float
    status: str = "ok"


def validate_spec(spec: Scenario) -> None:
    if not spec.frequencies or not spec.theta_i or not spec.materials or not spec.models:
        raise ConfigError("sweep grids must be non-empty")
    for m in spec.models:
        if m not in MODELS:
            raise ConfigError(f"unknown model {m!r}")
    for f in spec.frequencies:
        if not f > 0:
            raise ConfigError(f"frequency must be positive, got {f}")
    for t in spec.theta_i:
        if not 0 <= t <= math.pi / 2 + 1e-12:
            raise ConfigError(f"theta_i {math.degrees(t)} deg outside [0, 90]")
    needs_mono = {"ds_backscatter", "rcs_monostatic"} & set(spec.models)
    if needs_mono and spec.link.d_t != spec.link.d_r:
        raise ConfigError(f"{sorted(needs_mono)} need a monostatic link (d_t == d_r)")


def _evaluate(spec: Scenario, model: str, material, f: float, theta: float) -> tuple[float, str]:
    wave = IncidentWave(f, min(theta, math.pi / 2), spec.polarization)
    cfg, link, tx = spec.cfg, spec.link, spec.tx
    try:
        if model == "reflection":
            p = reflected_received_power(material, wave, link, tx, cfg)
        elif model == "ds_specular":
            p = scattered_received_power_ds(material, wave, link, tx, cfg, "specular", spec.f_variant)
        elif model == "ds_backscatter":
            p = scattered_received_power_ds(material, wave, link, tx, cfg, "backscatter", spec.f_variant)
        else:
            p = rcs_point(spec, material, wave)[1]
    except ScatterError as exc:
        return math.nan, f"error:{exc.category}"
    return float(p), "ok"


def rcs_surface(spec: Scenario, material) -> RcsSurfaceParams:
    return RcsSurfaceParams.from_material(
        material,
        width_w=spec.link.scatterer_width,
        sigma_l=spec.rcs.sigma_l,
        patch_half_length=spec.rcs.patch_half_length_lc * material.l_c,
        polarization=spec.rcs.polarization,
    )


def rcs_point(spec: Scenario, material, wave: IncidentWave):
    """(RCS breakdown, monostatic received dBm) for one material and wave."""
    cfg, tx = spec.cfg, spec.tx
    br = rcs_total(rcs_surface(spec, material), wave, cfg)
    gain_dbi = 10.0 * math.log10(tx.tx_gain(wave, cfg))
    sigma_db = 10.0 * math.log10(br.sigma_total) if br.sigma_total > 0 else -math.inf
    p = rcs_received_power(sigma_db, spec.link.d_t, 10.0 * math.log10(tx.p_t) + 30.0, gain_dbi,
                           wave.wavelength(cfg))
    return br, p


def _grid(spec: Scenario):
    for model in spec.models:
        for material in spec.materials:
            for f in spec.frequencies:
                for t in spec.theta_i:
                    yield model, material, f, t


def _evaluate_chunk(args):
    spec, points = args
    return [_evaluate(spec, *p) for p in points]


def run_sweep(spec: Scenario, workers: int = 1) -> list[SweepRow]:
    """Evaluate every grid point of ``spec``; singular points carry an error status."""
    validate_spec(spec)
    points = list(_grid(spec))
    if workers <= 1 or len(points) < 2:
        results = [_evaluate(spec, *p) for p in points]
    else:
        size = math.ceil(len(points) / (4 * workers))
        chunks = [(spec, points[i:i + size]) for i in range(0, len(points), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_evaluate_chunk, chunks) for r in chunk]
    return [
        SweepRow(model, material.name, f, t, p, status)
        for (model, material, f, t), (p, status) in zip(points, results)
    ]


# -------------------------------------------------------------- Table II

# published (reflected, scattered) dBm keyed by (material, row angle in degrees)
PAPER_TABLE2 = {
    ("smooth", 1): (-6.21, -53.92), ("intermediate", 1): (-32.07, -41.88), ("rough", 1): (-188.35, -33.92),
    ("smooth", 30): (-5.58, -69.12), ("intermediate", 30): (-25.94, -57.08), ("rough", 30): (-143.78, -49.12),
    ("smooth", 45): (-4.83, -71.50), ("intermediate", 45): (-19.47, -59.46), ("rough", 45): (-98.75, -51.50),
    ("smooth", 60): (-3.87, -73.89), ("intermediate", 60): (-12.37, -61.85), ("rough", 60): (-52.81, -53.89),
    ("smooth", 90): (-1.58, None), ("intermediate", 90): (-1.58, None), ("rough", 90): (-1.58, None),
}

INTERMEDIATE_NOTE = "published reflected value inconsistent with listed eps_r/h_rms (~1.9 dB)"


@dataclass(frozen=True)
class Table2Row:
    theta_i_deg: float
    material: str
    reflected_dbm: float
    scattered_dbm: float
    difference_db: float
    convention_id: str
    paper_value: float
    note: str = ""


def generate_table2(spec: Scenario | str = "table2") -> list[Table2Row]:
    """Reflected vs specular-direction scattered power, theta-major like the published table."""
    if isinstance(spec, str):
        spec = load_preset(spec)
    validate_spec(spec)
    rows = []
    f = spec.frequencies[0]
    for t in spec.theta_i:
        for m in spec.materials:
            wave = IncidentWave(f, min(t, math.pi / 2), spec.polarization)
            res = compare_scatter_vs_reflection(m, wave, spec.link, spec.tx, spec.cfg,
                                                spec.convention_id, spec.f_variant)
            deg = round(math.degrees(t), 9)
            paper = PAPER_TABLE2.get((m.name, int(round(deg))), (math.nan, None))[0]
            note = INTERMEDIATE_NOTE if m.name == "intermediate" and int(round(deg)) != 90 else ""
            rows.append(Table2Row(deg, m.name, res.reflected_dbm, res.scattered_dbm, res.difference_db,
                                  res.convention_id, paper, note))
    return rows


# ------------------------------------------------------------------ CSV

@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "text", "f6" (fixed 6 decimals) or "repr" (round-trip float)


SWEEP_COLUMNS = (
    Column("model", "text"), Column("material", "text"), Column("frequency_hz", "repr"),
    Column("theta_i_deg", "f6"), Column("power_dbm", "f6"), Column("status", "text"),
)
TABLE2_COLUMNS = (
    Column("theta_i_deg", "f6"), Column("material", "text"), Column("reflected_dbm", "f6"),
    Column("scattered_dbm", "f6"), Column("difference_db", "f6"), Column("convention_id", "text"),
    Column("paper_value", "f6"), Column("note", "text"),
)


def _fmt(value, kind: str) -> str:
    if kind == "text":
        return str(value)
    v = float(value)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return f"{v:.6f}" if kind == "f6" else repr(v)


def sweep_records(rows) -> list[tuple]:
    return [(r.model, r.material, r.frequency, math.degrees(r.theta_i), r.power_dbm, r.status) for r in rows]


def table2_records(rows) -> list[tuple]:
    return [(r.theta_i_deg, r.material, r.reflected_dbm, r.scattered_dbm, r.difference_db,
             r.convention_id, r.paper_value, r.note) for r in rows]


def format_csv(records, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([c.name for c in columns])
    for rec in records:
        writer.writerow([_fmt(v, c.kind) for v, c in zip(rec, columns)])
    return buf.getvalue()


def export_csv(records, destination, columns=SWEEP_COLUMNS, metadata: dict | None = None) -> Path:
    """Write ``records`` as CSV plus a ``.meta.json`` sidecar next to it."""
    dest = Path(destination)
    sidecar = dest.with_name(dest.name + ".meta.json")
    meta = {
        "generator": f"thzscatter {__version__}",
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "columns": [c.name for c in columns],
        "rows": len(records),
    }
    meta.update(metadata or {})
    try:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_csv(records, columns))
        with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {exc.filename or dest}: {exc.strerror or exc}") from exc
    return dest


def import_csv(source, columns=SWEEP_COLUMNS) -> list[tuple]:
    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != [c.name for c in columns]:
            raise ConfigError(f"{source}: unexpected header {header}")
        out = []
        for row in reader:
            out.append(tuple(v if c.kind == "text" else float(v) for v, c in zip(row, columns)))
    return out


# ------------------------------------------------------------- analysis

def series(rows, model: str, material: str, frequency: float):
    """(theta_deg, power_dbm) arrays of one curve of a sweep, in grid order."""
    sel = [r for r in rows if r.model == model and r.material == material and r.frequency == frequency]
    return (np.array([math.degrees(r.theta_i) for r in sel]),
            np.array([r.power_dbm for r in sel]))


def block_envelope(theta_deg, power, start=10.0, stop=85.0, width=15.0):
    """Maximum power inside consecutive ``width``-degree blocks of [start, stop]."""
    theta_deg = np.asarray(theta_deg)
    power = np.asarray(power)
    edges = np.arange(start, stop, width)
    out = []
    for lo in edges:
        hi = min(lo + width, stop)
        sel = (theta_deg >= lo) & ((theta_deg < hi) if hi < stop else (theta_deg <= hi))
        out.append(power[sel].max() if np.any(sel) else np.nan)
    return np.array(out)
