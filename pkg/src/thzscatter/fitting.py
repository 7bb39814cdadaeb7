"""Dual-lobe angular power profiles: prediction, file I/O and parameter fitting.

The fit works in dB.  For a candidate (Lambda, alpha_R, alpha_i) the profile
in dB is ``20 log10 S + g(theta_s)``, so the best S is the mean residual and
the grid search never has to search over S.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import optimize

from .ds import (
    FVariant,
    ScatterGeometry,
    TxParams,
    dual_lobe_shape,
    f_alpha_r,
    peak_field_sq,
    power_from_field,
)
from .emcore import DEFAULT_CONFIG, IncidentWave, Material, PhysicsConfig, Polarization, dbm
from .errors import ConfigError, DomainError, ParseError, ScatterError
from .link import LinkGeometry, reflected_received_power_w

LAMBDA_BOUNDS = (0.0, 1.0)
ALPHA_BOUNDS = (1.0, 1000.0)
S_BOUNDS = (1e-10, 1.0)
GRID_LAMBDA = np.linspace(0.0, 1.0, 21)
GRID_ALPHA = np.geomspace(1.0, 1000.0, 25)
REFINE_TOL_DB2 = 1e-6
SPECULAR_MATCH = 1e-6  # rad; a sample this close to theta_i is the specular one
NON_IDENTIFIABLE_DB2 = 1e-3


@dataclass(frozen=True)
class ProfileMeta:
    frequency: float
    tx_power_dbm: float
    antenna_gain_dbi: float
    hpbw_deg: float = 8.0
    radius_m: float = 1.5
    material_name: str = ""

    def tx(self) -> TxParams:
        p_w = 10.0 ** ((self.tx_power_dbm - 30.0) / 10.0)
        return TxParams(p_t=p_w, g_t=10.0 ** (self.antenna_gain_dbi / 10.0))

    def link(self) -> LinkGeometry:
        """Bistatic link at the measurement radius; the scatterer is the beam footprint."""
        foot = 2.0 * self.radius_m * math.tan(math.radians(self.hpbw_deg) / 2.0)
        return LinkGeometry(self.radius_m, self.radius_m, foot, foot)


@dataclass(frozen=True)
class AngularPowerProfile:
    """Received power against scattering angle for one incidence angle."""

    theta_i: float
    samples: tuple  # ((theta_s, power_dbm), ...) sorted by theta_s
    meta: ProfileMeta | None = None

    def __post_init__(self):
        thetas = [s for s, _ in self.samples]
        if any(b <= a for a, b in zip(thetas[:-1], thetas[1:])):
            raise DomainError("profile samples must be strictly increasing in theta_s")
        for s in thetas:
            if not -math.pi / 2 - 1e-12 <= s <= math.pi / 2 + 1e-12:
                raise DomainError(f"theta_s {math.degrees(s):g} deg outside [-90, 90]")

    @property
    def theta_s(self) -> np.ndarray:
        return np.array([s for s, _ in self.samples])

    @property
    def power_dbm(self) -> np.ndarray:
        return np.array([p for _, p in self.samples])

    def shifted(self, offset_db: float) -> "AngularPowerProfile":
        return AngularPowerProfile(self.theta_i, tuple((s, p + offset_db) for s, p in self.samples), self.meta)

    def specular_index(self) -> int | None:
        idx = int(np.argmin(np.abs(self.theta_s - self.theta_i)))
        return idx if abs(self.samples[idx][0] - self.theta_i) <= SPECULAR_MATCH else None


# ------------------------------------------------------------ prediction

def gaussian_beam_nodes(hpbw_deg: float, n: int = 41):
    """Angular offsets (rad) and normalised weights of a Gaussian power pattern."""
    sigma = math.radians(hpbw_deg) / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    offsets = np.linspace(-3.0 * sigma, 3.0 * sigma, n)
    w = np.exp(-0.5 * (offsets / sigma) ** 2)
    return offsets, w / w.sum()


def beam_gain(offset, hpbw_deg: float):
    """Relative power gain of the Gaussian pattern ``offset`` rad off boresight."""
    return np.exp(-4.0 * math.log(2.0) * (np.asarray(offset) / math.radians(hpbw_deg)) ** 2)


class _ForwardModel:
    """Vectorised dual-lobe power on a fixed theta_s grid (S = 1 before scaling)."""

    def __init__(self, material: Material, wave: IncidentWave, link: LinkGeometry, tx: TxParams,
                 theta_s, cfg=DEFAULT_CONFIG, f_variant=FVariant.LITERAL,
                 include_reflection=True, beam_hpbw_deg=None):
        self.theta_i = wave.theta_i
        self.theta_s = np.asarray(theta_s, dtype=float)
        self.f_variant = FVariant(f_variant)
        self.rel_tol = cfg.quadrature_rel_tol
        geom = ScatterGeometry.specular(wave.theta_i, link.d_t, link.d_r, link.scatterer_length)
        unit = material.with_(s_coeff=1.0)
        e0 = peak_field_sq(unit, wave, geom, tx, cfg, self.f_variant, f_value=1.0)
        self.scale_w = power_from_field(e0, wave, g_r=tx.receive_gain(wave, cfg), cfg=cfg)
        if beam_hpbw_deg:
            offs, wts = gaussian_beam_nodes(beam_hpbw_deg)
            self._look = np.clip(self.theta_s[:, None] + offs[None, :], -math.pi / 2, math.pi / 2)
            self._weights = wts
        else:
            self._look = self.theta_s[:, None]
            self._weights = np.ones(1)
        self.reflection_w = np.zeros_like(self.theta_s)
        if include_reflection:
            r = reflected_received_power_w(material, wave, link, tx, cfg)
            if beam_hpbw_deg:
                self.reflection_w = r * beam_gain(self.theta_s - self.theta_i, beam_hpbw_deg)
            else:
                self.reflection_w[np.abs(self.theta_s - self.theta_i) <= SPECULAR_MATCH] = r

    def f_value(self, alpha_r):
        return np.vectorize(lambda a: _f_cached(float(a), self.theta_i, self.f_variant.value, self.rel_tol),
                            otypes=[float])(alpha_r)

    def shape(self, lam, alpha_r, alpha_i):
        """Beam-weighted lobe shape / F for parameter arrays broadcast over a leading axis."""
        lam, alpha_r, alpha_i = (np.asarray(v, dtype=float)[..., None, None] for v in (lam, alpha_r, alpha_i))
        psi = self._look - self.theta_i
        psi_i = self._look + self.theta_i
        s = dual_lobe_shape(psi, psi_i, lam, alpha_r, alpha_i) @ self._weights
        return s / self.f_value(alpha_r[..., 0, 0])[..., None]

    def scatter_dbm(self, lam, alpha_r, alpha_i):
        return dbm(self.scale_w * self.shape(lam, alpha_r, alpha_i))

    def total_dbm(self, lam, alpha_r, alpha_i, s):
        p = np.asarray(s, dtype=float)[..., None] ** 2 * self.scale_w * self.shape(lam, alpha_r, alpha_i)
        return dbm(p + self.reflection_w)


@lru_cache(maxsize=4096)
def _f_cached(alpha_r: float, theta_i: float, variant: str, rel_tol: float) -> float:
    return f_alpha_r(alpha_r, theta_i, variant, rel_tol)


def predict_profile(material: Material, wave: IncidentWave, link: LinkGeometry, tx: TxParams, theta_s_grid,
                    cfg: PhysicsConfig = DEFAULT_CONFIG, f_variant=FVariant.LITERAL,
                    include_reflection: bool = True, beam_hpbw_deg: float | None = None,
                    meta: ProfileMeta | None = None) -> AngularPowerProfile:
    """Dual-lobe scattered power at each theta_s, plus reflection at the specular sample.

    With ``beam_hpbw_deg`` the scattered term is averaged over a Gaussian
    receive pattern and the reflected ray is weighted by that pattern's gain.
    A singular lobe normaliser marks every sample as NaN.
    """
    grid = np.sort(np.asarray(theta_s_grid, dtype=float))
    try:
        model = _ForwardModel(material, wave, link, tx, grid, cfg, f_variant, include_reflection, beam_hpbw_deg)
        p = model.total_dbm(material.lambda_mix, material.alpha_r, material.alpha_i, material.s_coeff)
    except ScatterError:
        p = np.full(grid.shape, np.nan)
    return AngularPowerProfile(wave.theta_i, tuple(zip(grid.tolist(), np.asarray(p, float).tolist())), meta)


# -------------------------------------------------------------- file I/O

PROFILE_HEADER = ["theta_s_deg", "power_dbm"]


def _meta_from_dict(d: dict, source) -> tuple[float, ProfileMeta]:
    try:
        theta_i = math.radians(float(d["theta_i_deg"]))
        meta = ProfileMeta(
            frequency=float(d["frequency_hz"]),
            tx_power_dbm=float(d["tx_power_dbm"]),
            antenna_gain_dbi=float(d["antenna_gain_dbi"]),
            hpbw_deg=float(d.get("hpbw_deg", 8.0)),
            radius_m=float(d.get("radius_m", 1.5)),
            material_name=str(d.get("material_name", "")),
        )
    except KeyError as exc:
        raise ConfigError(f"{source}: metadata is missing {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: bad metadata value ({exc})") from None
    return theta_i, meta


def load_profile(path, meta: dict | None = None) -> AngularPowerProfile:
    """Read ``theta_s_deg,power_dbm`` rows plus the ``<file>.meta.json`` sidecar."""
    path = Path(path)
    if meta is None:
        side = path.with_name(path.name + ".meta.json")
        try:
            meta = json.loads(side.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"{side}: metadata sidecar not found") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", side, exc.lineno) from None
    theta_i, pmeta = _meta_from_dict(meta, path)
    seen: dict[float, int] = {}
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != PROFILE_HEADER:
            raise ParseError(f"expected header {','.join(PROFILE_HEADER)}", path, 1)
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", path, lineno)
            try:
                deg, p = float(row[0]), float(row[1])
            except ValueError:
                raise ParseError(f"non-numeric value in {row!r}", path, lineno) from None
            if not (math.isfinite(deg) and math.isfinite(p)):
                raise ParseError(f"non-finite value in {row!r}", path, lineno)
            if not -90.0 <= deg <= 90.0:
                raise DomainError(f"{path}:{lineno}: theta_s {deg:g} deg outside [-90, 90]")
            if deg in seen:
                raise ParseError(f"duplicate theta_s {deg:g} deg (also on line {seen[deg]})", path, lineno)
            seen[deg] = lineno
            rows.append((math.radians(deg), p))
    rows.sort()
    return AngularPowerProfile(theta_i, tuple(rows), pmeta)


def profile_meta_dict(profile: AngularPowerProfile) -> dict:
    d = {"theta_i_deg": math.degrees(profile.theta_i)}
    if profile.meta is not None:
        m = profile.meta
        d.update(frequency_hz=m.frequency, tx_power_dbm=m.tx_power_dbm, antenna_gain_dbi=m.antenna_gain_dbi,
                 hpbw_deg=m.hpbw_deg, radius_m=m.radius_m, material_name=m.material_name)
    return d


def format_profile(profile: AngularPowerProfile) -> str:
    lines = [",".join(PROFILE_HEADER)]
    for s, p in profile.samples:
        lines.append(f"{math.degrees(s):.6f},{p:.6f}")
    return "\n".join(lines) + "\n"


def save_profile(profile: AngularPowerProfile, path) -> Path:
    path = Path(path)
    try:
        path.write_text(format_profile(profile), encoding="utf-8", newline="\n")
        path.with_name(path.name + ".meta.json").write_text(
            json.dumps(profile_meta_dict(profile), indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {exc.filename or path}: {exc.strerror or exc}") from exc
    return path


# ----------------------------------------------------------------- fitting

@dataclass(frozen=True)
class FitResult:
    lambda_mix: float
    alpha_r: float
    alpha_i: float
    s_coeff: float
    rss_db2: float
    peak_error_db: float
    non_identifiable: tuple = ()
    degenerate: bool = False
    iterations: int = 0
    n_samples: int = 0
    extra: dict = field(default_factory=dict)

    def material(self, skeleton: Material) -> Material:
        return skeleton.with_(lambda_mix=self.lambda_mix, alpha_r=self.alpha_r,
                              alpha_i=self.alpha_i, s_coeff=self.s_coeff)

    def report(self) -> str:
        """Key-value text, one ``key,value`` pair per line."""
        items = [
            ("lambda_mix", f"{self.lambda_mix:.6f}"),
            ("alpha_r", f"{self.alpha_r:.6f}"),
            ("alpha_i", f"{self.alpha_i:.6f}"),
            ("s_coeff", f"{self.s_coeff:.6f}"),
            ("rss_db2", f"{self.rss_db2:.6f}"),
            ("peak_error_db", f"{self.peak_error_db:.6f}"),
            ("n_samples", str(self.n_samples)),
            ("iterations", str(self.iterations)),
            ("degenerate", "yes" if self.degenerate else "no"),
            ("non_identifiable", ";".join(self.non_identifiable) or "none"),
        ]
        return "".join(f"{k},{v}\n" for k, v in items)


class _Objective:
    def __init__(self, model: _ForwardModel, measured: np.ndarray, include_reflection: bool):
        self.model = model
        self.measured = measured
        self.with_reflection = include_reflection and bool(np.any(model.reflection_w > 0))
        self.free = model.reflection_w == 0  # samples carrying scattered power only

    def closed_form_s(self, g_db):
        """Mean-residual S (clamped to its bounds) from samples without a reflected term."""
        resid = self.measured[self.free] - g_db[..., self.free]
        s_db = np.clip(resid.mean(axis=-1), 20 * math.log10(S_BOUNDS[0]), 0.0)
        return 10.0 ** (s_db / 20.0)

    def rss_grid(self, lam, ar, ai):
        g = self.model.scatter_dbm(lam, ar, ai)
        s = self.closed_form_s(g)
        pred = self.model.total_dbm(lam, ar, ai, s) if self.with_reflection else g + 20 * np.log10(s)[..., None]
        return np.sum((pred - self.measured) ** 2, axis=-1), s

    def profiled(self, lam, ar, ai):
        """rss with S optimised; exact for the pure-scatter case, bounded Brent otherwise."""
        rss, s = self.rss_grid(lam, ar, ai)
        rss, s = float(rss), float(s)
        if not self.with_reflection:
            return rss, s

        def f(log_s):
            pred = self.model.total_dbm(lam, ar, ai, 10.0 ** log_s)
            return float(np.sum((pred - self.measured) ** 2))

        lo = math.log10(S_BOUNDS[0])
        res = optimize.minimize_scalar(f, bounds=(lo, 0.0), method="bounded", options={"xatol": 1e-10})
        if res.fun < rss:
            return float(res.fun), 10.0 ** float(res.x)
        return rss, s


def _coordinate_descent(obj: _Objective, x0, max_sweeps=200):
    """Line searches along (Lambda, ln alpha_R, ln alpha_i) until a sweep gains < REFINE_TOL_DB2."""
    bounds = [LAMBDA_BOUNDS, (0.0, math.log(ALPHA_BOUNDS[1])), (0.0, math.log(ALPHA_BOUNDS[1]))]
    width = [0.1, 0.5, 0.5]
    x = list(x0)

    def f(v):
        return obj.profiled(v[0], math.exp(v[1]), math.exp(v[2]))[0]

    best = f(x)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = best
        for i in range(3):
            lo = max(bounds[i][0], x[i] - width[i])
            hi = min(bounds[i][1], x[i] + width[i])
            if hi <= lo:
                continue

            def line(t, i=i):
                v = list(x)
                v[i] = t
                return f(v)

            res = optimize.minimize_scalar(line, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
            if res.fun < best:
                width[i] = max(2.0 * abs(res.x - x[i]), 1e-6)
                x[i], best = float(res.x), float(res.fun)
            else:
                width[i] = max(width[i] / 2.0, 1e-6)
        if start - best < REFINE_TOL_DB2 and max(width) <= 1e-3:
            break
    return x, best, sweeps


def fit_dual_lobe(profile: AngularPowerProfile, skeleton: Material, *, link: LinkGeometry | None = None,
                  tx: TxParams | None = None, frequency: float | None = None,
                  polarization=Polarization.PERPENDICULAR, cfg: PhysicsConfig = DEFAULT_CONFIG,
                  f_variant=FVariant.LITERAL, include_reflection: bool = False,
                  beam_hpbw_deg: float | None = None) -> FitResult:
    """Fit (Lambda, alpha_R, alpha_i, S) to a measured profile in the dB domain.

    ``skeleton`` supplies the fixed material properties (permittivity,
    roughness).  Link, transmitter and frequency default to the profile
    metadata.
    """
    if len(profile.samples) < 3:
        raise DomainError(f"fitting needs at least 3 samples, got {len(profile.samples)}")
    meta = profile.meta
    if meta is None and (link is None or tx is None or frequency is None):
        raise ConfigError("profile has no metadata; pass link, tx and frequency")
    link = link or meta.link()
    tx = tx or meta.tx()
    wave = IncidentWave(frequency or meta.frequency, profile.theta_i, polarization)
    measured = profile.power_dbm
    model = _ForwardModel(skeleton, wave, link, tx, profile.theta_s, cfg, f_variant,
                          include_reflection, beam_hpbw_deg)
    obj = _Objective(model, measured, include_reflection)

    lam_g, ar_g, ai_g = np.meshgrid(GRID_LAMBDA, GRID_ALPHA, GRID_ALPHA, indexing="ij")
    rss, _ = obj.rss_grid(lam_g.ravel(), ar_g.ravel(), ai_g.ravel())
    k = int(np.argmin(rss))  # first minimum: deterministic tie-break
    x0 = [float(lam_g.ravel()[k]), math.log(ar_g.ravel()[k]), math.log(ai_g.ravel()[k])]
    x, best, sweeps = _coordinate_descent(obj, x0)
    lam, ar, ai = x[0], math.exp(x[1]), math.exp(x[2])
    rss_val, s = obj.profiled(lam, ar, ai)

    pred = model.total_dbm(lam, ar, ai, s)
    spec = profile.specular_index()
    peak_err = abs(float(pred[spec]) - float(measured[spec])) if spec is not None else math.nan

    degenerate = float(np.ptp(measured)) < 1e-9
    flags = []
    if degenerate:
        flags = ["lambda_mix", "alpha_r", "alpha_i"]
    else:
        sweep_alpha = GRID_ALPHA
        for name, idx in (("alpha_r", 1), ("alpha_i", 2)):
            weight = lam if idx == 1 else 1.0 - lam
            args = [np.full_like(sweep_alpha, lam), np.full_like(sweep_alpha, ar), np.full_like(sweep_alpha, ai)]
            args[idx] = sweep_alpha
            spread = float(np.ptp(obj.rss_grid(*args)[0]))
            if weight < 1e-3 or spread < NON_IDENTIFIABLE_DB2:
                flags.append(name)
    return FitResult(lam, ar, ai, s, max(rss_val, 0.0), peak_err, tuple(flags), degenerate, sweeps,
                     len(profile.samples), {"grid_start": tuple(x0)})


def profile_rss(profile: AngularPowerProfile, material: Material, *, link=None, tx=None, frequency=None,
                polarization=Polarization.PERPENDICULAR, cfg=DEFAULT_CONFIG, f_variant=FVariant.LITERAL,
                include_reflection=False, beam_hpbw_deg=None) -> float:
    """Objective value of fixed parameters (taken from ``material``) on ``profile``."""
    meta = profile.meta
    link = link or meta.link()
    tx = tx or meta.tx()
    wave = IncidentWave(frequency or meta.frequency, profile.theta_i, polarization)
    model = _ForwardModel(material, wave, link, tx, profile.theta_s, cfg, f_variant,
                          include_reflection, beam_hpbw_deg)
    pred = model.total_dbm(material.lambda_mix, material.alpha_r, material.alpha_i, material.s_coeff)
    return float(np.sum((pred - profile.power_dbm) ** 2))
