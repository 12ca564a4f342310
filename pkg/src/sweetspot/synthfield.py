"""Synthetic shale fields with known ground truth.

Latent Gaussian random fields (exponential covariance, Cholesky
construction at well locations) drive both the vertical-well logs and the
horizontal-well production, so the value of log-derived features can be
checked against a planted signal.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigInvalid, Mismatch, ZeroVariance
from .evaluation import pearson_strict
from .fpca import PRIMARY_CURVES
from .las import LasFile, to_las
from .production import add_months

# Raw mnemonics a vendor might use for each canonical curve; wells pick one.
RAW_MNEMONICS = {
    "RHOB": ["RHOB", "RHOZ", "DEN"],
    "GR": ["GR", "GRC", "GR_EDTC"],
    "LIME": ["LIME", "LIME_FRAC", "VLIME"],
    "NPHI": ["NPHI", "TNPH", "NPOR"],
    "RDEEP": ["RDEEP", "AT90", "ILD"],
    "RSHAL": ["RSHAL", "AT10", "SFL"],
    "PEF": ["PEF", "PEFZ", "PE"],
    "RMED": ["RMED", "AT30", "ILM"],
    "DTC": ["DTC", "DTCO", "DT"],
    "DTS": ["DTS", "DTSM", "DTSH"],
}

# (mean, scale) of each canonical curve, roughly in field units.
CURVE_SCALE = {
    "RHOB": (2.5, 0.08),
    "GR": (90.0, 25.0),
    "LIME": (0.4, 0.15),
    "NPHI": (0.15, 0.05),
    "RDEEP": (20.0, 6.0),
    "RSHAL": (12.0, 4.0),
    "PEF": (3.5, 0.6),
    "RMED": (15.0, 5.0),
    "DTC": (80.0, 8.0),
    "DTS": (140.0, 15.0),
}

DEFAULT_FORMATIONS = (("Upper", 60.0), ("Target", 80.0), ("Lower", 70.0), ("Base", 40.0))

DEFAULT_SIGNAL = {
    ("GR", "Target", 0): 0.5,
    ("RHOB", "Target", 0): -0.4,
    ("NPHI", "Target", 1): 0.35,
    ("RDEEP", "Target", 0): 0.4,
    ("DTC", "Target", 1): -0.3,
}


@dataclass
class SynthConfig:
    """Field layout, latent structure and production link.

    ``signal_coefficients`` maps ``(property, formation, component)`` to a
    weight on the log-production scale; components are 0 (level shift of
    the curve) and 1 (half-cosine shape). ``noise_sd=None`` picks the
    noise level that makes the noise-free signal explain half of the
    log-production variance. ``pad_offset_sd`` places each horizontal
    well near a randomly chosen vertical well (Gaussian offset, metres);
    ``None`` scatters them uniformly over the area instead.
    """

    n_vertical: int = 90
    n_horizontal: int = 98
    formations: tuple = DEFAULT_FORMATIONS
    properties: tuple = PRIMARY_CURVES
    target_formation: str = "Target"
    correlation_length: float = 6000.0
    amplitude: float = 1.0
    latent_fields: dict = field(default_factory=dict)
    signal_coefficients: dict = field(default_factory=lambda: dict(DEFAULT_SIGNAL))
    noise_sd: float | None = None
    null_noise_sd: float = 1.0
    gas_log_ratio: float = 1.5
    base_log_oil: float = 10.0
    seed: int = 0
    horizon_months: int = 12
    area_size: float = 20000.0
    pad_offset_sd: float | None = 250.0
    depth_step: float = 0.5
    log_noise: float = 0.05
    n_short_history: int = 10
    n_gas_unreported: int = 2
    n_missing_tops: int = 3
    null_fraction: float = 0.005

    def validate(self) -> None:
        if self.n_vertical < 1 or self.n_horizontal < 1:
            raise ConfigInvalid("well counts must be at least 1")
        if not self.formations or not self.properties:
            raise ConfigInvalid("need at least one formation and one property")
        names = [f for f, _ in self.formations]
        if self.target_formation not in names[:-1]:
            raise ConfigInvalid(f"target formation {self.target_formation!r} needs a formation below it")
        if any(t <= 0 for _, t in self.formations):
            raise ConfigInvalid("formation thicknesses must be positive")
        if self.noise_sd is not None and self.noise_sd < 0:
            raise ConfigInvalid("noise_sd must be non-negative")
        if self.pad_offset_sd is not None and self.pad_offset_sd < 0:
            raise ConfigInvalid("pad_offset_sd must be non-negative")
        if self.correlation_length <= 0 or any(v[0] <= 0 for v in self.latent_fields.values()):
            raise ConfigInvalid("correlation lengths must be positive")
        if self.n_short_history + self.n_gas_unreported > self.n_horizontal:
            raise ConfigInvalid("more censored wells than horizontal wells")
        for prop, formation, comp in self.signal_coefficients:
            if prop not in self.properties or formation not in names or comp not in (0, 1):
                raise ConfigInvalid(f"signal term {(prop, formation, comp)} does not name a latent component")

    def field_params(self, prop: str, formation: str) -> tuple[float, float]:
        return self.latent_fields.get((prop, formation), (self.correlation_length, self.amplitude))

    def effective_noise_sd(self, signal=None) -> float:
        """Noise sd on the log-production scale.

        With ``noise_sd=None`` it equals the spread of the realized signal
        over the horizontal wells (sample sd), so the signal explains about
        half of the variance within this field. Spatially correlated fields
        carry less variance inside a finite area than their marginal
        amplitude suggests, hence the realized value. Without ``signal`` the
        marginal variance is used.
        """
        if self.noise_sd is not None:
            return float(self.noise_sd)
        if signal is not None and len(signal) > 1:
            var = float(np.var(signal, ddof=1))
        else:
            var = sum(c**2 * self.field_params(p, f)[1] ** 2 for (p, f, _), c in self.signal_coefficients.items())
        return math.sqrt(var) if var > 0 else self.null_noise_sd


@dataclass
class SynthField:
    """Generated files (name -> text) plus ground truth."""

    files: dict[str, str]
    ground_truth: dict

    def write(self, out_dir) -> None:
        os.makedirs(os.path.join(out_dir, "las"), exist_ok=True)
        for name, text in sorted(self.files.items()):
            with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        with open(os.path.join(out_dir, "ground_truth.json"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(self.ground_truth, indent=1, sort_keys=True))
            fh.write("\n")


def exponential_cov(points, length: float) -> np.ndarray:
    return np.exp(-cdist(points, points) / length)


def _grf(chol: np.ndarray, amplitude: float, rng: np.random.Generator) -> np.ndarray:
    return amplitude * (chol @ rng.standard_normal(chol.shape[0]))


def _csv(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def generate(cfg: SynthConfig) -> SynthField:
    """Build a synthetic field. Output is a pure function of ``cfg``."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    nv, nh = cfg.n_vertical, cfg.n_horizontal
    vid = [f"V{i + 1:03d}" for i in range(nv)]
    hid = [f"H{i + 1:03d}" for i in range(nh)]
    vxy = np.round(rng.uniform(0.0, cfg.area_size, size=(nv, 2)), 1)
    if cfg.pad_offset_sd is None:
        hxy = rng.uniform(0.0, cfg.area_size, size=(nh, 2))
    else:
        # drilled from pads next to a vertical pilot well
        pads = rng.integers(0, nv, size=nh)
        hxy = np.clip(vxy[pads] + rng.normal(0.0, cfg.pad_offset_sd, size=(nh, 2)), 0.0, cfg.area_size)
    hxy = np.round(hxy, 1)
    pts = np.vstack([vxy, hxy])

    chols: dict[float, np.ndarray] = {}

    def chol(length):
        if length not in chols:
            cov = exponential_cov(pts, length)
            chols[length] = np.linalg.cholesky(cov + 1e-10 * np.eye(len(pts)))
        return chols[length]

    # structural surfaces: long-range undulation of the first top and of each thickness
    names = [f for f, _ in cfg.formations]
    surf = chol(3.0 * cfg.area_size)
    top = 2000.0 + _grf(surf, 15.0, rng)
    tops = {}
    for name, thick in cfg.formations:
        tops[name] = top
        top = top + thick * (1.0 + 0.08 * _grf(surf, 1.0, rng))
    floor = top

    latent = {}
    for prop in cfg.properties:
        for name in names:
            length, amp = cfg.field_params(prop, name)
            L = chol(length)
            latent[(prop, name)] = np.stack([_grf(L, amp, rng), _grf(L, amp, rng)], axis=1)

    # per (property, formation) fixed depth template shared by all wells
    templates = {
        key: (rng.uniform(-0.5, 0.5), rng.uniform(0.2, 0.6), rng.uniform(0.0, 2 * np.pi)) for key in sorted(latent)
    }

    files: dict[str, str] = {}
    dict_rows = sorted({(raw, prop) for prop in cfg.properties for raw in RAW_MNEMONICS.get(prop, [prop])})
    files["dictionary.csv"] = _csv(["raw", "alias"], dict_rows)
    files["formation_order.txt"] = "".join(f"{n}\n" for n in names)
    files["coords.csv"] = _csv(["well_id", "x", "y"], [(w, repr(float(x)), repr(float(y))) for w, (x, y) in zip(vid, vxy)])

    missing_tops = set()
    if cfg.n_missing_tops and nv > 1:
        picks = rng.choice(nv, size=min(cfg.n_missing_tops, nv), replace=False)
        for i in sorted(picks.tolist()):
            missing_tops.add((vid[i], names[int(rng.integers(1, len(names)))]))
    top_rows = []
    for i, w in enumerate(vid):
        for name in names:
            val = "" if (w, name) in missing_tops else f"{tops[name][i]:.2f}"
            top_rows.append((w, name, val))
    files["tops.csv"] = _csv(["well_id", "formation", "top_depth"], top_rows)

    for i, w in enumerate(vid):
        start = math.floor((tops[names[0]][i] - 30.0) / cfg.depth_step) * cfg.depth_step
        stop = math.ceil((floor[i] + 30.0) / cfg.depth_step) * cfg.depth_step
        depth = np.round(np.arange(start, stop + cfg.depth_step / 2, cfg.depth_step), 3)
        curves, units = {}, {}
        mnem = rng.integers(0, 3, size=len(cfg.properties))
        for pi, prop in enumerate(cfg.properties):
            mean, scale = CURVE_SCALE.get(prop, (0.0, 1.0))
            z = np.zeros_like(depth)
            for fi, name in enumerate(names):
                lo = tops[name][i]
                hi = tops[names[fi + 1]][i] if fi + 1 < len(names) else floor[i]
                inside = (depth >= lo) & (depth < hi)
                t = (depth[inside] - lo) / (hi - lo)
                off, amp, phase = templates[(prop, name)]
                z1, z2 = latent[(prop, name)][i]
                z[inside] = off + amp * np.sin(2 * np.pi * t + phase) + z1 + z2 * np.sqrt(2.0) * np.cos(np.pi * t)
            vals = mean + scale * (z + cfg.log_noise * rng.standard_normal(len(depth)))
            nulls = rng.random(len(depth)) < cfg.null_fraction
            vals = np.where(nulls, np.nan, np.round(vals, 4))
            raws = RAW_MNEMONICS.get(prop, [prop])
            raw = raws[int(mnem[pi]) % len(raws)]
            curves[raw] = vals
            units[raw] = ""
        curves["CALI"] = np.round(8.5 + 0.2 * rng.standard_normal(len(depth)), 3)
        f = LasFile(well_id=w, depth=depth, curves=curves, location=(float(vxy[i, 0]), float(vxy[i, 1])), depth_unit="M", curve_units=units)
        files[os.path.join("las", f"{w}.las")] = to_las(f)

    # production on the log scale
    hrow = slice(nv, nv + nh)
    signal = np.zeros(nh)
    for (prop, name, comp), c in sorted(cfg.signal_coefficients.items()):
        signal += c * latent[(prop, name)][hrow, comp]
    sd = cfg.effective_noise_sd(signal)
    mu_oil = cfg.base_log_oil + signal
    mu_gas = cfg.base_log_oil + cfg.gas_log_ratio + signal
    log_oil = mu_oil + sd * rng.standard_normal(nh)
    log_gas = mu_gas + sd * rng.standard_normal(nh)

    order = rng.permutation(nh)
    short = set(order[: cfg.n_short_history].tolist())
    no_gas = set(order[cfg.n_short_history : cfg.n_short_history + cfg.n_gas_unreported].tolist())
    first_days = np.datetime64("2015-01-01") + rng.integers(0, 4 * 365, size=nh).astype("timedelta64[D]")
    spellings = [cfg.target_formation, cfg.target_formation.upper(), f" {cfg.target_formation.lower()} "]

    meta_rows, daily_rows = [], []
    for j, w in enumerate(hid):
        meta_rows.append((w, spellings[j % 3], repr(float(hxy[j, 0])), repr(float(hxy[j, 1]))))
        start = first_days[j]
        end = add_months(start, cfg.horizon_months)
        n_days = int((end - start).astype(int))
        oil_rate = float(np.exp(log_oil[j])) / n_days
        gas_rate = float(np.exp(log_gas[j])) / n_days
        months = int(rng.integers(3, cfg.horizon_months)) if j in short else cfg.horizon_months
        stop = add_months(start, months)
        for d in np.arange(start, stop, dtype="datetime64[D]"):
            gas = "" if j in no_gas else f"{gas_rate:.6f}"
            daily_rows.append((w, str(d), f"{oil_rate:.6f}", gas))
    files["meta.csv"] = _csv(["well_id", "target_formation", "x", "y"], meta_rows)
    files["production.csv"] = _csv(["well_id", "date", "oil", "gas"], daily_rows)

    truth = {
        "seed": cfg.seed,
        "noise_sd": sd,
        "target_formation": cfg.target_formation,
        "signal_coefficients": [
            {"property": p, "formation": f, "component": c, "weight": v}
            for (p, f, c), v in sorted(cfg.signal_coefficients.items())
        ],
        "wells": {
            w: {
                "log_mean_oil": float(mu_oil[j]),
                "log_mean_gas": float(mu_gas[j]),
                "mean_oil": float(np.exp(mu_oil[j] + sd**2 / 2)),
                "mean_gas": float(np.exp(mu_gas[j] + sd**2 / 2)),
                "short_history": j in short,
                "gas_unreported": j in no_gas,
            }
            for j, w in enumerate(hid)
        },
        "latent": {
            f"{p}|{f}": latent[(p, f)][hrow].round(12).tolist() for (p, f) in sorted(latent) if f == cfg.target_formation
        },
    }
    return SynthField(files, truth)


def oracle_r2(truth: dict, predictions: dict) -> float:
    """Squared Pearson correlation between predictions and true values.

    Both arguments map well id to a value; zero variance on either side
    gives ``nan``.
    """
    if set(truth) != set(predictions):
        raise Mismatch("ground truth and predictions cover different wells")
    ids = sorted(truth)
    try:
        r = pearson_strict([truth[w] for w in ids], [predictions[w] for w in ids])
    except ZeroVariance:
        return float("nan")
    return r * r
