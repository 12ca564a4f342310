"""YAML pipeline configuration.

Relative paths resolve against the directory holding the config file.
See README for the full key list.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .errors import ConfigInvalid
from .evaluation import EvalConfig
from .fpca import PRIMARY_CURVES
from .geostat import FAMILIES, InterpolationConfig
from .models import get_zoo
from .pipeline import Inputs
from .production import DEFAULT_HORIZONS, PHASES

INPUT_KEYS = ("las_dir", "dictionary", "tops", "coords", "formation_order", "meta", "production")


@dataclass
class PipelineConfig:
    inputs: Inputs
    output_dir: str
    targets: list[str]
    properties: list[str] = field(default_factory=lambda: list(PRIMARY_CURVES))
    horizons: list[int] = field(default_factory=lambda: list(DEFAULT_HORIZONS))
    phases: list[str] = field(default_factory=lambda: list(PHASES))
    horizon: int = 12
    fpca_k: int = 10
    polygon: list | None = None
    geostat: InterpolationConfig = field(default_factory=InterpolationConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    zoo: list[str] | None = None
    n_jobs: int = 1

    def check_inputs(self) -> None:
        """Every input path must exist when a command runs."""
        for key in INPUT_KEYS:
            path = getattr(self.inputs, key)
            if not os.path.exists(path):
                raise ConfigInvalid(f"input {key!r} not found: {path}")

    def check_formations(self) -> None:
        with open(self.inputs.formation_order, encoding="utf-8") as fh:
            order = [line.strip() for line in fh if line.strip()]
        unknown = [f for f in self.targets if f not in order]
        if unknown:
            raise ConfigInvalid(f"target formations not in formation order: {unknown}")


def _section(raw: dict, key: str) -> dict:
    val = raw.get(key) or {}
    if not isinstance(val, dict):
        raise ConfigInvalid(f"{key!r} must be a mapping")
    return val


def _known(d: dict, allowed, where: str) -> None:
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigInvalid(f"unknown keys in {where}: {extra}")


def parse_config(raw: dict, base_dir: str = ".") -> PipelineConfig:
    if not isinstance(raw, dict):
        raise ConfigInvalid("configuration must be a mapping")
    _known(
        raw,
        ("inputs", "output_dir", "targets", "properties", "horizons", "phases", "horizon", "fpca_k", "polygon", "geostat", "evaluation", "zoo", "n_jobs"),
        "config",
    )
    ins = _section(raw, "inputs")
    _known(ins, INPUT_KEYS, "inputs")
    missing = [k for k in INPUT_KEYS if k not in ins]
    if missing:
        raise ConfigInvalid(f"missing input paths: {missing}")
    resolve = lambda p: os.path.normpath(os.path.join(base_dir, str(p)))  # noqa: E731
    inputs = Inputs(**{k: resolve(ins[k]) for k in INPUT_KEYS})

    targets = raw.get("targets")
    if not targets or not isinstance(targets, list):
        raise ConfigInvalid("'targets' must be a non-empty list of formations")
    k = int(raw.get("fpca_k", 10))
    if k < 1:
        raise ConfigInvalid("fpca_k must be at least 1")
    phases = list(raw.get("phases", PHASES))
    if any(p not in PHASES for p in phases):
        raise ConfigInvalid(f"phases must be drawn from {PHASES}")
    horizons = [int(h) for h in raw.get("horizons", DEFAULT_HORIZONS)]
    horizon = int(raw.get("horizon", 12))
    if horizon not in horizons:
        horizons.append(horizon)

    geo = _section(raw, "geostat")
    _known(geo, InterpolationConfig.__dataclass_fields__, "geostat")
    geostat = InterpolationConfig(**geo)
    if geostat.method not in ("kriging", "idw") or geostat.family not in FAMILIES:
        raise ConfigInvalid(f"bad geostat settings: {geo}")

    ev = _section(raw, "evaluation")
    _known(ev, EvalConfig.__dataclass_fields__, "evaluation")
    evaluation = EvalConfig(**ev)
    if evaluation.K < 2 or evaluation.B < 1 or evaluation.top_m < 1:
        raise ConfigInvalid("evaluation needs K >= 2, B >= 1, top_m >= 1")

    zoo = raw.get("zoo")
    if zoo is not None:
        try:
            get_zoo(zoo)
        except KeyError as exc:
            raise ConfigInvalid(str(exc)) from None

    polygon = raw.get("polygon")
    if polygon is not None:
        try:
            polygon = [(float(x), float(y)) for x, y in polygon]
        except (TypeError, ValueError):
            raise ConfigInvalid("polygon must be a list of [x, y] vertices") from None
        if len(polygon) < 3:
            raise ConfigInvalid("polygon needs at least 3 vertices")

    return PipelineConfig(
        inputs=inputs,
        output_dir=resolve(raw.get("output_dir", "out")),
        targets=[str(t) for t in targets],
        properties=[str(p) for p in raw.get("properties", PRIMARY_CURVES)],
        horizons=sorted(set(horizons)),
        phases=phases,
        horizon=horizon,
        fpca_k=k,
        polygon=polygon,
        geostat=geostat,
        evaluation=evaluation,
        zoo=zoo,
        n_jobs=int(raw.get("n_jobs", 1)),
    )


def load_config(path: str) -> PipelineConfig:
    if not os.path.isfile(path):
        raise ConfigInvalid(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigInvalid(f"cannot parse {path}: {exc}") from None
    return parse_config(raw, os.path.dirname(os.path.abspath(path)))


def default_config_text(targets=("Target",), output_dir: str = "out") -> str:
    """Config for a directory laid out like the synthetic generator's output."""
    doc = {
        "inputs": {
            "las_dir": "las",
            "dictionary": "dictionary.csv",
            "tops": "tops.csv",
            "coords": "coords.csv",
            "formation_order": "formation_order.txt",
            "meta": "meta.csv",
            "production": "production.csv",
        },
        "output_dir": output_dir,
        "targets": list(targets),
        "properties": list(PRIMARY_CURVES),
        "horizons": [6, 12],
        "horizon": 12,
        "phases": list(PHASES),
        "fpca_k": 10,
        "geostat": {"method": "kriging", "family": "exponential"},
        "evaluation": {"K": 10, "B": 3, "inner_K": 10, "inner_B": 1, "seed": 0, "top_m": 3},
    }
    return yaml.safe_dump(doc, sort_keys=False)
