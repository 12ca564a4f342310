"""File-level orchestration: raw inputs -> standardized frames -> features."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

from .errors import EmptyDataset, LasError, TooFewWells
from .formation import Formation3dMap, TopsTable, build_formation_map, infer_missing_tops, load_tops
from .fpca import FpcaModel, fit_fpca
from .geostat import InterpolationConfig, interpolate_features
from .las import AliasDictionary, LasFile, apply_dictionary, load_dictionary, read_las
from .logframe import StandardizedLogFrame, build_standardized_frame
from .production import DEFAULT_HORIZONS, CumulativeProductionFrame, build_production_frame, load_daily, load_meta

log = logging.getLogger(__name__)


@dataclass
class Inputs:
    las_dir: str
    dictionary: str
    tops: str
    coords: str
    formation_order: str
    meta: str
    production: str

    @classmethod
    def from_dir(cls, root: str) -> "Inputs":
        """Default file layout, as written by the synthetic generator."""
        j = lambda name: os.path.join(root, name)  # noqa: E731
        return cls(j("las"), j("dictionary.csv"), j("tops.csv"), j("coords.csv"), j("formation_order.txt"), j("meta.csv"), j("production.csv"))


def point_in_polygon(x: float, y: float, poly) -> bool:
    """Even-odd ray casting; points on an edge count as inside."""
    inside = False
    n = len(poly)
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        # on-edge check
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if abs(cross) <= 1e-12 * max(1.0, abs(x2 - x1) + abs(y2 - y1)) and min(x1, x2) <= x <= max(x1, x2) and min(y1, y2) <= y <= max(y1, y2):
            return True
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                inside = not inside
    return inside


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_las_dir(las_dir: str, dictionary: AliasDictionary) -> tuple[dict[str, LasFile], list[dict]]:
    """Parse and canonicalize every ``*.las`` file, sorted by file name."""
    files, audit = {}, []
    for name in sorted(os.listdir(las_dir)):
        if not name.lower().endswith(".las"):
            continue
        path = os.path.join(las_dir, name)
        try:
            raw = read_las(path)
        except LasError as exc:
            audit.append({"file": name, "status": type(exc).__name__, "detail": str(exc)})
            continue
        f, skipped = apply_dictionary(raw, dictionary)
        files[f.well_id] = f
        audit.append({"file": name, "status": "ok", "well_id": f.well_id, "skipped": skipped, "dropped_rows": raw.dropped_rows})
    return files, audit


@dataclass
class Preprocessed:
    frames: dict[str, StandardizedLogFrame]
    fmap: Formation3dMap
    tops: TopsTable
    production: CumulativeProductionFrame
    vertical_coords: dict[str, tuple[float, float]]
    audit: list[dict] = field(default_factory=list)


def preprocess(inputs: Inputs, targets, properties, horizons=DEFAULT_HORIZONS, polygon=None) -> Preprocessed:
    dictionary = load_dictionary(_read(inputs.dictionary))
    files, audit = load_las_dir(inputs.las_dir, dictionary)
    table = load_tops(_read(inputs.tops), _read(inputs.coords), _read(inputs.formation_order))
    coords = dict(table.well_coords)
    meta = load_meta(_read(inputs.meta))
    if polygon:
        coords = {w: xy for w, xy in coords.items() if point_in_polygon(*xy, polygon)}
        files = {w: f for w, f in files.items() if w in coords}
        keep = [w for w in meta.index if point_in_polygon(float(meta.at[w, "x"]), float(meta.at[w, "y"]), polygon)]
        meta = meta.loc[keep]
        if not keep:
            raise EmptyDataset("study polygon contains no horizontal wells")
        if not coords:
            raise EmptyDataset("study polygon contains no vertical wells")
        table = TopsTable(
            tops={k: v for k, v in table.tops.items() if k[0] in coords},
            well_coords=coords,
            formation_order=table.formation_order,
        )
    table = infer_missing_tops(table)
    for w, fm in sorted(table.inferred):
        audit.append({"well_id": w, "formation": fm, "status": "inferred_top"})
    fmap = build_formation_map(table, list(targets))
    for row in fmap.excluded:
        audit.append({**row, "status": "excluded_interval"} if isinstance(row, dict) else {"detail": row, "status": "excluded_interval"})
    frames = {p: build_standardized_frame(files, fmap, p, targets) for p in properties}
    daily = load_daily(_read(inputs.production))
    prod = build_production_frame(daily, meta, table.formation_order, horizons=horizons)
    return Preprocessed(frames, fmap, table, prod, coords, audit)


@dataclass
class Features:
    frame: CumulativeProductionFrame
    models: dict[tuple[str, str], FpcaModel]
    variograms: dict
    audit: list[dict]


def extract_features(pre: Preprocessed, k: int = 10, config: InterpolationConfig | None = None) -> Features:
    """fPCA per (property, formation) block, then interpolation of the first
    ``k`` scores to the horizontal wells."""
    models, scores, audit = {}, {}, []
    for prop, frame in sorted(pre.frames.items()):
        for formation, block in sorted(frame.blocks.items()):
            try:
                m = fit_fpca(block.matrix, block.well_ids, prop, formation)
            except TooFewWells as exc:
                audit.append({"property": prop, "formation": formation, "status": type(exc).__name__, "detail": str(exc)})
                continue
            models[(prop, formation)] = m
            scores[(prop, formation)] = (block.well_ids, m.scores)
    out, variograms, interp_audit = interpolate_features(pre.production, scores, pre.vertical_coords, k, config)
    return Features(out, models, variograms, audit + interp_audit)


def synthetic_features(field_dir: str, targets=("Target",), properties=None, k: int = 10, horizons=(12,)) -> Features:
    """Convenience wrapper for a generated field directory."""
    from .fpca import PRIMARY_CURVES

    pre = preprocess(Inputs.from_dir(field_dir), targets, properties or PRIMARY_CURVES, horizons=horizons)
    return extract_features(pre, k)

