"""Formation tops and the per-well formation interval map."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateTop,
    InvertedInterval,
    MissingCoordinates,
    NoDonors,
    NoFormationBelow,
    UnknownFormation,
)
from .geostat import idw


@dataclass
class TopsTable:
    """Formation tops keyed by ``(well_id, formation)``.

    ``inferred`` holds the keys whose top was filled by spatial
    interpolation rather than read from the input.
    """

    tops: dict[tuple[str, str], float]
    well_coords: dict[str, tuple[float, float]]
    formation_order: list[str]
    inferred: set[tuple[str, str]] = field(default_factory=set)

    @property
    def wells(self) -> list[str]:
        return sorted(self.well_coords)

    def top(self, well_id: str, formation: str) -> float | None:
        return self.tops.get((well_id, formation))


@dataclass(frozen=True)
class Interval:
    top: float
    bottom: float
    inferred_top: bool = False
    inferred_bottom: bool = False

    @property
    def thickness(self) -> float:
        return self.bottom - self.top


@dataclass
class Formation3dMap:
    intervals: dict[tuple[str, str], Interval]
    excluded: list[dict] = field(default_factory=list)

    def wells_in(self, formation: str) -> list[str]:
        return sorted(w for (w, f) in self.intervals if f == formation)

    def to_json(self) -> str:
        rows = [
            {
                "well_id": w,
                "formation": f,
                "top": iv.top,
                "bottom": iv.bottom,
                "inferred_top": iv.inferred_top,
                "inferred_bottom": iv.inferred_bottom,
            }
            for (w, f), iv in sorted(self.intervals.items())
        ]
        return json.dumps({"intervals": rows, "excluded": self.excluded}, indent=2, sort_keys=True)


def load_tops(tops_text: str, coords_text: str, order_text: str) -> TopsTable:
    """Read tops CSV (``well_id,formation,top_depth``), coordinates CSV
    (``well_id,x,y``) and a formation-order file (one name per line,
    shallowest first)."""
    order = [line.strip() for line in order_text.splitlines() if line.strip()]
    coords = {}
    for row in csv.DictReader(io.StringIO(coords_text)):
        coords[row["well_id"].strip()] = (float(row["x"]), float(row["y"]))

    known = set(order)
    tops: dict[tuple[str, str], float] = {}
    for row in csv.DictReader(io.StringIO(tops_text)):
        well = row["well_id"].strip()
        formation = row["formation"].strip()
        value = (row.get("top_depth") or "").strip()
        if formation not in known:
            raise UnknownFormation(f"{well}: formation {formation!r} not in formation order")
        if well not in coords:
            raise MissingCoordinates(f"no coordinates for well {well}")
        key = (well, formation)
        if key in tops:
            raise DuplicateTop(f"duplicate top for {well}/{formation}")
        if value:
            tops[key] = float(value)
    return TopsTable(tops=tops, well_coords=coords, formation_order=order)


def infer_missing_tops(table: TopsTable, power: float = 2.0) -> TopsTable:
    """Fill every missing ``(well, formation)`` top by inverse-distance
    weighting over the wells where that formation's top was observed.

    Previously inferred values are never used as donors, which keeps the
    operation idempotent.
    """
    tops = dict(table.tops)
    inferred = set(table.inferred)
    wells = table.wells
    for formation in table.formation_order:
        donors = [w for w in wells if (w, formation) in tops and (w, formation) not in inferred]
        missing = [w for w in wells if (w, formation) not in tops]
        if not missing:
            continue
        if not donors:
            raise NoDonors(f"formation {formation!r} has no known tops")
        pts = np.array([table.well_coords[w] for w in donors])
        vals = np.array([tops[(w, formation)] for w in donors])
        targets = np.array([table.well_coords[w] for w in missing])
        for w, v in zip(missing, idw(pts, vals, targets, power=power)):
            tops[(w, formation)] = float(v)
            inferred.add((w, formation))
    return TopsTable(tops=tops, well_coords=table.well_coords, formation_order=table.formation_order, inferred=inferred)


def build_formation_map(table: TopsTable, targets: list[str]) -> Formation3dMap:
    """Intervals ``(top(F), top(next formation below F))`` for each target.

    Wells whose interval comes out inverted are excluded and reported in
    ``Formation3dMap.excluded``.
    """
    order = table.formation_order
    intervals: dict[tuple[str, str], Interval] = {}
    excluded = []
    for formation in targets:
        if formation not in order:
            raise UnknownFormation(f"target {formation!r} not in formation order")
        pos = order.index(formation)
        if pos + 1 >= len(order):
            raise NoFormationBelow(f"{formation!r} is the deepest formation")
        below = order[pos + 1]
        for well in table.wells:
            top = table.top(well, formation)
            bottom = table.top(well, below)
            if top is None or bottom is None:
                excluded.append({"well_id": well, "formation": formation, "reason": "MissingTop"})
                continue
            if not top < bottom:
                err = InvertedInterval(f"{well}/{formation}: top {top} >= bottom {bottom}")
                excluded.append({"well_id": well, "formation": formation, "reason": type(err).__name__, "detail": str(err)})
                continue
            intervals[(well, formation)] = Interval(
                top=top,
                bottom=bottom,
                inferred_top=(well, formation) in table.inferred,
                inferred_bottom=(well, below) in table.inferred,
            )
    return Formation3dMap(intervals=intervals, excluded=excluded)
