"""Depth-normalized log sections per formation (standardized log frames)."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import CurveAbsent, EmptyBlock, EmptyList, InsufficientCoverage
from .formation import Formation3dMap
from .las import LasFile

MIN_RESAMPLE = 16
MIN_OVERLAP = 0.5
MAX_MISSING = 0.2


def choose_resample_count(n_list) -> int:
    """Rounded mean sample count, never below 16."""
    n_list = list(n_list)
    if not n_list:
        raise EmptyList("no sample counts")
    return max(int(round(float(np.mean(n_list)))), MIN_RESAMPLE)


def resample_depths(top: float, bottom: float, n: int) -> np.ndarray:
    d = top + np.arange(n) * ((bottom - top) / (n - 1))
    d[-1] = bottom
    return d


def _overlap_fraction(f: LasFile, top: float, bottom: float) -> float:
    if len(f.depth) == 0:
        return 0.0
    lo, hi = max(top, f.depth[0]), min(bottom, f.depth[-1])
    return max(hi - lo, 0.0) / (bottom - top)


def _interp_with_gaps(depth: np.ndarray, values: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Linear interpolation that returns nan outside the logged range or
    when either bracketing sample is missing."""
    out = np.full(len(query), np.nan)
    if len(depth) == 0:
        return out
    j = np.searchsorted(depth, query, side="left")
    jc = np.minimum(j, len(depth) - 1)
    exact = (j < len(depth)) & (depth[jc] == query)
    out[exact] = values[jc[exact]]
    inner = ~exact & (j > 0) & (j < len(depth))
    hi = j[inner]
    lo = hi - 1
    t = (query[inner] - depth[lo]) / (depth[hi] - depth[lo])
    # nan in either bracketing sample propagates
    out[inner] = values[lo] + t * (values[hi] - values[lo])
    return out


def extract_log_section(f: LasFile, curve: str, interval: tuple[float, float], n: int) -> np.ndarray:
    """Resample ``curve`` at ``n`` equally spaced depths from top to bottom.

    Raises `InsufficientCoverage` when the log covers less than half of the
    interval or more than 20% of the resampled values are missing.
    """
    if curve not in f.curves:
        raise CurveAbsent(f"{f.well_id}: curve {curve} absent")
    top, bottom = interval
    if _overlap_fraction(f, top, bottom) < MIN_OVERLAP:
        raise InsufficientCoverage(f"{f.well_id}/{curve}: log covers < 50% of [{top}, {bottom}]")
    out = _interp_with_gaps(f.depth, f.curves[curve], resample_depths(top, bottom, n))
    if np.isnan(out).mean() > MAX_MISSING:
        raise InsufficientCoverage(f"{f.well_id}/{curve}: > 20% of resampled values missing")
    return out


def fill_row_gaps(row: np.ndarray) -> np.ndarray:
    """Within-row linear gap fill; leading/trailing gaps take the nearest
    finite value."""
    ok = np.isfinite(row)
    if ok.all() or not ok.any():
        return row
    x = np.arange(len(row))
    return np.interp(x, x[ok], row[ok])


@dataclass
class Block:
    well_ids: list[str]
    matrix: np.ndarray
    n: int


@dataclass
class StandardizedLogFrame:
    property: str
    blocks: dict[str, Block] = field(default_factory=dict)
    provenance: dict[tuple[str, str], int] = field(default_factory=dict)
    rejections: list[dict] = field(default_factory=list)

    def block_csv(self, formation: str) -> str:
        b = self.blocks[formation]
        df = pd.DataFrame(b.matrix, index=pd.Index(b.well_ids, name="well_id"), columns=[str(i) for i in range(b.n)])
        return df.to_csv(float_format="%.17g")

    def sidecar(self) -> str:
        return json.dumps(
            {
                "property": self.property,
                "n": {f: b.n for f, b in sorted(self.blocks.items())},
                "rejections": self.rejections,
                "provenance": [
                    {"well_id": w, "formation": f, "n_i": n} for (w, f), n in sorted(self.provenance.items())
                ],
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def read(cls, prop: str, blocks_csv: dict[str, str], sidecar: str | None = None) -> "StandardizedLogFrame":
        frame = cls(prop)
        for formation, text in blocks_csv.items():
            df = pd.read_csv(io.StringIO(text), dtype={"well_id": str}, float_precision="round_trip").set_index("well_id")
            frame.blocks[formation] = Block(list(df.index), df.to_numpy(dtype=float), df.shape[1])
        if sidecar:
            meta = json.loads(sidecar)
            frame.rejections = meta.get("rejections", [])
            frame.provenance = {(p["well_id"], p["formation"]): p["n_i"] for p in meta.get("provenance", [])}
        return frame


def build_standardized_frame(files, fmap: Formation3dMap, prop: str, targets) -> StandardizedLogFrame:
    """Stack resampled sections of ``prop`` for every target formation.

    ``files`` maps well_id to a canonicalized `LasFile`. Rows are ordered by
    well_id. A formation where no well qualifies is left out and reported
    as ``EmptyBlock`` in ``rejections``.
    """
    frame = StandardizedLogFrame(prop)
    for formation in targets:
        candidates = []
        for well in fmap.wells_in(formation):
            iv = fmap.intervals[(well, formation)]
            f = files.get(well)
            reason = None
            if f is None:
                reason = "NoLasFile"
            elif prop not in f.curves:
                reason = CurveAbsent.__name__
            elif _overlap_fraction(f, iv.top, iv.bottom) < MIN_OVERLAP:
                reason = InsufficientCoverage.__name__
            else:
                n_i = int(((f.depth >= iv.top) & (f.depth <= iv.bottom)).sum())
                if n_i < 2:
                    reason = InsufficientCoverage.__name__
            if reason:
                frame.rejections.append({"well_id": well, "formation": formation, "reason": reason})
                continue
            frame.provenance[(well, formation)] = n_i
            candidates.append((well, f, iv, n_i))
        if not candidates:
            frame.rejections.append({"well_id": None, "formation": formation, "reason": EmptyBlock.__name__})
            continue
        n = choose_resample_count(c[3] for c in candidates)
        ids, rows = [], []
        for well, f, iv, _ in candidates:
            try:
                row = extract_log_section(f, prop, (iv.top, iv.bottom), n)
            except (CurveAbsent, InsufficientCoverage) as exc:
                frame.rejections.append({"well_id": well, "formation": formation, "reason": type(exc).__name__})
                continue
            ids.append(well)
            rows.append(fill_row_gaps(row))
        if not rows:
            frame.rejections.append({"well_id": None, "formation": formation, "reason": EmptyBlock.__name__})
            continue
        frame.blocks[formation] = Block(ids, np.vstack(rows), n)
    return frame
