"""Cumulative production data frame for horizontal wells."""

from __future__ import annotations

import hashlib
import io
import re

import numpy as np
import pandas as pd

from .errors import DuplicateFeature, FormationUnrecognized, NegativeVolume, WellAbsent

PHASES = ("oil", "gas")
DEFAULT_HORIZONS = (6, 12, 18)
ID_COL = "API"
FORMATION_COL = "TARGET FORMATION"
X_COL = "surface_X"
Y_COL = "surface_Y"
BASE_COLS = (FORMATION_COL, X_COL, Y_COL)
_CUM_RE = re.compile(r"^Cum_(\d+)month_(oil|gas)_Prod$")


def cum_column(phase: str, months: int) -> str:
    return f"Cum_{months}month_{phase}_Prod"


def feature_name(prop: str, formation: str, j: int) -> str:
    return f"{prop}_{formation}_fpc{j}"


def fold_name(name: str) -> str:
    return "".join(name.split()).casefold()


def add_months(day: np.datetime64, months: int) -> np.datetime64:
    """Same day-of-month ``months`` later, clamped to the month's last day."""
    ts = pd.Timestamp(day) + pd.DateOffset(months=months)
    return np.datetime64(ts.date(), "D")


def cumulative_production(dates, volumes, months: int) -> float:
    """Sum of daily volumes over ``[first date, first date + months)``.

    Returns ``nan`` when the series is empty or ends before the horizon.
    """
    dates = np.asarray(dates, dtype="datetime64[D]")
    vols = np.asarray(volumes, dtype=float)
    if len(dates) == 0:
        return float("nan")
    if np.any(vols < 0):
        raise NegativeVolume("negative daily production volume")
    order = np.argsort(dates, kind="stable")
    dates, vols = dates[order], vols[order]
    end = add_months(dates[0], months)
    if dates[-1] < end - np.timedelta64(1, "D"):
        return float("nan")
    return float(vols[dates < end].sum())


def load_meta(text: str) -> pd.DataFrame:
    meta = pd.read_csv(io.StringIO(text), dtype={"well_id": str, "target_formation": str})
    meta["well_id"] = meta["well_id"].str.strip()
    return meta.set_index("well_id")


def load_daily(text: str) -> pd.DataFrame:
    daily = pd.read_csv(io.StringIO(text), dtype={"well_id": str})
    daily["well_id"] = daily["well_id"].str.strip()
    daily["date"] = pd.to_datetime(daily["date"]).values.astype("datetime64[D]")
    return daily


def find_target_formation(meta: pd.DataFrame, well_id: str, formation_order) -> str:
    """Canonical target formation name of ``well_id``.

    Matching ignores case and all whitespace.
    """
    if well_id not in meta.index:
        raise WellAbsent(f"well {well_id} not in metadata")
    raw = str(meta.at[well_id, "target_formation"])
    lookup = {fold_name(f): f for f in formation_order}
    try:
        return lookup[fold_name(raw)]
    except KeyError:
        raise FormationUnrecognized(f"{well_id}: target formation {raw!r} not recognized") from None


class CumulativeProductionFrame:
    """One row per horizontal well.

    Wraps a pandas DataFrame indexed by ``API`` with columns
    ``TARGET FORMATION``, ``surface_X``, ``surface_Y``, the cumulative
    production columns ``Cum_<m>month_<phase>_Prod`` and any appended
    feature columns. Instances are treated as immutable.
    """

    def __init__(self, df: pd.DataFrame, features=()):
        self.df = df
        self.features = tuple(features)

    def __len__(self) -> int:
        return len(self.df)

    @property
    def well_ids(self) -> list[str]:
        return list(self.df.index)

    def xy(self, well_id: str) -> tuple[float, float]:
        return float(self.df.at[well_id, X_COL]), float(self.df.at[well_id, Y_COL])

    def coords(self) -> np.ndarray:
        return self.df[[X_COL, Y_COL]].to_numpy(dtype=float)

    def wells_by_formation(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for w, f in self.df[FORMATION_COL].items():
            out.setdefault(f, []).append(w)
        return out

    def target(self, phase: str, months: int) -> pd.Series:
        return self.df[cum_column(phase, months)]

    def column_hash(self, columns=None) -> str:
        cols = list(columns) if columns is not None else list(self.df.columns)
        h = hashlib.sha256()
        for c in cols:
            h.update(c.encode())
            h.update(pd.util.hash_pandas_object(self.df[c], index=True).values.tobytes())
        return h.hexdigest()

    def append_features(self, name: str, values: dict) -> "CumulativeProductionFrame":
        """Return a new frame with column ``name``; wells absent from
        ``values`` get ``nan``."""
        if name in self.df.columns:
            raise DuplicateFeature(f"feature {name!r} already present")
        col = pd.Series({w: float(values.get(w, np.nan)) for w in self.df.index}, dtype=float)
        df = self.df.copy()
        df[name] = col.reindex(df.index)
        return CumulativeProductionFrame(df, self.features + (name,))

    def filter_wells(self, keep) -> "CumulativeProductionFrame":
        keep = set(keep)
        return CumulativeProductionFrame(self.df.loc[[w for w in self.df.index if w in keep]], self.features)

    def to_csv(self, path) -> None:
        self.df.to_csv(path, index_label=ID_COL, float_format="%.17g", lineterminator="\n")

    @classmethod
    def read_csv(cls, path) -> "CumulativeProductionFrame":
        df = pd.read_csv(path, dtype={ID_COL: str, FORMATION_COL: str}, float_precision="round_trip").set_index(ID_COL)
        numeric = [c for c in df.columns if c != FORMATION_COL]
        df[numeric] = df[numeric].astype(float)
        features = [c for c in df.columns if c not in BASE_COLS and not _CUM_RE.match(c)]
        return cls(df, features)


def build_production_frame(
    daily: pd.DataFrame,
    meta: pd.DataFrame,
    formation_order,
    horizons=DEFAULT_HORIZONS,
    phases=PHASES,
) -> CumulativeProductionFrame:
    """Assemble the frame: one row per metadata well.

    Wells without daily records get missing cumulative values. Empty
    volume cells are treated as unreported days.
    """
    groups = {w: g for w, g in daily.groupby("well_id", sort=True)}
    rows = {}
    for well in sorted(meta.index):
        row = {
            FORMATION_COL: find_target_formation(meta, well, formation_order),
            X_COL: float(meta.at[well, "x"]),
            Y_COL: float(meta.at[well, "y"]),
        }
        g = groups.get(well)
        for phase in phases:
            if g is not None:
                reported = g[g[phase].notna()]
                dates, vols = reported["date"].to_numpy(), reported[phase].to_numpy(dtype=float)
            else:
                dates, vols = [], []
            for m in horizons:
                row[cum_column(phase, m)] = cumulative_production(dates, vols, m)
        rows[well] = row
    df = pd.DataFrame.from_dict(rows, orient="index")
    df.index.name = ID_COL
    return CumulativeProductionFrame(df)
